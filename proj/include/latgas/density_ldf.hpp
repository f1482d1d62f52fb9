#pragma once

#include <string>
#include <vector>

#include "latgas/grid.hpp"
#include "latgas/models.hpp"

namespace latgas::ldf {

/// Result of the nonlinear two-point BVP  F'' = (gamma - F)(F')^2 / (F(1-F)),
/// F(0)=alpha, F(1)=beta, together with the free-energy value
///   value = integral of  gamma log(gamma/F) + (1-gamma) log((1-gamma)/(1-F))
///           + log(F'/(beta-alpha)).
struct FreeEnergySolution {
    GridFunction gamma;    ///< input profile (nodes)
    GridFunction F;        ///< increasing auxiliary profile (nodes)
    GridFunction F_prime;  ///< F' at the nodes, from the integrator
    double value{0.0};

    // Solver diagnostics.
    double residual_sup{0.0};     ///< sup over nodes of the first-order-system residual
                                  ///< (F' vs the carried slope, slope' vs the right side;
                                  ///< 6-point first-derivative stencils)
    double endpoint_error{0.0};   ///< |F(1) - beta| achieved by the shooting/collocation stage
    int iterations{0};            ///< bisection or Newton iterations spent
    double bracket_lo{0.0};       ///< final shooting bracket on s = F'(0)
    double bracket_hi{0.0};
    bool used_collocation{false}; ///< true when the Newton-collocation fallback produced F
};

/// Dynamical cost of a density path: per time slice the excess over the
/// instantaneous current is chi(rho) grad H with grad(chi grad H) = -r,
/// r = d_t rho - div(D grad rho) + div(chi E); cost = 1/2 int dt int du
/// chi (grad H)^2.  +infinity is the IEEE infinity sentinel.
struct RateEvaluation {
    SpaceTimePath path;          ///< the input density path
    SpaceTimePath H;             ///< optimal potentials per frame (nodes; 0 at both ends)
    SpaceTimePath optimal_flux;  ///< the matching current J(rho) + chi grad H (cells)
    double cost{0.0};
    std::vector<double> per_slice;  ///< space integral of chi (grad H)^2 / 2 per frame
};

/// Local (product-measure) free energy of `gamma` relative to `rho_bar`,
/// by trapezoid.  Returns +infinity when gamma touches 0 or 1 at an
/// interior node; endpoint values may sit on the reservoir densities.
double free_energy_F0(const GridFunction& gamma, const GridFunction& rho_bar);

/// Solve the auxiliary BVP by shooting on s = F'(0) (adaptive RK4 with
/// per-cell substeps, bisection on the monotone map s -> F(1) to
/// |F(1)-beta| <= 1e-10, initial bracket s in [1e-6, (beta-alpha)*1e3]);
/// falls back to damped-Newton collocation with continuation
/// gamma_theta = rho_bar + theta (gamma - rho_bar) in <= 32 steps when the
/// bracket is lost.  Requires 0 < alpha < beta < 1 (equal reservoir
/// densities route to free_energy_F0 instead).
FreeEnergySolution solve_F_bvp(const GridFunction& gamma, double alpha, double beta);

/// Dynamical density rate functional over the path's time span.
/// Boundary geometry: frames must hold the reservoir values at the ends.
/// Periodic geometry: frames must conserve mass (else +infinity).
RateEvaluation rate_density(const SpaceTimePath& path, const models::TransportModel& model);

}  // namespace latgas::ldf
