#pragma once

#include "latgas/density_ldf.hpp"
#include "latgas/grid.hpp"

namespace latgas::qp {

/// Output of the adjoint-evolution construction of the optimal fluctuation
/// path: starting from gamma, the transformed profile F relaxes under the
/// heat flow; the density read back from each F-frame relaxes under the
/// adjoint hydrodynamics, and its time reversal is the least-cost path from
/// the stationary profile to gamma.
struct AdjointSolution {
    GridFunction gamma;
    GridFunction phi;          ///< logit(F) of the auxiliary profile at t=0
    SpaceTimePath F_path;      ///< heat-flow history of F
    SpaceTimePath rho_path;    ///< reconstructed density history (gamma -> rho_bar)
    SpaceTimePath optimal_path;///< time reversal of rho_path (rho_bar -> gamma)
    double T_used{0.0};        ///< final horizon after automatic doubling
    double final_deviation{0.0};  ///< sup |F_T - rho_bar| actually reached
};

struct QuasipotentialCheck {
    double cost{0.0};         ///< dynamical cost of the optimal path
    double free_energy{0.0};  ///< static value it must match
    double relative_gap{0.0};
    double T_used{0.0};
};

struct HamiltonJacobiResidual {
    double mobility_term{0.0};  ///< integral of chi(gamma) (grad dW)^2
    double drift_term{0.0};     ///< integral of dW * Lap(gamma)
    double residual{0.0};       ///< their sum (0 in the continuum)
};

struct DriftConsistency {
    GridFunction route_adjoint;   ///< 1/2 Lap gamma - div(chi grad phi), adjoint-equation form
    GridFunction route_identity;  ///< -1/2 Lap gamma + div(chi grad [logit gamma - phi])
    double sup_difference{0.0};
};

/// phi = logit(F) with F from density_ldf::solve_F_bvp; endpoints land on
/// logit(alpha), logit(beta).
GridFunction solve_phi(const GridFunction& gamma, double alpha, double beta);

/// Sup-norm residual of  Lap(phi)/(grad phi)^2 + 1/(1+e^phi) - gamma  at the
/// interior nodes (4th-order stencils); a direct check that phi encodes the
/// profile it was solved for.
double phi_equation_residual(const GridFunction& phi, const GridFunction& gamma);

/// Both brackets of the stationary Hamilton-Jacobi identity evaluated at
/// dW = logit(gamma) - phi(gamma); the sum vanishes in the continuum, and
/// the discrete value shrinks as O(h^2).  Reservoir densities are read off
/// gamma's endpoints.
HamiltonJacobiResidual hamilton_jacobi_residual(const GridFunction& gamma);

/// Evolve F = expit(phi) under the heat flow until sup|F_T - rho_bar| is at
/// most 1e-4 (horizon doubles automatically, capped at 40), reconstruct the
/// density per frame via rho = F + F(1-F) Lap F / (grad F)^2, and reverse
/// time.  dt <= 0 picks h/2.  Monotonicity of every F frame is asserted.
AdjointSolution adjoint_path(const GridFunction& gamma, double alpha, double beta, double T = 5.0,
                             double dt = 0.0);

/// Compare the dynamical cost of the constructed optimal path against the
/// static free energy.  Equal reservoir densities use the time-reversed
/// relaxation of gamma itself and the local free energy (the reversible
/// case); otherwise the adjoint construction and the BVP value.
QuasipotentialCheck verify_quasipotential(const GridFunction& gamma, double alpha, double beta,
                                          double T = 5.0, double dt = 0.0);

/// The adjoint drift computed two ways: directly from the adjoint equation,
/// and through the identity that ties it to the forward drift and the free
/// energy gradient.  Both discretize the mobility so that
/// div(chi~ grad logit gamma) = Lap gamma holds exactly; the difference is
/// then pure rounding.  phi_override (default: phi solved from gamma) feeds
/// only the adjoint-equation route, so a wrong phi shows up as a nonzero
/// difference.
DriftConsistency adjoint_drift_consistency(const GridFunction& gamma,
                                           const GridFunction* phi_override = nullptr);

}  // namespace latgas::qp
