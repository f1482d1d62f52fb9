#pragma once

#include <vector>

#include "latgas/grid.hpp"
#include "latgas/models.hpp"

namespace latgas::phase {

/// Minimizer of the time-independent cost of holding current q.
struct ProfileOptimum {
    double q{0.0};
    GridFunction profile;           ///< optimal density (nodes)
    double value{0.0};              ///< the minimized cost per unit time
    int iterations{0};
    double gradient_norm{0.0};      ///< sup norm of the projected functional gradient at exit
    double constraint_residual{0.0};///< |mass - m| (periodic) or endpoint error (boundary)
};

/// Best periodic wave rho0 (mean m) and velocity v sustaining time-averaged
/// current q, under a K-mode Fourier parametrization.
struct TravelingWaveOptimum {
    double q{0.0};
    double m{0.0};
    GridFunction rho0;       ///< wave profile (nodes, wrap duplicate)
    double velocity{0.0};
    double cost_per_time{0.0};
    int modes{0};
};

enum class PhaseClass { unique_phase, coexistence, traveling_wave };

struct PhaseReport {
    std::vector<double> q;
    std::vector<double> U;          ///< fixed-profile optimum per q
    std::vector<double> tw;         ///< traveling-wave optimum per q
    std::vector<double> envelope;   ///< lower convex envelope of U on the grid
    std::vector<PhaseClass> labels;
    double q_star{0.0};             ///< transition estimate; NaN when no transition in range
    int modes{0};
};

/// Minimize 1/2 int (q + D(rho) grad rho - chi(rho) E)^2 / chi(rho) du over
/// profiles satisfying the geometry constraint (Dirichlet ends, or
/// periodicity with fixed mass).  Projected gradient descent with
/// Barzilai-Borwein steps from 3 starts (flat/linear interpolant plus two
/// seeded smooth perturbations); the exact discrete gradient of the
/// quadrature is used.  Fails when the projected gradient exceeds 1e-8
/// after 1e5 iterations.
ProfileOptimum U_minimize(double q, const models::TransportModel& model, const Geometry& geometry,
                          const Grid& grid = Grid(128));

/// Cost of the flat profile: q^2 / (2 chi(m)).  This is the full optimum
/// whenever 1/chi is convex (see models::check_conditions).
double U_constant(double q, double m, const models::TransportModel& model);

/// Period-averaged cost of the exact wave current w(u,t) = v rho0(u-vt) +
/// (q - v m): continuity fixes w up to a constant, and the time-average
/// current constraint pins the constant.  Evaluated on cell midpoints.
double traveling_wave_cost(double q, double m, const models::TransportModel& model, double v,
                           const GridFunction& rho0);

/// Joint minimization of traveling_wave_cost over (v, K Fourier mode pairs)
/// with >= 8 deterministic starts and a range-feasibility penalty annealed
/// x10 over 5 rounds.  Throws when every start ends infeasible.
TravelingWaveOptimum traveling_wave_search(double q, double m, const models::TransportModel& model,
                                           int K = 6, const Grid& grid = Grid(128));

/// Lower convex envelope of U on the q grid (values at the same q points).
std::vector<double> lower_convex_envelope(const std::vector<double>& q, const std::vector<double>& U);

/// Classification given precomputed values (exposed so synthetic U tables
/// can exercise the envelope logic): traveling-wave where tw beats U,
/// coexistence where the envelope is strictly below U, unique-phase
/// otherwise.  rel_tol guards against optimizer noise.
PhaseReport classify_from_values(const std::vector<double>& q, const std::vector<double>& U,
                                 const std::vector<double>& tw, int modes, double rel_tol = 1e-6);

/// Full scan: U and traveling-wave optima per q, envelope, classification,
/// and a bisection estimate of the transition current q* between adjacently
/// classified grid points.
PhaseReport phase_report(const models::TransportModel& model, double m, const std::vector<double>& q_grid,
                         int K = 6);

}  // namespace latgas::phase
