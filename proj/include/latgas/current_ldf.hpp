#pragma once

#include <functional>
#include <vector>

#include "latgas/grid.hpp"
#include "latgas/microsim.hpp"
#include "latgas/models.hpp"

namespace latgas::cur {

/// Cost of sustaining a prescribed current history: the density it induces
/// through the continuity equation, and the quadratic excess of the current
/// over the model's instantaneous one.  +infinity (IEEE) when the induced
/// density leaves the admissible range or the mobility degenerates.
struct CurrentRateEvaluation {
    SpaceTimePath w;    ///< input instantaneous-current path (cells)
    SpaceTimePath rho;  ///< induced density path (nodes)
    double cost{0.0};
    std::vector<double> per_slice;  ///< space integral of (w - J)^2 / (2 chi) per frame
};

/// Report of the microscopic-vs-macroscopic integrated-current comparison:
/// the simulated pairing of the bond counters with a test function against
/// the diffusion-equation prediction for the same initial profile.
struct LlnReport {
    double empirical_mean{0.0};    ///< <W^N_T, F> averaged over replicas
    double empirical_stderr{0.0};  ///< replica-to-replica standard error
    double predicted{0.0};         ///< -1/2 int_0^T int F grad(rho) du dt
    double discrepancy{0.0};
    bool within_band{false};  ///< discrepancy <= 3 standard errors
    int replicas{0};
};

/// Evaluate 1/2 int dt int (w - J(rho))^2 / chi(rho) du with rho the
/// continuity solution started from gamma (geometry taken from the model).
CurrentRateEvaluation rate_current(const SpaceTimePath& w, const GridFunction& gamma,
                                   const models::TransportModel& model);

/// Simulate the exclusion dynamics from Bernoulli(gamma) and compare the
/// final integrated current, paired with F_test, against the macroscopic
/// prediction from the heat solution.  Needs params.replicas >= 2 for the
/// error band; dt <= 0 picks h/2 for the macroscopic solve.
LlnReport current_lln_check(const sim::SimParams& params, const GridFunction& gamma,
                            const std::function<double(double)>& F_test, double dt = 0.0);

}  // namespace latgas::cur
