#pragma once

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "latgas/grid.hpp"

namespace latgas::models {

using ScalarFn = std::function<double(double)>;

/// Transport coefficients of a one-dimensional lattice gas in the diffusive
/// scaling: flux J(rho) = -D(rho) grad rho + chi(rho) E(u).
///
/// Builds from the same family+parameters compare equal and evaluate
/// identically; equality looks only at (family, params, geometry, range).
struct TransportModel {
    std::string family;
    std::map<std::string, double> params;

    ScalarFn D;
    ScalarFn chi;
    /// Closed-form derivatives when the family registers them; otherwise
    /// unset and consumers fall back to central differences (step 1e-5).
    ScalarFn D_prime, chi_prime, chi_second;
    bool has_closed_derivatives{false};

    ScalarFn field;  ///< E(u); only meaningful when has_field
    bool has_field{false};

    std::array<double, 2> density_range{0.0, 1.0};
    Geometry geometry{BoundaryGeometry{}};

    double field_at(double u) const { return has_field ? field(u) : 0.0; }
    bool in_range(double rho) const { return rho >= density_range[0] && rho <= density_range[1]; }

    double d_prime(double rho) const;    ///< D'(rho), closed form or central difference
    double chi_p(double rho) const;      ///< chi'(rho)
    double chi_pp(double rho) const;     ///< chi''(rho)

    friend bool operator==(const TransportModel& a, const TransportModel& b);
    friend bool operator!=(const TransportModel& a, const TransportModel& b) { return !(a == b); }
};

/// Families: "ssep" (D=1/2, chi=rho(1-rho), range [0,1]),
/// "kmp" (D=1, chi=rho^2, range [0, rho_max], param rho_max, default 10),
/// "zero_range" (D=Psi', chi=Psi with Psi = psi_scale * rho^psi_power,
///               strictly increasing; range [0, rho_max], default 10),
/// "ginzburg_landau" (D = d0 + d2 rho^2 with d0 > 0, chi = c0 > 0 constant,
///                    range [-rho_max, rho_max], default 10),
/// "wasep" (ssep coefficients plus constant field E = field, default 1).
/// Unknown family or invalid parameters throw std::invalid_argument.
TransportModel builtin_model(const std::string& family,
                             const std::map<std::string, double>& params = {},
                             const Geometry& geometry = BoundaryGeometry{});

/// Zero-range model with a caller-supplied strictly increasing Psi.
/// Derivatives may be omitted (central differences are used instead).
TransportModel zero_range_model(ScalarFn psi, ScalarFn psi_prime, ScalarFn psi_second,
                                double rho_max, const Geometry& geometry);

/// Structural-condition margins evaluated on a stated density grid.
///
/// gradient_margin = min over the grid of D'chi' - D chi''  (>= -tol passes;
/// equality-class families sit at 0 exactly when closed forms are registered).
/// inv_chi_margin = min over the grid of (1/chi)'' (closed form
/// (2 chi'^2 - chi chi'')/chi^3 when registered, else a second difference).
struct ConditionReport {
    std::vector<double> grid;           ///< densities where margins were evaluated
    bool gradient_condition{false};
    double gradient_margin{0.0};
    bool inv_chi_convex{false};
    double inv_chi_margin{0.0};
    std::vector<double> chi_convex_at;  ///< grid densities with chi''(rho) > tol
    double tol{1e-10};
};

/// Evaluates both margins on n densities placed strictly inside the model's
/// range (cell midpoints of a uniform partition, so chi(0)=0 endpoints are
/// never sampled).  tol absorbs rounding only; finite-difference fallbacks
/// carry O(step) noise and need a looser tol from the caller.
ConditionReport check_conditions(const TransportModel& model, int n = 512, double tol = 1e-10);

}  // namespace latgas::models
