#include "latgas/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace latgas::models {

namespace {

constexpr double kFdStep = 1e-5;  // central-difference step for unregistered derivatives

double central_diff(const ScalarFn& f, double x) { return (f(x + kFdStep) - f(x - kFdStep)) / (2.0 * kFdStep); }

double central_diff2(const ScalarFn& f, double x) {
    return (f(x + kFdStep) - 2.0 * f(x) + f(x - kFdStep)) / (kFdStep * kFdStep);
}

double get_param(const std::map<std::string, double>& params, const std::string& key, double fallback) {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
}

void reject_unknown_params(const std::string& family, const std::map<std::string, double>& params,
                           std::initializer_list<const char*> known) {
    for (const auto& [key, value] : params) {
        (void)value;
        bool ok = false;
        for (const char* k : known)
            if (key == k) ok = true;
        if (!ok) throw std::invalid_argument("builtin_model: family '" + family + "' has no parameter '" + key + "'");
    }
}

bool geometry_equal(const Geometry& a, const Geometry& b) {
    if (a.index() != b.index()) return false;
    if (is_periodic(a))
        return std::get<PeriodicGeometry>(a).mass == std::get<PeriodicGeometry>(b).mass;
    const auto& ba = std::get<BoundaryGeometry>(a);
    const auto& bb = std::get<BoundaryGeometry>(b);
    return ba.alpha == bb.alpha && ba.beta == bb.beta;
}

}  // namespace

double TransportModel::d_prime(double rho) const {
    return has_closed_derivatives ? D_prime(rho) : central_diff(D, rho);
}

double TransportModel::chi_p(double rho) const {
    return has_closed_derivatives ? chi_prime(rho) : central_diff(chi, rho);
}

double TransportModel::chi_pp(double rho) const {
    return has_closed_derivatives ? chi_second(rho) : central_diff2(chi, rho);
}

bool operator==(const TransportModel& a, const TransportModel& b) {
    return a.family == b.family && a.params == b.params && a.density_range == b.density_range &&
           a.has_field == b.has_field && geometry_equal(a.geometry, b.geometry);
}

TransportModel builtin_model(const std::string& family, const std::map<std::string, double>& params,
                             const Geometry& geometry) {
    TransportModel m;
    m.family = family;
    m.params = params;
    m.geometry = geometry;
    m.has_closed_derivatives = true;

    if (family == "ssep" || family == "wasep") {
        reject_unknown_params(family, params, family == "wasep" ? std::initializer_list<const char*>{"field"}
                                                                : std::initializer_list<const char*>{});
        m.D = [](double) { return 0.5; };
        m.D_prime = [](double) { return 0.0; };
        m.chi = [](double rho) { return rho * (1.0 - rho); };
        m.chi_prime = [](double rho) { return 1.0 - 2.0 * rho; };
        m.chi_second = [](double) { return -2.0; };
        m.density_range = {0.0, 1.0};
        if (family == "wasep") {
            const double e0 = get_param(params, "field", 1.0);
            m.params["field"] = e0;
            m.field = [e0](double) { return e0; };
            m.has_field = true;
        }
    } else if (family == "kmp") {
        reject_unknown_params(family, params, {"rho_max"});
        const double rho_max = get_param(params, "rho_max", 10.0);
        if (rho_max <= 0.0) throw std::invalid_argument("builtin_model: kmp rho_max must be positive");
        m.params["rho_max"] = rho_max;
        m.D = [](double) { return 1.0; };
        m.D_prime = [](double) { return 0.0; };
        m.chi = [](double rho) { return rho * rho; };
        m.chi_prime = [](double rho) { return 2.0 * rho; };
        m.chi_second = [](double) { return 2.0; };
        m.density_range = {0.0, rho_max};
    } else if (family == "zero_range") {
        reject_unknown_params(family, params, {"psi_scale", "psi_power", "rho_max"});
        const double a = get_param(params, "psi_scale", 1.0);
        const double p = get_param(params, "psi_power", 1.0);
        const double rho_max = get_param(params, "rho_max", 10.0);
        if (a <= 0.0 || p < 1.0) throw std::invalid_argument("builtin_model: zero_range needs psi_scale > 0, psi_power >= 1");
        if (rho_max <= 0.0) throw std::invalid_argument("builtin_model: zero_range rho_max must be positive");
        m.params["psi_scale"] = a;
        m.params["psi_power"] = p;
        m.params["rho_max"] = rho_max;
        // Psi(rho) = a rho^p: chi = Psi, D = Psi'.
        m.chi = [a, p](double rho) { return a * std::pow(rho, p); };
        m.chi_prime = [a, p](double rho) { return a * p * std::pow(rho, p - 1.0); };
        m.chi_second = [a, p](double rho) { return p == 1.0 ? 0.0 : a * p * (p - 1.0) * std::pow(rho, p - 2.0); };
        m.D = m.chi_prime;
        m.D_prime = m.chi_second;
        m.density_range = {0.0, rho_max};
    } else if (family == "ginzburg_landau") {
        reject_unknown_params(family, params, {"d0", "d2", "c0", "rho_max"});
        const double d0 = get_param(params, "d0", 1.0);
        const double d2 = get_param(params, "d2", 0.0);
        const double c0 = get_param(params, "c0", 1.0);
        const double rho_max = get_param(params, "rho_max", 10.0);
        if (d0 <= 0.0 || d2 < 0.0 || c0 <= 0.0) throw std::invalid_argument("builtin_model: ginzburg_landau needs d0 > 0, d2 >= 0, c0 > 0");
        m.params["d0"] = d0;
        m.params["d2"] = d2;
        m.params["c0"] = c0;
        m.params["rho_max"] = rho_max;
        m.D = [d0, d2](double rho) { return d0 + d2 * rho * rho; };
        m.D_prime = [d2](double rho) { return 2.0 * d2 * rho; };
        m.chi = [c0](double) { return c0; };
        m.chi_prime = [](double) { return 0.0; };
        m.chi_second = [](double) { return 0.0; };
        m.density_range = {-rho_max, rho_max};
    } else {
        throw std::invalid_argument("builtin_model: unknown family '" + family + "'");
    }
    return m;
}

TransportModel zero_range_model(ScalarFn psi, ScalarFn psi_prime, ScalarFn psi_second, double rho_max,
                                const Geometry& geometry) {
    if (!psi) throw std::invalid_argument("zero_range_model: Psi is required");
    if (rho_max <= 0.0) throw std::invalid_argument("zero_range_model: rho_max must be positive");
    TransportModel m;
    m.family = "zero_range_custom";
    m.geometry = geometry;
    m.density_range = {0.0, rho_max};
    m.chi = psi;
    if (psi_prime && psi_second) {
        m.has_closed_derivatives = true;
        m.D = psi_prime;
        m.chi_prime = psi_prime;
        m.chi_second = psi_second;
        m.D_prime = psi_second;
    } else {
        m.D = [psi](double rho) { return central_diff(psi, rho); };
    }
    return m;
}

ConditionReport check_conditions(const TransportModel& model, int n, double tol) {
    if (n < 2) throw std::invalid_argument("check_conditions: need at least 2 grid points");
    ConditionReport rep;
    rep.tol = tol;
    rep.grid.reserve(static_cast<std::size_t>(n));
    const double lo = model.density_range[0];
    const double width = model.density_range[1] - lo;
    for (int i = 0; i < n; ++i) rep.grid.push_back(lo + width * (i + 0.5) / n);

    double gmin = std::numeric_limits<double>::infinity();
    double cmin = std::numeric_limits<double>::infinity();
    for (double rho : rep.grid) {
        const double dp = model.d_prime(rho);
        const double cp = model.chi_p(rho);
        const double cpp = model.chi_pp(rho);
        const double dd = model.D(rho);
        gmin = std::min(gmin, dp * cp - dd * cpp);
        double inv_chi_dd;
        if (model.has_closed_derivatives) {
            const double c = model.chi(rho);
            inv_chi_dd = (2.0 * cp * cp - c * cpp) / (c * c * c);
        } else {
            inv_chi_dd = central_diff2([&](double r) { return 1.0 / model.chi(r); }, rho);
        }
        cmin = std::min(cmin, inv_chi_dd);
        if (cpp > tol) rep.chi_convex_at.push_back(rho);
    }
    rep.gradient_margin = gmin;
    rep.gradient_condition = gmin >= -tol;
    rep.inv_chi_margin = cmin;
    rep.inv_chi_convex = cmin >= -tol;
    return rep;
}

}  // namespace latgas::models
