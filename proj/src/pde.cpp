#include "latgas/pde.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>

#include "latgas/errors.hpp"
#include "latgas/linalg.hpp"

namespace latgas::pde {

namespace {

// dt <= 0 selects the default step h/2.
double effective_dt(double dt, double h) {
    if (!std::isfinite(dt)) throw ValidationError("pde: dt must be finite");
    return dt > 0.0 ? dt : 0.5 * h;
}

int step_count(double T, double dt) {
    if (T < 0.0 || !std::isfinite(T)) throw ValidationError("pde: horizon T must be finite and >= 0");
    if (T == 0.0) return 0;
    return static_cast<int>(std::max<std::int64_t>(1, std::llround(T / dt)));
}

void require_kind(const GridFunction& f, FieldKind kind, const char* who) {
    if (f.kind != kind) throw ValidationError(std::string(who) + ": wrong field kind");
    if (!f.all_finite()) throw ValidationError(std::string(who) + ": non-finite input values");
}

void require_end_match(const GridFunction& gamma, double alpha, double beta, const char* who) {
    const double tol = gamma.grid.h();
    if (std::abs(gamma.values.front() - alpha) > tol || std::abs(gamma.values.back() - beta) > tol)
        throw ValidationError(std::string(who) + ": initial profile does not match the boundary densities");
}

// One implicit-diffusion/explicit-drift step in increment form:
// (I - dt div D_mid grad) delta = dt [div(D_mid grad rho) - div(chi_mid E)],
// coefficients frozen at the step start.  Returns nullopt when the result
// leaves [lo, hi] by more than a rounding slack; values inside the slack are
// clamped onto the range.
std::optional<std::vector<double>> hydro_step(const models::TransportModel& model, const Grid& g,
                                              const std::vector<double>& rho, double dt, bool periodic) {
    const int M = g.cells;
    const double h = g.h();
    const double lo = model.density_range[0];
    const double hi = model.density_range[1];
    const double slack = 1e-12 * std::max({1.0, std::abs(lo), std::abs(hi)});

    std::vector<double> Dm(M), flux(M);
    for (int i = 0; i < M; ++i) {
        const double mid = 0.5 * (rho[i] + rho[i + 1]);
        Dm[i] = model.D(mid);
        flux[i] = Dm[i] * (rho[i + 1] - rho[i]) / h - model.chi(mid) * model.field_at(g.center(i));
    }

    const double r = dt / (h * h);
    std::vector<double> out(rho);
    if (!periodic) {
        const int n = M - 1;
        std::vector<double> sub(n), diag(n), sup(n), rhs(n);
        for (int i = 1; i <= M - 1; ++i) {
            const int j = i - 1;
            sub[j] = -r * Dm[i - 1];
            diag[j] = 1.0 + r * (Dm[i] + Dm[i - 1]);
            sup[j] = -r * Dm[i];
            rhs[j] = (dt / h) * (flux[i] - flux[i - 1]);
        }
        solve_tridiagonal(sub, diag, sup, rhs);
        for (int i = 1; i <= M - 1; ++i) out[i] += rhs[i - 1];
    } else {
        std::vector<double> sub(M), diag(M), sup(M), rhs(M);
        for (int i = 0; i < M; ++i) {
            const int im = (i + M - 1) % M;
            sub[i] = -r * Dm[im];
            diag[i] = 1.0 + r * (Dm[i] + Dm[im]);
            sup[i] = -r * Dm[i];
            rhs[i] = (dt / h) * (flux[i] - flux[im]);
        }
        solve_cyclic_tridiagonal(sub, diag, sup, -r * Dm[M - 1], -r * Dm[M - 1], rhs);
        for (int i = 0; i < M; ++i) out[i] += rhs[i];
        out[M] = out[0];
    }

    for (double& v : out) {
        if (!std::isfinite(v) || v < lo - slack || v > hi + slack) return std::nullopt;
        v = std::clamp(v, lo, hi);
    }
    return out;
}

// Advance by dt, halving on range rejection (at most `budget` halvings).
void hydro_advance(const models::TransportModel& model, const Grid& g, std::vector<double>& rho, double t,
                   double dt, int budget, bool periodic) {
    auto next = hydro_step(model, g, rho, dt, periodic);
    if (next) {
        rho = std::move(*next);
        return;
    }
    if (budget <= 0)
        throw NumericalError("solve_hydro: step at t=" + std::to_string(t) + " rejected after 20 dt halvings (dt=" +
                             std::to_string(dt) + "); density left [" + std::to_string(model.density_range[0]) +
                             ", " + std::to_string(model.density_range[1]) + "]");
    hydro_advance(model, g, rho, t, 0.5 * dt, budget - 1, periodic);
    hydro_advance(model, g, rho, t + 0.5 * dt, 0.5 * dt, budget - 1, periodic);
}

}  // namespace

GridFunction linear_profile(const Grid& grid, double alpha, double beta) {
    GridFunction f(grid, FieldKind::density);
    for (int i = 0; i <= grid.cells; ++i) f[i] = alpha + (beta - alpha) * grid.node(i);
    f[0] = alpha;
    f[grid.cells] = beta;
    return f;
}

GridFunction constant_profile(const Grid& grid, double value) {
    GridFunction f(grid, FieldKind::density);
    for (double& v : f.values) v = value;
    return f;
}

std::vector<double> gradient_to_cells(const Grid& grid, const std::vector<double>& nodes) {
    std::vector<double> out(static_cast<std::size_t>(grid.cells));
    const double h = grid.h();
    for (int i = 0; i < grid.cells; ++i) out[i] = (nodes[i + 1] - nodes[i]) / h;
    return out;
}

std::vector<double> divergence_to_nodes(const Grid& grid, const std::vector<double>& cells, bool periodic) {
    std::vector<double> out(static_cast<std::size_t>(grid.cells + 1), 0.0);
    const double h = grid.h();
    for (int i = 1; i < grid.cells; ++i) out[i] = (cells[i] - cells[i - 1]) / h;
    if (periodic) {
        out[0] = (cells[0] - cells[grid.cells - 1]) / h;
        out[grid.cells] = out[0];
    }
    return out;
}

SpaceTimePath solve_heat(const GridFunction& gamma, double alpha, double beta, double T, double dt) {
    require_kind(gamma, FieldKind::density, "solve_heat");
    require_end_match(gamma, alpha, beta, "solve_heat");
    const Grid g = gamma.grid;
    const int M = g.cells;
    const double h = g.h();
    const double dt_eff = effective_dt(dt, h);
    const int K = step_count(T, dt_eff);

    SpaceTimePath path;
    path.grid = g;
    path.kind = FieldKind::density;
    path.dt = K > 0 ? T / K : dt_eff;
    path.frames.reserve(static_cast<std::size_t>(K) + 1);

    std::vector<double> rho = gamma.values;
    rho.front() = alpha;
    rho.back() = beta;
    path.frames.push_back(rho);

    // Increment form of Crank-Nicolson: (I - dt/4 Lap) delta = dt/2 Lap rho.
    const double r = path.dt / (4.0 * h * h);
    const int n = M - 1;
    std::vector<double> sub(n, -r), sup(n, -r), diag(n), rhs(n);
    for (int k = 0; k < K; ++k) {
        for (int i = 1; i <= M - 1; ++i) {
            diag[i - 1] = 1.0 + 2.0 * r;
            rhs[i - 1] = (path.dt / 2.0) * (rho[i + 1] - 2.0 * rho[i] + rho[i - 1]) / (h * h);
        }
        solve_tridiagonal(sub, diag, sup, rhs);
        for (int i = 1; i <= M - 1; ++i) rho[i] += rhs[i - 1];
        path.frames.push_back(rho);
    }
    return path;
}

SpaceTimePath solve_hydro(const models::TransportModel& model, const GridFunction& gamma, double T, double dt) {
    require_kind(gamma, FieldKind::density, "solve_hydro");
    const Grid g = gamma.grid;
    const bool periodic = is_periodic(model.geometry);
    for (double v : gamma.values)
        if (!model.in_range(v)) throw ValidationError("solve_hydro: initial profile outside the density range");

    std::vector<double> rho = gamma.values;
    if (!periodic) {
        const auto& bg = std::get<BoundaryGeometry>(model.geometry);
        require_end_match(gamma, bg.alpha, bg.beta, "solve_hydro");
        rho.front() = bg.alpha;
        rho.back() = bg.beta;
    } else {
        if (std::abs(rho.front() - rho.back()) > 1e-12)
            throw ValidationError("solve_hydro: periodic profile must close up (values[0] == values[M])");
        rho.back() = rho.front();
    }

    const double dt_eff = effective_dt(dt, g.h());
    const int K = step_count(T, dt_eff);
    SpaceTimePath path;
    path.grid = g;
    path.kind = FieldKind::density;
    path.dt = K > 0 ? T / K : dt_eff;
    path.frames.reserve(static_cast<std::size_t>(K) + 1);
    path.frames.push_back(rho);
    for (int k = 0; k < K; ++k) {
        hydro_advance(model, g, rho, k * path.dt, path.dt, 20, periodic);
        path.frames.push_back(rho);
    }
    return path;
}

SpaceTimePath solve_continuity(const GridFunction& gamma, const SpaceTimePath& w, const Geometry& geometry) {
    require_kind(gamma, FieldKind::density, "solve_continuity");
    if (w.kind != FieldKind::current) throw ValidationError("solve_continuity: w must be a current path");
    if (w.grid != gamma.grid) throw ValidationError("solve_continuity: grid mismatch");
    w.check_consistent();
    const Grid g = gamma.grid;
    const int M = g.cells;
    const bool periodic = is_periodic(geometry);

    SpaceTimePath path;
    path.grid = g;
    path.kind = FieldKind::density;
    path.dt = w.dt;
    path.frames.reserve(w.frames.size());
    std::vector<double> rho = gamma.values;
    if (periodic) rho[M] = rho[0];
    path.frames.push_back(rho);

    if (w.frame_count() <= 1) return path;
    std::vector<double> div_k = divergence_to_nodes(g, w.frames[0], periodic);
    for (int k = 1; k < w.frame_count(); ++k) {
        std::vector<double> div_k1 = divergence_to_nodes(g, w.frames[static_cast<std::size_t>(k)], periodic);
        for (int i = periodic ? 0 : 1; i <= M - 1; ++i) rho[i] -= 0.5 * w.dt * (div_k[i] + div_k1[i]);
        if (periodic) rho[M] = rho[0];
        path.frames.push_back(rho);
        div_k = std::move(div_k1);
    }
    return path;
}

GridFunction stationary_profile(const models::TransportModel& model, const Grid& grid) {
    if (is_periodic(model.geometry))
        return constant_profile(grid, std::get<PeriodicGeometry>(model.geometry).mass);

    const auto& bg = std::get<BoundaryGeometry>(model.geometry);
    const int M = grid.cells;
    const double h = grid.h();
    GridFunction rho = linear_profile(grid, bg.alpha, bg.beta);

    // J at cell i from (rho_i, rho_{i+1}); residual_i = (J_i - J_{i-1})/h.
    auto fluxes = [&](const std::vector<double>& v, std::vector<double>& J) {
        for (int i = 0; i < M; ++i) {
            const double mid = 0.5 * (v[i] + v[i + 1]);
            J[i] = -model.D(mid) * (v[i + 1] - v[i]) / h + model.chi(mid) * model.field_at(grid.center(i));
        }
    };
    auto residual_norms = [&](const std::vector<double>& J, double& linf, double& l2) {
        linf = 0.0;
        l2 = 0.0;
        for (int i = 1; i <= M - 1; ++i) {
            const double r = (J[i] - J[i - 1]) / h;
            linf = std::max(linf, std::abs(r));
            l2 += r * r;
        }
        l2 = std::sqrt(l2);
    };

    // Convergence floor: two orders above the FP noise of the residual stencil.
    double d_max = 0.0;
    for (int i = 0; i <= 16; ++i)
        d_max = std::max(d_max, model.D(model.density_range[0] +
                                         (model.density_range[1] - model.density_range[0]) * i / 16.0));
    const double scale = std::max({1.0, std::abs(bg.alpha), std::abs(bg.beta)});
    const double tol = std::max(1e-12, 100.0 * 2.2e-16 * d_max * scale / (h * h));

    std::vector<double> J(M), Jp_lo(M), Jp_hi(M);
    const int n = M - 1;
    std::vector<double> sub(n), diag(n), sup(n), rhs(n), trial(rho.values);
    for (int iter = 0; iter < 60; ++iter) {
        fluxes(rho.values, J);
        double linf, l2;
        residual_norms(J, linf, l2);
        if (linf <= tol) return rho;

        for (int i = 0; i < M; ++i) {
            const double mid = 0.5 * (rho[i] + rho[i + 1]);
            const double grad = (rho[i + 1] - rho[i]) / h;
            const double e = model.field_at(grid.center(i));
            const double dcoef = -0.5 * model.d_prime(mid) * grad + 0.5 * model.chi_p(mid) * e;
            Jp_lo[i] = dcoef + model.D(mid) / h;   // dJ_i/drho_i
            Jp_hi[i] = dcoef - model.D(mid) / h;   // dJ_i/drho_{i+1}
        }
        for (int i = 1; i <= M - 1; ++i) {
            const int j = i - 1;
            sub[j] = -Jp_lo[i - 1] / h;
            diag[j] = (Jp_lo[i] - Jp_hi[i - 1]) / h;
            sup[j] = Jp_hi[i] / h;
            rhs[j] = -(J[i] - J[i - 1]) / h;
        }
        solve_tridiagonal(sub, diag, sup, rhs);

        double lambda = 1.0;
        bool accepted = false;
        for (int halvings = 0; halvings < 10; ++halvings, lambda *= 0.5) {
            trial = rho.values;
            bool in_range = true;
            for (int i = 1; i <= M - 1; ++i) {
                trial[i] += lambda * rhs[i - 1];
                if (!model.in_range(trial[i])) in_range = false;
            }
            if (!in_range) continue;
            fluxes(trial, J);
            double linf_t, l2_t;
            residual_norms(J, linf_t, l2_t);
            if (l2_t <= (1.0 - 1e-4 * lambda) * l2 || linf_t <= tol) {
                rho.values = trial;
                accepted = true;
                break;
            }
        }
        if (!accepted)
            throw NumericalError("stationary_profile: damped Newton stalled at iteration " + std::to_string(iter) +
                                 " (residual " + std::to_string(l2) + ")");
    }
    throw NumericalError("stationary_profile: no convergence within 60 Newton iterations");
}

SpaceTimePath extract_current(const SpaceTimePath& rho, const models::TransportModel& model) {
    rho.check_consistent();
    if (!on_nodes(rho.kind)) throw ValidationError("extract_current: need a node path");
    const Grid g = rho.grid;
    const double h = g.h();
    SpaceTimePath out;
    out.grid = g;
    out.kind = FieldKind::current;
    out.dt = rho.dt;
    out.t0 = rho.t0;
    out.frames.reserve(rho.frames.size());
    for (const auto& fr : rho.frames) {
        std::vector<double> w(static_cast<std::size_t>(g.cells));
        for (int i = 0; i < g.cells; ++i) {
            const double mid = 0.5 * (fr[i] + fr[i + 1]);
            w[i] = -model.D(mid) * (fr[i + 1] - fr[i]) / h + model.chi(mid) * model.field_at(g.center(i));
        }
        out.frames.push_back(std::move(w));
    }
    return out;
}

}  // namespace latgas::pde
