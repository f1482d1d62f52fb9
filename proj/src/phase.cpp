#include "latgas/phase.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "latgas/errors.hpp"
#include "latgas/rng.hpp"

namespace latgas::phase {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Fixed-profile objective: 1/2 int (q - J(rho))^2 / chi(rho) du on the
// staggered grid, with its exact discrete gradient.
// ---------------------------------------------------------------------------

struct UObjective {
    const models::TransportModel* model;
    double q;
    Grid grid;
    bool periodic;
    double mass_target{0.0};          // periodic
    double alpha{0.0}, beta{0.0};     // boundary

    double value(const std::vector<double>& rho) const {
        const int M = grid.cells;
        const double h = grid.h();
        double total = 0.0;
        for (int i = 0; i <= M; ++i)
            if (!model->in_range(rho[static_cast<std::size_t>(i)])) return kInf;
        for (int i = 0; i < M; ++i) {
            const double rm = 0.5 * (rho[static_cast<std::size_t>(i)] + rho[static_cast<std::size_t>(i + 1)]);
            const double chi = model->chi(rm);
            if (chi < 1e-12) return kInf;
            const double g = (rho[static_cast<std::size_t>(i + 1)] - rho[static_cast<std::size_t>(i)]) / h;
            const double J = -model->D(rm) * g + chi * model->field_at(grid.center(i));
            const double dev = q - J;
            total += dev * dev / (2.0 * chi);
        }
        return total * h;
    }

    // gradient with respect to the node values (pinned/wrapped entries
    // handled by the caller's projection)
    void gradient(const std::vector<double>& rho, std::vector<double>& grad) const {
        const int M = grid.cells;
        const double h = grid.h();
        grad.assign(static_cast<std::size_t>(M + 1), 0.0);
        for (int i = 0; i < M; ++i) {
            const double rm = 0.5 * (rho[static_cast<std::size_t>(i)] + rho[static_cast<std::size_t>(i + 1)]);
            const double chi = model->chi(rm);
            const double g = (rho[static_cast<std::size_t>(i + 1)] - rho[static_cast<std::size_t>(i)]) / h;
            const double E = model->field_at(grid.center(i));
            const double J = -model->D(rm) * g + chi * E;
            const double dev = q - J;
            const double dJ_drm = -model->d_prime(rm) * g + model->chi_p(rm) * E;
            const double A = -dev * dJ_drm / chi - dev * dev * model->chi_p(rm) / (2.0 * chi * chi);
            const double B = dev * model->D(rm) / chi;
            grad[static_cast<std::size_t>(i)] += h * 0.5 * A - B;
            grad[static_cast<std::size_t>(i + 1)] += h * 0.5 * A + B;
        }
        if (periodic) {
            // wrap: node M is node 0
            grad[0] += grad[static_cast<std::size_t>(M)];
            grad[static_cast<std::size_t>(M)] = grad[0];
        } else {
            grad[0] = 0.0;
            grad[static_cast<std::size_t>(M)] = 0.0;
        }
    }

    void project(std::vector<double>& rho) const {
        const int M = grid.cells;
        if (periodic) {
            double mass = 0.0;
            for (int i = 0; i < M; ++i) mass += rho[static_cast<std::size_t>(i)];
            mass *= grid.h();
            const double shift = mass_target - mass;
            for (auto& v : rho) v += shift;
            rho[static_cast<std::size_t>(M)] = rho[0];
        } else {
            rho[0] = alpha;
            rho[static_cast<std::size_t>(M)] = beta;
        }
    }

    // remove the component the constraint forbids (constant shift for the
    // periodic mass constraint; nothing for pinned ends beyond the zeroing
    // already done in gradient())
    void project_direction(std::vector<double>& g) const {
        const int M = grid.cells;
        if (!periodic) return;
        double mean = 0.0;
        for (int i = 0; i < M; ++i) mean += g[static_cast<std::size_t>(i)];
        mean /= M;
        for (int i = 0; i < M; ++i) g[static_cast<std::size_t>(i)] -= mean;
        g[static_cast<std::size_t>(M)] = g[0];
    }
};

struct PgdResult {
    std::vector<double> x;
    double f{kInf};
    double gnorm{kInf};
    int iterations{0};
    bool converged{false};
};

PgdResult minimize_pgd(const UObjective& obj, std::vector<double> x, int max_iter,
                       double gtol = 1e-8) {
    const double h = obj.grid.h();

    obj.project(x);
    double f = obj.value(x);
    if (!std::isfinite(f)) return {std::move(x), kInf, kInf, 0, false};

    std::vector<double> g, xn, gn, s, ydiff;
    obj.gradient(x, g);
    obj.project_direction(g);

    auto sup_fun = [&](const std::vector<double>& v) {
        double sup = 0.0;
        for (double w : v) sup = std::max(sup, std::abs(w));
        return sup / h;
    };
    auto dot = [](const std::vector<double>& a, const std::vector<double>& b) {
        double s2 = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) s2 += a[i] * b[i];
        return s2;
    };

    std::vector<double> recent{f};
    double step = 1.0;
    PgdResult out;
    int it = 0;
    for (; it < max_iter; ++it) {
        const double gnorm = sup_fun(g);
        if (gnorm <= gtol) {
            out.converged = true;
            break;
        }
        const double gg = dot(g, g);
        const double fref = *std::max_element(recent.begin(), recent.end());

        double t = step;
        bool accepted = false;
        for (int bt = 0; bt < 50; ++bt) {
            xn = x;
            for (std::size_t i = 0; i < xn.size(); ++i) xn[i] -= t * g[i];
            obj.project(xn);
            const double fn = obj.value(xn);
            if (fn <= fref - 1e-4 * t * gg) {
                obj.gradient(xn, gn);
                obj.project_direction(gn);
                s = xn;
                ydiff = gn;
                for (std::size_t i = 0; i < s.size(); ++i) {
                    s[i] -= x[i];
                    ydiff[i] -= g[i];
                }
                const double sy = dot(s, ydiff);
                const double ss = dot(s, s);
                if (sy > 1e-30) step = std::clamp(ss / sy, 1e-14, 1e10);
                x.swap(xn);
                g.swap(gn);
                f = fn;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) break;  // line search exhausted; report where we are
        recent.push_back(f);
        if (recent.size() > 10) recent.erase(recent.begin());
    }
    out.x = std::move(x);
    out.f = f;
    out.gnorm = sup_fun(g);
    out.iterations = it;
    out.converged = out.converged || out.gnorm <= gtol;
    return out;
}

// Thomas factorization/solve; rejects non-positive pivots so the caller can
// add a Levenberg shift when the Hessian is not positive definite.
bool solve_tridiag(std::vector<double> dlo, std::vector<double> dia, std::vector<double> dhi,
                   std::vector<double> rhs, std::vector<double>& sol) {
    const std::size_t n = dia.size();
    double scale = 0.0;
    for (double v : dia) scale = std::max(scale, std::abs(v));
    const double floor = std::max(scale, 1.0) * 1e-14;
    for (std::size_t k = 1; k < n; ++k) {
        if (dia[k - 1] <= floor) return false;
        const double m = dlo[k] / dia[k - 1];
        dia[k] -= m * dhi[k - 1];
        rhs[k] -= m * rhs[k - 1];
    }
    if (dia[n - 1] <= floor) return false;
    sol.assign(n, 0.0);
    sol[n - 1] = rhs[n - 1] / dia[n - 1];
    for (std::size_t k = n - 1; k-- > 0;) sol[k] = (rhs[k] - dhi[k] * sol[k + 1]) / dia[k];
    return true;
}

// Cyclic tridiagonal solve (Sherman–Morrison rank-one update of the open
// chain), for the periodic geometry where bond M-1 couples the last and
// first nodes.
bool solve_cyclic(const std::vector<double>& dlo, std::vector<double> dia,
                  const std::vector<double>& dhi, double corner,
                  const std::vector<double>& rhs, std::vector<double>& sol) {
    const std::size_t n = dia.size();
    if (n < 3) return false;
    const double gamma = -dia[0];
    dia[0] -= gamma;
    dia[n - 1] -= corner * corner / gamma;
    std::vector<double> u(n, 0.0);
    u[0] = gamma;
    u[n - 1] = corner;
    std::vector<double> y, z;
    if (!solve_tridiag(dlo, dia, dhi, rhs, y)) return false;
    if (!solve_tridiag(dlo, dia, dhi, u, z)) return false;
    const double vy = y[0] + corner / gamma * y[n - 1];
    const double vz = 1.0 + z[0] + corner / gamma * z[n - 1];
    if (std::abs(vz) < 1e-14) return false;
    sol = std::move(y);
    const double c = vy / vz;
    for (std::size_t k = 0; k < n; ++k) sol[k] -= c * z[k];
    return true;
}

// Newton refinement of a PGD iterate.  The objective couples only adjacent
// nodes, so its Hessian is (cyclic) tridiagonal; columns come from central
// differences of the analytic gradient.  Steps are accepted on gradient-norm
// descent, which stays meaningful after objective differences fall below
// double rounding, and the periodic mass constraint enters through a
// bordered KKT solve.
PgdResult newton_polish(const UObjective& obj, PgdResult in) {
    in.converged = in.gnorm <= 1e-8;
    if (!std::isfinite(in.f)) return in;
    const int M = obj.grid.cells;
    const double h = obj.grid.h();
    const double gtol = 1e-9;
    const int n = obj.periodic ? M : M - 1;
    const int base = obj.periodic ? 0 : 1;  // node index of unknown 0
    if (n < 3) return in;

    auto sup_proj = [&](const std::vector<double>& graw) {
        std::vector<double> gp = graw;
        obj.project_direction(gp);
        double sup = 0.0;
        for (double w : gp) sup = std::max(sup, std::abs(w));
        return sup / h;
    };

    std::vector<double> x = std::move(in.x);
    std::vector<double> g;
    obj.gradient(x, g);
    double gnorm = sup_proj(g);
    double f = in.f;

    std::vector<double> dlo(static_cast<std::size_t>(n), 0.0), dia = dlo, dhi = dlo;
    std::vector<double> gp, gm, xp, d1, d2, xn, gn;

    for (int iter = 0; iter < 60 && gnorm > gtol; ++iter) {
        // central-difference tridiagonal bands of the Hessian
        double corner = 0.0;
        for (int k = 0; k < n; ++k) {
            const int j = base + k;
            const double delta = 1e-6 * std::max(1.0, std::abs(x[static_cast<std::size_t>(j)]));
            auto nudge = [&](double sign) {
                xp = x;
                xp[static_cast<std::size_t>(j)] += sign * delta;
                if (obj.periodic && j == 0) xp[static_cast<std::size_t>(M)] += sign * delta;
                obj.gradient(xp, sign > 0 ? gp : gm);
            };
            nudge(+1.0);
            nudge(-1.0);
            auto col = [&](int node) {
                return (gp[static_cast<std::size_t>(node)] - gm[static_cast<std::size_t>(node)]) /
                       (2.0 * delta);
            };
            dia[static_cast<std::size_t>(k)] = col(j);
            if (k > 0) dlo[static_cast<std::size_t>(k)] = col(j - 1);
            if (k + 1 < n) dhi[static_cast<std::size_t>(k)] = col(j + 1);
            if (obj.periodic && k == 0) corner = col(M - 1);
        }
        for (int k = 0; k + 1 < n; ++k) {
            const double avg = 0.5 * (dhi[static_cast<std::size_t>(k)] + dlo[static_cast<std::size_t>(k + 1)]);
            dhi[static_cast<std::size_t>(k)] = avg;
            dlo[static_cast<std::size_t>(k + 1)] = avg;
        }

        std::vector<double> rhs(static_cast<std::size_t>(n));
        for (int k = 0; k < n; ++k) rhs[static_cast<std::size_t>(k)] = -g[static_cast<std::size_t>(base + k)];

        double scale = 0.0;
        for (double v : dia) scale = std::max(scale, std::abs(v));
        double mu = 0.0;
        bool advanced = false;
        for (int attempt = 0; attempt < 8 && !advanced; ++attempt) {
            std::vector<double> diam = dia;
            for (auto& v : diam) v += mu;
            bool solved;
            std::vector<double> step;
            if (obj.periodic) {
                solved = solve_cyclic(dlo, diam, dhi, corner, rhs, d1) &&
                         solve_cyclic(dlo, diam, dhi, corner, std::vector<double>(static_cast<std::size_t>(n), 1.0), d2);
                if (solved) {
                    double s1 = 0.0, s2 = 0.0;
                    for (int k = 0; k < n; ++k) {
                        s1 += d1[static_cast<std::size_t>(k)];
                        s2 += d2[static_cast<std::size_t>(k)];
                    }
                    solved = std::abs(s2) > 1e-14;
                    if (solved) {
                        const double lam = s1 / s2;
                        step = d1;
                        for (int k = 0; k < n; ++k) step[static_cast<std::size_t>(k)] -= lam * d2[static_cast<std::size_t>(k)];
                    }
                }
            } else {
                solved = solve_tridiag(dlo, diam, dhi, rhs, step);
            }
            if (!solved) {
                mu = (mu == 0.0) ? 1e-8 * std::max(scale, 1.0) : mu * 50.0;
                continue;
            }
            double t = 1.0;
            for (int bt = 0; bt < 25; ++bt, t *= 0.5) {
                xn = x;
                for (int k = 0; k < n; ++k)
                    xn[static_cast<std::size_t>(base + k)] += t * step[static_cast<std::size_t>(k)];
                if (obj.periodic) xn[static_cast<std::size_t>(M)] = xn[0];
                obj.project(xn);
                const double fn = obj.value(xn);
                if (!std::isfinite(fn)) continue;
                obj.gradient(xn, gn);
                const double gnn = sup_proj(gn);
                if (gnn < gnorm) {
                    x.swap(xn);
                    g.swap(gn);
                    gnorm = gnn;
                    f = fn;
                    advanced = true;
                    break;
                }
            }
            if (!advanced) mu = (mu == 0.0) ? 1e-8 * std::max(scale, 1.0) : mu * 50.0;
        }
        ++in.iterations;
        if (!advanced) break;  // no direction made progress; report where we are
    }

    in.x = std::move(x);
    in.f = f;
    in.gnorm = gnorm;
    in.converged = gnorm <= 1e-8;
    return in;
}

// ---------------------------------------------------------------------------
// Generic small-dimension descent with central-difference gradients, used by
// the traveling-wave search (the parameter space is 2K+1 dimensional).
// ---------------------------------------------------------------------------

struct FdResult {
    std::vector<double> x;
    double f{kInf};
    int iterations{0};
};

FdResult minimize_fd(const std::function<double(const std::vector<double>&)>& F, std::vector<double> x,
                     int max_iter) {
    double f = F(x);
    if (!std::isfinite(f)) return {std::move(x), f, 0};

    const auto grad_at = [&](const std::vector<double>& p, std::vector<double>& g) {
        g.assign(p.size(), 0.0);
        std::vector<double> t = p;
        for (std::size_t j = 0; j < p.size(); ++j) {
            const double dj = 1e-6 * std::max(1.0, std::abs(p[j]));
            t[j] = p[j] + dj;
            const double fp = F(t);
            t[j] = p[j] - dj;
            const double fm = F(t);
            t[j] = p[j];
            g[j] = (std::isfinite(fp) && std::isfinite(fm)) ? (fp - fm) / (2.0 * dj) : 0.0;
        }
    };
    auto dot = [](const std::vector<double>& a, const std::vector<double>& b) {
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
        return s;
    };

    std::vector<double> g, xn, gn, s, y;
    grad_at(x, g);
    double step = 1e-2;
    int it = 0;
    for (; it < max_iter; ++it) {
        double sup = 0.0;
        for (double v : g) sup = std::max(sup, std::abs(v));
        if (sup <= 1e-9 * std::max(1.0, std::abs(f))) break;
        const double gg = dot(g, g);

        double t = step;
        bool accepted = false;
        for (int bt = 0; bt < 40; ++bt) {
            xn = x;
            for (std::size_t i = 0; i < xn.size(); ++i) xn[i] -= t * g[i];
            const double fn = F(xn);
            if (std::isfinite(fn) && fn <= f - 1e-4 * t * gg) {
                grad_at(xn, gn);
                s = xn;
                y = gn;
                for (std::size_t i = 0; i < s.size(); ++i) {
                    s[i] -= x[i];
                    y[i] -= g[i];
                }
                const double sy = dot(s, y);
                if (sy > 1e-30) step = std::clamp(dot(s, s) / sy, 1e-12, 1e6);
                x.swap(xn);
                g.swap(gn);
                f = fn;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) break;
    }
    return {std::move(x), f, it};
}

// ---------------------------------------------------------------------------
// Traveling-wave parametrization helpers.
// ---------------------------------------------------------------------------

std::vector<double> wave_nodes(const Grid& grid, double m, int K, const std::vector<double>& theta) {
    const int M = grid.cells;
    std::vector<double> rho(static_cast<std::size_t>(M + 1));
    for (int i = 0; i <= M; ++i) {
        const double u = grid.node(i);
        double v = m;
        for (int k = 1; k <= K; ++k) {
            v += theta[static_cast<std::size_t>(k)] * std::cos(2.0 * M_PI * k * u) +
                 theta[static_cast<std::size_t>(K + k)] * std::sin(2.0 * M_PI * k * u);
        }
        rho[static_cast<std::size_t>(i)] = v;
    }
    rho[static_cast<std::size_t>(M)] = rho[0];
    return rho;
}

// Period-average cost of the wave (v, rho0-nodes); +inf where the mobility
// degenerates.  Range violations are *not* rejected here (the penalty term
// handles them during the search).
double wave_cost_raw(double q, double m, const models::TransportModel& model, double v,
                     const std::vector<double>& rho, const Grid& grid) {
    const int M = grid.cells;
    const double h = grid.h();
    const double c = q - v * m;
    double total = 0.0;
    for (int i = 0; i < M; ++i) {
        const double rm = 0.5 * (rho[static_cast<std::size_t>(i)] + rho[static_cast<std::size_t>(i + 1)]);
        const double chi = model.chi(rm);
        if (chi < 1e-12) return kInf;
        const double g = (rho[static_cast<std::size_t>(i + 1)] - rho[static_cast<std::size_t>(i)]) / h;
        const double J = -model.D(rm) * g + chi * model.field_at(grid.center(i));
        const double dev = v * rm + c - J;
        total += dev * dev / (2.0 * chi);
    }
    return total * h;
}

double range_penalty(const models::TransportModel& model, const std::vector<double>& rho, const Grid& grid) {
    const double lo = model.density_range[0], hi = model.density_range[1];
    const double margin = 1e-3 * (hi - lo);
    double total = 0.0;
    for (int i = 0; i < grid.cells; ++i) {
        const double rm = 0.5 * (rho[static_cast<std::size_t>(i)] + rho[static_cast<std::size_t>(i + 1)]);
        const double d = std::max({0.0, (lo + margin) - rm, rm - (hi - margin)});
        total += d * d;
    }
    return total * grid.h();
}

bool wave_feasible(const models::TransportModel& model, const std::vector<double>& rho) {
    for (double v : rho)
        if (!model.in_range(v)) return false;
    return true;
}

}  // namespace

// ---------------------------------------------------------------------------
// Public operations.
// ---------------------------------------------------------------------------

ProfileOptimum U_minimize(double q, const models::TransportModel& model, const Geometry& geometry,
                          const Grid& grid) {
    if (!std::isfinite(q)) throw ValidationError("U_minimize: q must be finite");
    const int M = grid.cells;

    UObjective obj;
    obj.model = &model;
    obj.q = q;
    obj.grid = grid;
    obj.periodic = is_periodic(geometry);
    if (obj.periodic) {
        obj.mass_target = std::get<PeriodicGeometry>(geometry).mass;
        if (!model.in_range(obj.mass_target)) throw ValidationError("U_minimize: mass outside the density range");
    } else {
        const auto& bg = std::get<BoundaryGeometry>(geometry);
        obj.alpha = bg.alpha;
        obj.beta = bg.beta;
        if (!model.in_range(obj.alpha) || !model.in_range(obj.beta))
            throw ValidationError("U_minimize: reservoir densities outside the density range");
    }

    // base profile: flat at the mass, or the linear interpolant
    std::vector<double> base(static_cast<std::size_t>(M + 1));
    for (int i = 0; i <= M; ++i) {
        const double u = grid.node(i);
        base[static_cast<std::size_t>(i)] = obj.periodic ? obj.mass_target : obj.alpha + (obj.beta - obj.alpha) * u;
    }
    const double lo = model.density_range[0], hi = model.density_range[1];
    double room = hi - lo;
    for (double v : base) room = std::min({room, v - lo, hi - v});
    const double amp_cap = std::min(0.5 * room, 0.1 * (hi - lo));

    std::vector<std::vector<double>> starts{base};
    for (int s = 0; s < 2; ++s) {
        Rng rng(0x7A5E5EEDULL, static_cast<std::uint64_t>(s));
        std::vector<double> pert = base;
        for (int k = 1; k <= 2; ++k) {
            const double a = amp_cap * (2.0 * rng.uniform() - 1.0) / k;
            for (int i = 0; i <= M; ++i) {
                const double u = grid.node(i);
                pert[static_cast<std::size_t>(i)] +=
                    obj.periodic ? a * std::sin(2.0 * M_PI * k * u + M_PI * rng.uniform())
                                 : a * std::sin(M_PI * k * u);
            }
        }
        if (obj.periodic) pert[static_cast<std::size_t>(M)] = pert[0];
        starts.push_back(std::move(pert));
    }

    std::vector<PgdResult> results;
    int total_iter = 0;
    for (auto& x0 : starts) {
        PgdResult r = newton_polish(obj, minimize_pgd(obj, std::move(x0), 20000, 1e-5));
        total_iter += r.iterations;
        results.push_back(std::move(r));
    }
    const PgdResult* best = nullptr;
    for (const auto& r : results)
        if (r.converged && (best == nullptr || r.f < best->f)) best = &r;
    if (best == nullptr) {
        double gmin = kInf;
        for (const auto& r : results) gmin = std::min(gmin, r.gnorm);
        throw NumericalError("U_minimize: projected gradient " + std::to_string(gmin) + " after " +
                             std::to_string(total_iter) + " iterations (target 1e-8)");
    }
    // exploratory starts may stop short of full convergence; that is only a
    // problem if one of them sits strictly below every certified minimum
    const double undercut = 1e-9 * std::max(1.0, std::abs(best->f));
    for (const auto& r : results)
        if (!r.converged && r.f < best->f - undercut)
            throw NumericalError("U_minimize: unconverged start undercuts the certified minimum (" +
                                 std::to_string(r.f) + " < " + std::to_string(best->f) + ")");

    ProfileOptimum out;
    out.q = q;
    out.profile = GridFunction(grid, FieldKind::density, best->x);
    out.value = best->f;
    out.iterations = total_iter;
    out.gradient_norm = best->gnorm;
    if (obj.periodic) {
        double mass = 0.0;
        for (int i = 0; i < M; ++i) mass += best->x[static_cast<std::size_t>(i)];
        out.constraint_residual = std::abs(mass * grid.h() - obj.mass_target);
    } else {
        out.constraint_residual =
            std::max(std::abs(best->x.front() - obj.alpha), std::abs(best->x.back() - obj.beta));
    }
    return out;
}

double U_constant(double q, double m, const models::TransportModel& model) {
    const double chi = model.chi(m);
    if (!(chi > 1e-12)) throw ValidationError("U_constant: chi(m) vanishes");
    return q * q / (2.0 * chi);
}

double traveling_wave_cost(double q, double m, const models::TransportModel& model, double v,
                           const GridFunction& rho0) {
    if (!on_nodes(rho0.kind)) throw ValidationError("traveling_wave_cost: rho0 must be a node field");
    const int M = rho0.grid.cells;
    if (std::abs(rho0[M] - rho0[0]) > 1e-12)
        throw ValidationError("traveling_wave_cost: rho0 must be periodic (wrap duplicate)");
    double mass = 0.0;
    for (int i = 0; i < M; ++i) mass += rho0[i];
    mass *= rho0.grid.h();
    if (std::abs(mass - m) > 1e-8) throw ValidationError("traveling_wave_cost: rho0 mean differs from m");
    if (!wave_feasible(model, rho0.values))
        throw ValidationError("traveling_wave_cost: rho0 leaves the density range");
    const double cost = wave_cost_raw(q, m, model, v, rho0.values, rho0.grid);
    if (!std::isfinite(cost)) throw NumericalError("traveling_wave_cost: mobility degenerates along rho0");
    return cost;
}

TravelingWaveOptimum traveling_wave_search(double q, double m, const models::TransportModel& model, int K,
                                           const Grid& grid) {
    if (K < 2) throw ValidationError("traveling_wave_search: need K >= 2 modes");
    const double chi_m = model.chi(m);
    if (!(chi_m > 1e-12)) throw ValidationError("traveling_wave_search: chi(m) vanishes");

    double v0 = q * model.chi_p(m) / chi_m;
    if (std::abs(v0) < 1e-6) v0 = std::max(1.0, std::abs(q));

    const double lo = model.density_range[0], hi = model.density_range[1];
    const double amp_max = 0.95 * std::min(m - lo, hi - m);

    const int dim = 2 * K + 1;  // [v, a_1..a_K, b_1..b_K]
    auto objective = [&](double weight) {
        return [&, weight](const std::vector<double>& theta) {
            if (std::abs(theta[0]) > 1e3) return kInf;
            const auto rho = wave_nodes(grid, m, K, theta);
            const double cost = wave_cost_raw(q, m, model, theta[0], rho, grid);
            if (!std::isfinite(cost)) return kInf;
            return cost + weight * range_penalty(model, rho, grid);
        };
    };

    TravelingWaveOptimum best;
    best.q = q;
    best.m = m;
    best.modes = K;
    best.cost_per_time = kInf;

    for (int s = 0; s < 8; ++s) {
        std::vector<double> theta(static_cast<std::size_t>(dim), 0.0);
        theta[0] = (s < 4 ? 1.0 : -1.0) * v0;
        if (s != 0) {
            Rng rng(0xBADC0DEULL, static_cast<std::uint64_t>(s));
            theta[0] *= 0.5 + 1.5 * rng.uniform();
            const double amp = amp_max * (0.15 + 0.7 * rng.uniform());
            const double phase = 2.0 * M_PI * rng.uniform();
            theta[1] = amp * std::cos(phase);
            theta[static_cast<std::size_t>(K + 1)] = amp * std::sin(phase);
            for (int k = 2; k <= K; ++k) {
                theta[static_cast<std::size_t>(k)] = 0.05 * amp * (2.0 * rng.uniform() - 1.0);
                theta[static_cast<std::size_t>(K + k)] = 0.05 * amp * (2.0 * rng.uniform() - 1.0);
            }
        }
        double weight = 1e2;
        for (int round = 0; round < 5; ++round) {
            FdResult r = minimize_fd(objective(weight), theta, 300);
            theta = std::move(r.x);
            weight *= 10.0;
        }
        const auto rho = wave_nodes(grid, m, K, theta);
        if (!wave_feasible(model, rho)) continue;
        const double cost = wave_cost_raw(q, m, model, theta[0], rho, grid);
        if (std::isfinite(cost) && cost < best.cost_per_time) {
            best.cost_per_time = cost;
            best.velocity = theta[0];
            best.rho0 = GridFunction(grid, FieldKind::density, rho);
        }
    }
    if (!std::isfinite(best.cost_per_time))
        throw NumericalError("traveling_wave_search: all starts ended infeasible");
    return best;
}

std::vector<double> lower_convex_envelope(const std::vector<double>& q, const std::vector<double>& U) {
    const int n = static_cast<int>(q.size());
    if (static_cast<int>(U.size()) != n) throw ValidationError("lower_convex_envelope: size mismatch");
    for (int i = 1; i < n; ++i)
        if (!(q[static_cast<std::size_t>(i)] > q[static_cast<std::size_t>(i - 1)]))
            throw ValidationError("lower_convex_envelope: q grid must be strictly ascending");
    if (n <= 2) return U;

    // lower hull by the monotone chain (q already sorted)
    std::vector<int> hull;
    auto cross = [&](int a, int b, int c) {
        return (q[static_cast<std::size_t>(b)] - q[static_cast<std::size_t>(a)]) *
                   (U[static_cast<std::size_t>(c)] - U[static_cast<std::size_t>(a)]) -
               (q[static_cast<std::size_t>(c)] - q[static_cast<std::size_t>(a)]) *
                   (U[static_cast<std::size_t>(b)] - U[static_cast<std::size_t>(a)]);
    };
    for (int i = 0; i < n; ++i) {
        while (hull.size() >= 2 && cross(hull[hull.size() - 2], hull.back(), i) <= 0.0) hull.pop_back();
        hull.push_back(i);
    }
    std::vector<double> env(static_cast<std::size_t>(n), 0.0);
    for (std::size_t seg = 0; seg + 1 < hull.size(); ++seg) {
        const int a = hull[seg], b = hull[seg + 1];
        for (int i = a; i <= b; ++i) {
            const double t = (q[static_cast<std::size_t>(i)] - q[static_cast<std::size_t>(a)]) /
                             (q[static_cast<std::size_t>(b)] - q[static_cast<std::size_t>(a)]);
            env[static_cast<std::size_t>(i)] =
                (1.0 - t) * U[static_cast<std::size_t>(a)] + t * U[static_cast<std::size_t>(b)];
        }
    }
    for (std::size_t i = 0; i < env.size(); ++i) env[i] = std::min(env[i], U[i]);
    return env;
}

PhaseReport classify_from_values(const std::vector<double>& q, const std::vector<double>& U,
                                 const std::vector<double>& tw, int modes, double rel_tol) {
    if (q.size() != U.size() || q.size() != tw.size())
        throw ValidationError("classify_from_values: size mismatch");
    PhaseReport out;
    out.q = q;
    out.U = U;
    out.tw = tw;
    out.envelope = lower_convex_envelope(q, U);
    out.modes = modes;
    out.labels.resize(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) {
        const double tol = rel_tol * std::max(std::abs(U[i]), 1e-12);
        if (tw[i] < U[i] - tol)
            out.labels[i] = PhaseClass::traveling_wave;
        else if (out.envelope[i] < U[i] - tol)
            out.labels[i] = PhaseClass::coexistence;
        else
            out.labels[i] = PhaseClass::unique_phase;
    }
    out.q_star = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i = 0; i + 1 < q.size(); ++i) {
        if (out.labels[i] != PhaseClass::traveling_wave && out.labels[i + 1] == PhaseClass::traveling_wave) {
            out.q_star = 0.5 * (q[i] + q[i + 1]);
            break;
        }
    }
    return out;
}

PhaseReport phase_report(const models::TransportModel& model, double m, const std::vector<double>& q_grid,
                         int K) {
    if (q_grid.empty()) throw ValidationError("phase_report: empty q grid");
    for (double v : q_grid)
        if (!std::isfinite(v)) throw ValidationError("phase_report: q grid must be finite");

    const Geometry geometry = PeriodicGeometry{m};
    const int n = static_cast<int>(q_grid.size());
    std::vector<double> U(static_cast<std::size_t>(n)), tw(static_cast<std::size_t>(n));

    // independent q points, fixed-order reduction
    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
    const unsigned workers = std::min<unsigned>(std::max(1u, std::thread::hardware_concurrency()),
                                                static_cast<unsigned>(n));
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            while (true) {
                const int i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    const double qi = q_grid[static_cast<std::size_t>(i)];
                    U[static_cast<std::size_t>(i)] = U_minimize(qi, model, geometry).value;
                    tw[static_cast<std::size_t>(i)] = traveling_wave_search(qi, m, model, K).cost_per_time;
                } catch (...) {
                    errors[static_cast<std::size_t>(i)] = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    PhaseReport out = classify_from_values(q_grid, U, tw, K);

    // refine the transition estimate between the bracketing grid points
    for (std::size_t i = 0; i + 1 < out.labels.size(); ++i) {
        if (out.labels[i] != PhaseClass::traveling_wave && out.labels[i + 1] == PhaseClass::traveling_wave) {
            double lo = q_grid[i], hi = q_grid[i + 1];
            for (int it = 0; it < 10; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double Um = U_minimize(mid, model, geometry).value;
                const double tm = traveling_wave_search(mid, m, model, K).cost_per_time;
                if (tm < Um - 1e-6 * std::max(std::abs(Um), 1e-12))
                    hi = mid;
                else
                    lo = mid;
            }
            out.q_star = 0.5 * (lo + hi);
            break;
        }
    }
    return out;
}

}  // namespace latgas::phase
