#include "latgas/density_ldf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "latgas/errors.hpp"
#include "latgas/linalg.hpp"
#include "latgas/pde.hpp"
#include "latgas/stencil.hpp"

namespace latgas::ldf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// x log(x/y) continued by 0 at x=0; +inf when x>0 and y=0.
double entropy_term(double x, double y) { return x > 0.0 ? x * std::log(x / y) : 0.0; }

// ---------------------------------------------------------------------------
// Shooting integrator for F'' = (gamma - F)(F')^2 / (F(1-F)).
// ---------------------------------------------------------------------------

struct Shot {
    std::vector<double> F, P;  // node values; valid up to the cell reached
    double F_end{0.0};         // F where integration stopped
    bool overshoot{false};     // F ran into 1 (or blew up)
    bool stalled{false};       // F' dropped to zero or below
    bool complete{false};      // reached u = 1 cleanly
};

// Integrate one initial slope across [0,1] with classical RK4, per-cell step
// doubling until two refinements agree to 1e-13 (so the node values carry
// integrator-grade accuracy), stopping at guard violations.
Shot shoot_once(const std::vector<double>& gnodes, double alpha, double s) {
    const int M = static_cast<int>(gnodes.size()) - 1;
    const double h = 1.0 / M;
    Shot out;
    out.F.assign(static_cast<std::size_t>(M + 1), 0.0);
    out.P.assign(static_cast<std::size_t>(M + 1), 0.0);
    out.F[0] = alpha;
    out.P[0] = s;

    // Local barycentric interpolation of gamma through the `width` nearest
    // nodes (uniform-grid weights (-1)^j C(width-1, j)); linear interpolation
    // would cap the achievable ODE residual at O(h^2 gamma'').
    const int width = std::min(6, M + 1);
    std::vector<double> bary(static_cast<std::size_t>(width), 1.0);
    for (int j = 1; j < width; ++j)
        bary[static_cast<std::size_t>(j)] = -bary[static_cast<std::size_t>(j - 1)] * (width - j) / j;
    auto gamma_at = [&](double u) {
        const double t = u * M;
        int left = static_cast<int>(t) - width / 2 + 1;
        left = std::clamp(left, 0, M + 1 - width);
        double num = 0.0, den = 0.0;
        for (int j = 0; j < width; ++j) {
            const double d = t - (left + j);
            if (std::abs(d) < 1e-9) return gnodes[static_cast<std::size_t>(left + j)];
            const double c = bary[static_cast<std::size_t>(j)] / d;
            num += c * gnodes[static_cast<std::size_t>(left + j)];
            den += c;
        }
        return num / den;
    };
    auto rhs = [&](double u, double F, double P, double& dF, double& dP) {
        dF = P;
        dP = (gamma_at(u) - F) * P * P / (F * (1.0 - F));
    };

    constexpr double hi_guard = 1.0 - 1e-13;
    constexpr double lo_guard = 1e-13;
    double F = alpha, P = s;

    for (int cell = 0; cell < M; ++cell) {
        const double u0 = cell * h;
        // runs `n` RK4 substeps across the cell; false when a guard trips
        auto run = [&](int n, double& Fo, double& Po) -> bool {
            double f = F, p = P;
            const double du = h / n;
            for (int k = 0; k < n; ++k) {
                const double u = u0 + k * du;
                double k1F, k1P, k2F, k2P, k3F, k3P, k4F, k4P;
                rhs(u, f, p, k1F, k1P);
                rhs(u + 0.5 * du, f + 0.5 * du * k1F, p + 0.5 * du * k1P, k2F, k2P);
                rhs(u + 0.5 * du, f + 0.5 * du * k2F, p + 0.5 * du * k2P, k3F, k3P);
                rhs(u + du, f + du * k3F, p + du * k3P, k4F, k4P);
                f += du / 6.0 * (k1F + 2.0 * k2F + 2.0 * k3F + k4F);
                p += du / 6.0 * (k1P + 2.0 * k2P + 2.0 * k3P + k4P);
                if (!std::isfinite(f) || !std::isfinite(p) || f >= hi_guard) {
                    out.overshoot = true;
                    return false;
                }
                if (f <= lo_guard || p <= 0.0) {
                    out.stalled = true;
                    return false;
                }
            }
            Fo = f;
            Po = p;
            return true;
        };

        double Fa, Pa;
        bool ok = run(2, Fa, Pa);
        int ns = 2;
        while (ok && ns < 256) {
            double Fb, Pb;
            if (!run(2 * ns, Fb, Pb)) {
                ok = false;
                break;
            }
            const bool converged = std::abs(Fb - Fa) + h * std::abs(Pb - Pa) <= 1e-13;
            Fa = Fb;
            Pa = Pb;
            ns *= 2;
            if (converged) break;
        }
        if (!ok) {
            out.F_end = F;
            return out;
        }
        F = Fa;
        P = Pa;
        out.F[static_cast<std::size_t>(cell + 1)] = F;
        out.P[static_cast<std::size_t>(cell + 1)] = P;
    }
    out.F_end = F;
    out.complete = true;
    return out;
}

// Signed shooting defect used for bisection: positive when the trajectory
// ends above beta (overshoots count as far above).
double shot_defect(const Shot& shot, double beta) {
    if (shot.overshoot) return 1.0 - beta;
    return shot.F_end - beta;
}

// ---------------------------------------------------------------------------
// Damped-Newton collocation on the 3-point discretization (fallback path).
// ---------------------------------------------------------------------------

// Residual R_i = (F_{i+1}-2F_i+F_{i-1})/h^2 - (g_i-F_i) P_i^2 / (F_i(1-F_i)),
// P_i the centered slope.  Returns the max-norm of R.
double collocation_residual(const std::vector<double>& g, const std::vector<double>& F, double h,
                            std::vector<double>& R) {
    const int M = static_cast<int>(g.size()) - 1;
    R.assign(static_cast<std::size_t>(M - 1), 0.0);
    double sup = 0.0;
    for (int i = 1; i < M; ++i) {
        const double Fi = F[static_cast<std::size_t>(i)];
        const double P = (F[static_cast<std::size_t>(i + 1)] - F[static_cast<std::size_t>(i - 1)]) / (2.0 * h);
        const double lap = (F[static_cast<std::size_t>(i + 1)] - 2.0 * Fi + F[static_cast<std::size_t>(i - 1)]) / (h * h);
        const double r = lap - (g[static_cast<std::size_t>(i)] - Fi) * P * P / (Fi * (1.0 - Fi));
        R[static_cast<std::size_t>(i - 1)] = r;
        sup = std::max(sup, std::abs(r));
    }
    return sup;
}

bool newton_collocation(const std::vector<double>& g, double alpha, double beta, std::vector<double>& F) {
    const int M = static_cast<int>(g.size()) - 1;
    const double h = 1.0 / M;
    const double tol = 1e-10 / (h * h);
    F[0] = alpha;
    F[static_cast<std::size_t>(M)] = beta;

    std::vector<double> R, sub, diag, sup, delta;
    double rn = collocation_residual(g, F, h, R);
    for (int iter = 0; iter < 100; ++iter) {
        if (rn <= tol) return true;
        sub.assign(static_cast<std::size_t>(M - 1), 0.0);
        diag.assign(static_cast<std::size_t>(M - 1), 0.0);
        sup.assign(static_cast<std::size_t>(M - 1), 0.0);
        for (int i = 1; i < M; ++i) {
            const double Fi = F[static_cast<std::size_t>(i)];
            const double P = (F[static_cast<std::size_t>(i + 1)] - F[static_cast<std::size_t>(i - 1)]) / (2.0 * h);
            const double q = Fi * (1.0 - Fi);
            const double gi = g[static_cast<std::size_t>(i)];
            sub[static_cast<std::size_t>(i - 1)] = 1.0 / (h * h) + (gi - Fi) * P / (h * q);
            sup[static_cast<std::size_t>(i - 1)] = 1.0 / (h * h) - (gi - Fi) * P / (h * q);
            diag[static_cast<std::size_t>(i - 1)] =
                -2.0 / (h * h) + P * P / q + (gi - Fi) * P * P * (1.0 - 2.0 * Fi) / (q * q);
        }
        delta = R;
        for (auto& v : delta) v = -v;
        solve_tridiagonal(sub, diag, sup, delta);

        double lambda = 1.0;
        bool improved = false;
        std::vector<double> trial = F;
        for (int bt = 0; bt < 12; ++bt) {
            for (int i = 1; i < M; ++i)
                trial[static_cast<std::size_t>(i)] =
                    F[static_cast<std::size_t>(i)] + lambda * delta[static_cast<std::size_t>(i - 1)];
            bool in_range = true;
            for (int i = 1; i < M; ++i) {
                const double v = trial[static_cast<std::size_t>(i)];
                if (!(v > 1e-12 && v < 1.0 - 1e-12)) {
                    in_range = false;
                    break;
                }
            }
            if (in_range) {
                std::vector<double> Rt;
                const double rt = collocation_residual(g, trial, h, Rt);
                if (rt < rn) {
                    F = trial;
                    R = Rt;
                    rn = rt;
                    improved = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if (!improved) return false;
    }
    return rn <= tol;
}

// Continuation from the linear profile toward gamma; at most 32 Newton
// solves.  Throws on failure.
std::vector<double> collocation_continuation(const std::vector<double>& gnodes, double alpha, double beta,
                                             int& solves) {
    const int M = static_cast<int>(gnodes.size()) - 1;
    std::vector<double> rho_bar(static_cast<std::size_t>(M + 1));
    for (int i = 0; i <= M; ++i)
        rho_bar[static_cast<std::size_t>(i)] = alpha + (beta - alpha) * (static_cast<double>(i) / M);

    std::vector<double> F = rho_bar;
    std::vector<double> g(static_cast<std::size_t>(M + 1));
    double theta = 0.0, step = 1.0;
    solves = 0;
    while (theta < 1.0) {
        if (solves >= 32 || step < 1.0 / 64.0)
            throw NumericalError("solve_F_bvp: collocation continuation stalled at theta=" + std::to_string(theta));
        const double tnext = std::min(1.0, theta + step);
        for (int i = 0; i <= M; ++i)
            g[static_cast<std::size_t>(i)] = rho_bar[static_cast<std::size_t>(i)] +
                                             tnext * (gnodes[static_cast<std::size_t>(i)] - rho_bar[static_cast<std::size_t>(i)]);
        std::vector<double> trial = F;
        ++solves;
        if (newton_collocation(g, alpha, beta, trial)) {
            F = trial;
            theta = tnext;
            step = std::min(1.0, step * 2.0);
        } else {
            step *= 0.5;
        }
    }
    return F;
}

// Shared completion: diagnostics + value quadrature from node F and slope P.
FreeEnergySolution finish(const GridFunction& gamma, double alpha, double beta, std::vector<double> F,
                          std::vector<double> P) {
    const int M = gamma.grid.cells;
    const double h = gamma.grid.h();

    double min_step = kInf;
    for (int i = 0; i < M; ++i)
        min_step = std::min(min_step, F[static_cast<std::size_t>(i + 1)] - F[static_cast<std::size_t>(i)]);
    if (!(min_step > 0.0)) throw NumericalError("solve_F_bvp: computed profile is not strictly increasing");

    FreeEnergySolution out;
    out.gamma = gamma;
    out.F = GridFunction(gamma.grid, FieldKind::potential, F);
    out.F_prime = GridFunction(gamma.grid, FieldKind::potential, P);
    out.endpoint_error = std::abs(F[static_cast<std::size_t>(M)] - beta);

    // ODE residual of the first-order system at every node: the carried
    // slope must be the derivative of F, and its own derivative must match
    // the right side.  6-point first-derivative stencils keep the one-sided
    // boundary rows at the same O(h^5) accuracy as the interior.
    const auto dF = fd_derivative(F, h, 1, 6);
    const auto dP = fd_derivative(P, h, 1, 6);
    double sup = 0.0;
    for (int i = 0; i <= M; ++i) {
        const double Fi = F[static_cast<std::size_t>(i)];
        const double Pi = P[static_cast<std::size_t>(i)];
        const double rhs = (gamma[i] - Fi) * Pi * Pi / (Fi * (1.0 - Fi));
        sup = std::max(sup, std::abs(dF[static_cast<std::size_t>(i)] - Pi));
        sup = std::max(sup, std::abs(dP[static_cast<std::size_t>(i)] - rhs));
    }
    out.residual_sup = sup;

    GridFunction integrand(gamma.grid, FieldKind::potential);
    const double span = beta - alpha;
    for (int i = 0; i <= M; ++i) {
        const double gi = gamma[i];
        const double Fi = F[static_cast<std::size_t>(i)];
        integrand[i] = entropy_term(gi, Fi) + entropy_term(1.0 - gi, 1.0 - Fi) +
                       std::log(P[static_cast<std::size_t>(i)] / span);
    }
    out.value = integrate_nodes(integrand);
    return out;
}

void validate_bvp_inputs(const GridFunction& gamma, double alpha, double beta) {
    if (!on_nodes(gamma.kind)) throw ValidationError("solve_F_bvp: gamma must be a node field");
    if (!(alpha > 0.0 && beta < 1.0 && alpha < beta)) {
        if (alpha == beta)
            throw ValidationError(
                "solve_F_bvp: equal reservoir densities make the nonlocal term singular; "
                "the free energy reduces to free_energy_F0 there");
        throw ValidationError("solve_F_bvp: need 0 < alpha < beta < 1");
    }
    for (int i = 0; i <= gamma.grid.cells; ++i)
        if (!(gamma[i] >= 0.0 && gamma[i] <= 1.0))
            throw ValidationError("solve_F_bvp: gamma must take values in [0,1]");
}

}  // namespace

double free_energy_F0(const GridFunction& gamma, const GridFunction& rho_bar) {
    if (gamma.grid != rho_bar.grid) throw ValidationError("free_energy_F0: profiles live on different grids");
    if (!on_nodes(gamma.kind) || !on_nodes(rho_bar.kind))
        throw ValidationError("free_energy_F0: node fields required");
    const int M = gamma.grid.cells;
    for (int i = 0; i <= M; ++i) {
        if (!(gamma[i] >= 0.0 && gamma[i] <= 1.0) || !(rho_bar[i] >= 0.0 && rho_bar[i] <= 1.0))
            throw ValidationError("free_energy_F0: profiles must take values in [0,1]");
    }
    for (int i = 1; i < M; ++i) {
        if (!(gamma[i] > 0.0 && gamma[i] < 1.0)) return kInf;
        if (!(rho_bar[i] > 0.0 && rho_bar[i] < 1.0)) return kInf;
    }
    GridFunction f(gamma.grid, FieldKind::potential);
    for (int i = 0; i <= M; ++i)
        f[i] = entropy_term(gamma[i], rho_bar[i]) + entropy_term(1.0 - gamma[i], 1.0 - rho_bar[i]);
    return integrate_nodes(f);
}

FreeEnergySolution solve_F_bvp(const GridFunction& gamma, double alpha, double beta) {
    validate_bvp_inputs(gamma, alpha, beta);
    const auto& gnodes = gamma.values;

    int iterations = 0;
    Shot best;
    double best_defect = kInf;
    auto evaluate = [&](double s) {
        ++iterations;
        Shot shot = shoot_once(gnodes, alpha, s);
        const double T = shot_defect(shot, beta);
        if (shot.complete && std::abs(T) < std::abs(best_defect)) {
            best = std::move(shot);
            best_defect = T;
        }
        return T;
    };
    auto bisect = [&](double lo, double hi) {
        for (int it = 0; it < 200 && std::abs(best_defect) > 1e-10; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (evaluate(mid) > 0.0)
                hi = mid;
            else
                lo = mid;
            if (hi - lo <= 1e-18 * hi) break;
        }
        return std::pair{lo, hi};
    };

    // Primary: bracket [1e-6, (beta-alpha)*1e3] on s = F'(0), grown from the
    // stationary slope.
    double s_lo = 1e-6;
    double s_hi = std::max(beta - alpha, 2.0 * s_lo);
    const double s_cap = (beta - alpha) * 1e3;
    bool bracket_ok = evaluate(s_lo) < 0.0;
    if (bracket_ok) {
        while (evaluate(s_hi) < 0.0 && std::abs(best_defect) > 1e-10) {
            s_hi *= 2.0;
            if (s_hi > s_cap) {
                bracket_ok = false;
                break;
            }
        }
    }
    if (bracket_ok && std::abs(best_defect) > 1e-10) std::tie(s_lo, s_hi) = bisect(s_lo, s_hi);

    bool used_collocation = false;
    if (std::abs(best_defect) > 1e-10) {
        // Bracket lost: Newton collocation with continuation recovers the
        // profile, whose initial slope re-seeds a tight shooting bracket.
        used_collocation = true;
        int solves = 0;
        const auto Fc = collocation_continuation(gnodes, alpha, beta, solves);
        iterations += solves;
        const double s_star = fd_derivative(Fc, gamma.grid.h(), 1, 5)[0];
        if (!(s_star > 0.0))
            throw NumericalError("solve_F_bvp: collocation produced a non-increasing start slope");
        double eps = 1e-3;
        s_lo = s_star * (1.0 - eps);
        s_hi = s_star * (1.0 + eps);
        bool found = false;
        for (int grow = 0; grow < 12; ++grow) {
            if (evaluate(s_lo) < 0.0 && evaluate(s_hi) > 0.0) {
                found = true;
                break;
            }
            if (std::abs(best_defect) <= 1e-10) {
                found = true;
                break;
            }
            eps *= 4.0;
            s_lo = std::max(1e-12, s_star * (1.0 - eps));
            s_hi = s_star * (1.0 + eps);
        }
        if (!found)
            throw NumericalError("solve_F_bvp: no increasing solution found; bracket trace: s in [" +
                                 std::to_string(s_lo) + ", " + std::to_string(s_hi) + "] after " +
                                 std::to_string(iterations) + " shots");
        if (std::abs(best_defect) > 1e-10) std::tie(s_lo, s_hi) = bisect(s_lo, s_hi);
        if (std::abs(best_defect) > 1e-10)
            throw NumericalError("solve_F_bvp: bisection failed to reach |F(1)-beta| <= 1e-10; best " +
                                 std::to_string(std::abs(best_defect)));
    }

    FreeEnergySolution out = finish(gamma, alpha, beta, std::move(best.F), std::move(best.P));
    out.iterations = iterations;
    out.bracket_lo = s_lo;
    out.bracket_hi = s_hi;
    out.used_collocation = used_collocation;
    return out;
}

RateEvaluation rate_density(const SpaceTimePath& path, const models::TransportModel& model) {
    path.check_consistent();
    if (path.kind != FieldKind::density) throw ValidationError("rate_density: expects a density path");
    const int K = path.frame_count();
    if (K < 3) throw ValidationError("rate_density: need at least 3 frames for the time derivative");
    const Grid& grid = path.grid;
    const int M = grid.cells;
    const double h = grid.h();
    const bool periodic = is_periodic(model.geometry);

    double alpha = 0.0, beta = 0.0;
    if (!periodic) {
        const auto& bg = std::get<BoundaryGeometry>(model.geometry);
        alpha = bg.alpha;
        beta = bg.beta;
    }
    for (int k = 0; k < K; ++k) {
        const auto& f = path.frames[static_cast<std::size_t>(k)];
        if (periodic) {
            if (std::abs(f.back() - f.front()) > 1e-12)
                throw ValidationError("rate_density: periodic frame lost its wrap duplicate");
        } else if (std::abs(f.front() - alpha) > 1e-8 || std::abs(f.back() - beta) > 1e-8) {
            throw ValidationError("rate_density: frame boundary values drifted off the reservoir densities");
        }
    }

    const SpaceTimePath J = pde::extract_current(path, model);

    RateEvaluation out;
    out.path = path;
    out.H.grid = grid;
    out.H.kind = FieldKind::potential;
    out.H.dt = path.dt;
    out.H.t0 = path.t0;
    out.optimal_flux.grid = grid;
    out.optimal_flux.kind = FieldKind::current;
    out.optimal_flux.dt = path.dt;
    out.optimal_flux.t0 = path.t0;
    out.per_slice.assign(static_cast<std::size_t>(K), 0.0);

    std::vector<double> dldt(static_cast<std::size_t>(M + 1));
    std::vector<double> chi_m(static_cast<std::size_t>(M));
    std::vector<double> G(static_cast<std::size_t>(M));
    std::vector<double> r(static_cast<std::size_t>(M + 1), 0.0);

    for (int k = 0; k < K; ++k) {
        const auto& f = path.frames[static_cast<std::size_t>(k)];
        const auto& Jk = J.frames[static_cast<std::size_t>(k)];
        std::vector<double> Hk(static_cast<std::size_t>(M + 1), 0.0);
        std::vector<double> wk = Jk;

        bool finite = true;
        for (int i = 0; i <= M && finite; ++i)
            if (!model.in_range(f[static_cast<std::size_t>(i)])) finite = false;
        for (int i = 0; i < M && finite; ++i) {
            chi_m[static_cast<std::size_t>(i)] =
                model.chi(0.5 * (f[static_cast<std::size_t>(i)] + f[static_cast<std::size_t>(i + 1)]));
            if (chi_m[static_cast<std::size_t>(i)] < 1e-12) finite = false;
        }

        if (finite) {
            // time derivative (second order; one-sided at the span ends)
            const auto& fm = path.frames[static_cast<std::size_t>(std::max(0, k - 1))];
            const auto& fp = path.frames[static_cast<std::size_t>(std::min(K - 1, k + 1))];
            for (int i = 0; i <= M; ++i) {
                if (k == 0) {
                    const auto& f2 = path.frames[2];
                    dldt[static_cast<std::size_t>(i)] =
                        (-3.0 * f[static_cast<std::size_t>(i)] + 4.0 * fp[static_cast<std::size_t>(i)] -
                         f2[static_cast<std::size_t>(i)]) /
                        (2.0 * path.dt);
                } else if (k == K - 1) {
                    const auto& f2 = path.frames[static_cast<std::size_t>(K - 3)];
                    dldt[static_cast<std::size_t>(i)] =
                        (3.0 * f[static_cast<std::size_t>(i)] - 4.0 * fm[static_cast<std::size_t>(i)] +
                         f2[static_cast<std::size_t>(i)]) /
                        (2.0 * path.dt);
                } else {
                    dldt[static_cast<std::size_t>(i)] =
                        (fp[static_cast<std::size_t>(i)] - fm[static_cast<std::size_t>(i)]) / (2.0 * path.dt);
                }
            }
            // continuity defect r = d_t rho + div J at the constrained nodes
            for (int i = 1; i < M; ++i)
                r[static_cast<std::size_t>(i)] =
                    dldt[static_cast<std::size_t>(i)] +
                    (Jk[static_cast<std::size_t>(i)] - Jk[static_cast<std::size_t>(i - 1)]) / h;
            if (periodic)
                r[0] = dldt[0] + (Jk[0] - Jk[static_cast<std::size_t>(M - 1)]) / h;

            // particular solution of (g_{i+1/2}-g_{i-1/2})/h = -r_i
            G[0] = 0.0;
            for (int i = 1; i < M; ++i)
                G[static_cast<std::size_t>(i)] = G[static_cast<std::size_t>(i - 1)] - h * r[static_cast<std::size_t>(i)];
            if (periodic) {
                double scale = 1.0;
                for (double v : Jk) scale = std::max(scale, std::abs(v));
                const double defect = (G[static_cast<std::size_t>(M - 1)] - h * r[0]) - G[0];
                if (std::abs(defect) > 1e-8 * scale) finite = false;  // mass not conserved
            }
            if (finite) {
                double num = 0.0, den = 0.0;
                for (int i = 0; i < M; ++i) {
                    num += G[static_cast<std::size_t>(i)] / chi_m[static_cast<std::size_t>(i)];
                    den += 1.0 / chi_m[static_cast<std::size_t>(i)];
                }
                const double c = -num / den;
                double A = 0.0;
                for (int i = 0; i < M; ++i) {
                    const double g = G[static_cast<std::size_t>(i)] + c;
                    A += g * g / chi_m[static_cast<std::size_t>(i)];
                    wk[static_cast<std::size_t>(i)] += g;
                    Hk[static_cast<std::size_t>(i + 1)] =
                        Hk[static_cast<std::size_t>(i)] + h * g / chi_m[static_cast<std::size_t>(i)];
                }
                out.per_slice[static_cast<std::size_t>(k)] = 0.5 * h * A;
            }
        }
        if (!finite) out.per_slice[static_cast<std::size_t>(k)] = kInf;
        out.H.frames.push_back(std::move(Hk));
        out.optimal_flux.frames.push_back(std::move(wk));
    }

    double cost = 0.0;
    for (int k = 0; k < K; ++k) {
        const double wgt = (k == 0 || k == K - 1) ? 0.5 : 1.0;
        cost += wgt * out.per_slice[static_cast<std::size_t>(k)];
    }
    out.cost = cost * path.dt;
    return out;
}

}  // namespace latgas::ldf
