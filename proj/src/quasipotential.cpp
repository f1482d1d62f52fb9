#include "latgas/quasipotential.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "latgas/errors.hpp"
#include "latgas/models.hpp"
#include "latgas/pde.hpp"
#include "latgas/stencil.hpp"

namespace latgas::qp {

namespace {

double logit(double x) { return std::log(x / (1.0 - x)); }
double expit(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void require_endpoint_match(const GridFunction& gamma, double alpha, double beta, const char* who) {
    const int M = gamma.grid.cells;
    if (std::abs(gamma[0] - alpha) > 1e-8 || std::abs(gamma[M] - beta) > 1e-8)
        throw ValidationError(std::string(who) + ": gamma must hold the reservoir densities at the ends");
}

SpaceTimePath reverse_time(const SpaceTimePath& path) {
    SpaceTimePath out;
    out.grid = path.grid;
    out.kind = path.kind;
    out.dt = path.dt;
    out.t0 = 0.0;
    out.frames.assign(path.frames.rbegin(), path.frames.rend());
    return out;
}

double sup_deviation(const std::vector<double>& a, const GridFunction& b) {
    double sup = 0.0;
    for (int i = 0; i < b.size(); ++i)
        sup = std::max(sup, std::abs(a[static_cast<std::size_t>(i)] - b[i]));
    return sup;
}

// Heat-flow run whose horizon doubles (cap 40) until the final frame sits
// within 1e-4 of the stationary profile.
SpaceTimePath relax_until_stationary(const GridFunction& start, double alpha, double beta,
                                     const GridFunction& rho_bar, double T, double dt, double& T_used,
                                     double& final_dev) {
    for (;;) {
        SpaceTimePath path = pde::solve_heat(start, alpha, beta, T, dt);
        final_dev = sup_deviation(path.frames.back(), rho_bar);
        T_used = T;
        if (final_dev <= 1e-4) return path;
        if (T >= 40.0)
            throw NumericalError("relaxation horizon capped at 40 with final deviation " +
                                 std::to_string(final_dev) + "; T too small");
        T = std::min(2.0 * T, 40.0);
    }
}

// chi~ per cell chosen so that div(chi~ grad logit rho) = Lap rho exactly on
// the 3-point stencils: the divided difference of rho along logit(rho).
std::vector<double> logit_consistent_mobility(const GridFunction& rho) {
    const int M = rho.grid.cells;
    std::vector<double> chi(static_cast<std::size_t>(M));
    for (int i = 0; i < M; ++i) {
        const double d = logit(rho[i + 1]) - logit(rho[i]);
        if (std::abs(d) > 1e-12) {
            chi[static_cast<std::size_t>(i)] = (rho[i + 1] - rho[i]) / d;
        } else {
            const double m = 0.5 * (rho[i] + rho[i + 1]);
            chi[static_cast<std::size_t>(i)] = m * (1.0 - m);
        }
    }
    return chi;
}

// div(chi grad psi) at the interior nodes from cell mobilities.
std::vector<double> divergence_form(const std::vector<double>& chi, const std::vector<double>& psi, double h) {
    const int M = static_cast<int>(psi.size()) - 1;
    std::vector<double> out(static_cast<std::size_t>(M + 1), 0.0);
    for (int i = 1; i < M; ++i)
        out[static_cast<std::size_t>(i)] =
            (chi[static_cast<std::size_t>(i)] * (psi[static_cast<std::size_t>(i + 1)] - psi[static_cast<std::size_t>(i)]) -
             chi[static_cast<std::size_t>(i - 1)] *
                 (psi[static_cast<std::size_t>(i)] - psi[static_cast<std::size_t>(i - 1)])) /
            (h * h);
    return out;
}

void require_open_interval(const GridFunction& gamma, const char* who) {
    for (int i = 0; i <= gamma.grid.cells; ++i)
        if (!(gamma[i] > 0.0 && gamma[i] < 1.0))
            throw ValidationError(std::string(who) + ": profile must stay strictly inside (0,1)");
}

}  // namespace

GridFunction solve_phi(const GridFunction& gamma, double alpha, double beta) {
    const auto sol = ldf::solve_F_bvp(gamma, alpha, beta);
    GridFunction phi(gamma.grid, FieldKind::potential);
    for (int i = 0; i < phi.size(); ++i) phi[i] = logit(sol.F[i]);
    return phi;
}

double phi_equation_residual(const GridFunction& phi, const GridFunction& gamma) {
    if (phi.grid != gamma.grid) throw ValidationError("phi_equation_residual: grids differ");
    const int M = phi.grid.cells;
    const double h = phi.grid.h();
    const auto d1 = fd_derivative(phi.values, h, 1, 5);
    const auto d2 = fd_derivative(phi.values, h, 2, 6);
    double sup = 0.0;
    for (int i = 1; i < M; ++i) {
        const double grad = d1[static_cast<std::size_t>(i)];
        const double res = d2[static_cast<std::size_t>(i)] / (grad * grad) + expit(-phi[i]) - gamma[i];
        sup = std::max(sup, std::abs(res));
    }
    return sup;
}

HamiltonJacobiResidual hamilton_jacobi_residual(const GridFunction& gamma) {
    require_open_interval(gamma, "hamilton_jacobi_residual");
    const int M = gamma.grid.cells;
    const double h = gamma.grid.h();
    const double alpha = gamma[0], beta = gamma[M];
    const GridFunction phi = solve_phi(gamma, alpha, beta);

    std::vector<double> dW(static_cast<std::size_t>(M + 1));
    for (int i = 0; i <= M; ++i) dW[static_cast<std::size_t>(i)] = logit(gamma[i]) - phi[i];

    const auto grad_dW = fd_derivative(dW, h, 1, 5);
    const auto lap_gamma = fd_derivative(gamma.values, h, 2, 6);

    GridFunction mob(gamma.grid, FieldKind::potential);
    GridFunction drift(gamma.grid, FieldKind::potential);
    for (int i = 0; i <= M; ++i) {
        const double chi = gamma[i] * (1.0 - gamma[i]);
        mob[i] = chi * grad_dW[static_cast<std::size_t>(i)] * grad_dW[static_cast<std::size_t>(i)];
        drift[i] = dW[static_cast<std::size_t>(i)] * lap_gamma[static_cast<std::size_t>(i)];
    }
    // Trapezoid alone leaves an O(h^2) bias that dominates the identity
    // defect; the h^2/12 end correction upgrades the quadrature to O(h^4).
    auto corrected_integral = [&](const GridFunction& f) {
        const auto d1 = fd_derivative(f.values, h, 1, std::min(5, M + 1));
        return integrate_nodes(f) - h * h / 12.0 * (d1.back() - d1.front());
    };
    HamiltonJacobiResidual out;
    out.mobility_term = corrected_integral(mob);
    out.drift_term = corrected_integral(drift);
    out.residual = out.mobility_term + out.drift_term;
    return out;
}

AdjointSolution adjoint_path(const GridFunction& gamma, double alpha, double beta, double T, double dt) {
    require_endpoint_match(gamma, alpha, beta, "adjoint_path");
    const Grid& grid = gamma.grid;
    const int M = grid.cells;
    const double h = grid.h();
    if (dt <= 0.0) dt = 0.5 * h;
    if (T <= 0.0) throw ValidationError("adjoint_path: T must be positive");

    const auto bvp = ldf::solve_F_bvp(gamma, alpha, beta);
    const GridFunction rho_bar = pde::linear_profile(grid, alpha, beta);

    AdjointSolution out;
    out.gamma = gamma;
    out.phi = GridFunction(grid, FieldKind::potential);
    for (int i = 0; i <= M; ++i) out.phi[i] = logit(bvp.F[i]);

    const GridFunction F0(grid, FieldKind::density, bvp.F.values);
    out.F_path = relax_until_stationary(F0, alpha, beta, rho_bar, T, dt, out.T_used, out.final_deviation);

    out.rho_path.grid = grid;
    out.rho_path.kind = FieldKind::density;
    out.rho_path.dt = out.F_path.dt;
    out.rho_path.t0 = 0.0;
    const int K = out.F_path.frame_count();
    out.rho_path.frames.reserve(static_cast<std::size_t>(K));

    for (int k = 0; k < K; ++k) {
        const auto& F = out.F_path.frames[static_cast<std::size_t>(k)];
        double min_step = 1.0;
        for (int i = 0; i < M; ++i)
            min_step = std::min(min_step, F[static_cast<std::size_t>(i + 1)] - F[static_cast<std::size_t>(i)]);
        if (!(min_step > 0.0))
            throw NumericalError("adjoint_path: heat flow lost monotonicity at frame " + std::to_string(k));

        if (k == 0) {
            // At t=0 the reconstruction collapses algebraically onto gamma:
            // Lap F / (grad F)^2 equals (gamma - F)/(F(1-F)) along the solved
            // profile, so the frame is gamma itself.
            out.rho_path.frames.push_back(gamma.values);
            continue;
        }
        const auto Fp = fd_derivative(F, h, 1, 5);
        const auto Fpp = fd_derivative(F, h, 2, 6);
        std::vector<double> rho(static_cast<std::size_t>(M + 1));
        rho[0] = alpha;
        rho[static_cast<std::size_t>(M)] = beta;
        for (int i = 1; i < M; ++i) {
            const double fp = Fp[static_cast<std::size_t>(i)];
            if (std::abs(fp) < 1e-8)
                throw NumericalError("adjoint_path: grad F below resolution at frame " + std::to_string(k));
            const double Fi = F[static_cast<std::size_t>(i)];
            double v = Fi + Fi * (1.0 - Fi) * Fpp[static_cast<std::size_t>(i)] / (fp * fp);
            if (v < -1e-6 || v > 1.0 + 1e-6)
                throw NumericalError("adjoint_path: reconstructed density left [0,1] at frame " +
                                     std::to_string(k));
            rho[static_cast<std::size_t>(i)] = std::clamp(v, 0.0, 1.0);
        }
        out.rho_path.frames.push_back(std::move(rho));
    }

    out.optimal_path = reverse_time(out.rho_path);
    return out;
}

QuasipotentialCheck verify_quasipotential(const GridFunction& gamma, double alpha, double beta, double T,
                                          double dt) {
    require_endpoint_match(gamma, alpha, beta, "verify_quasipotential");
    const auto model = models::builtin_model("ssep", {}, BoundaryGeometry{alpha, beta});

    QuasipotentialCheck out;
    if (alpha == beta) {
        // Reversible case: the optimal path is the time reversal of the
        // plain relaxation, and the free energy is the local one.
        if (dt <= 0.0) dt = 0.5 * gamma.grid.h();
        const GridFunction rho_bar = pde::constant_profile(gamma.grid, alpha);
        double final_dev = 0.0;
        const SpaceTimePath relax =
            relax_until_stationary(gamma, alpha, beta, rho_bar, T, dt, out.T_used, final_dev);
        out.cost = ldf::rate_density(reverse_time(relax), model).cost;
        out.free_energy = ldf::free_energy_F0(gamma, rho_bar);
    } else {
        const AdjointSolution adj = adjoint_path(gamma, alpha, beta, T, dt);
        out.T_used = adj.T_used;
        out.cost = ldf::rate_density(adj.optimal_path, model).cost;
        out.free_energy = ldf::solve_F_bvp(gamma, alpha, beta).value;
    }
    out.relative_gap = std::abs(out.cost - out.free_energy) / std::max(out.free_energy, 1e-12);
    return out;
}

DriftConsistency adjoint_drift_consistency(const GridFunction& gamma, const GridFunction* phi_override) {
    require_open_interval(gamma, "adjoint_drift_consistency");
    const int M = gamma.grid.cells;
    const double h = gamma.grid.h();
    const double alpha = gamma[0], beta = gamma[M];

    const GridFunction phi_true = solve_phi(gamma, alpha, beta);
    const GridFunction& phi_adj = phi_override ? *phi_override : phi_true;
    if (phi_adj.grid != gamma.grid)
        throw ValidationError("adjoint_drift_consistency: phi_override grid mismatch");

    const auto chi = logit_consistent_mobility(gamma);
    std::vector<double> logit_gamma(static_cast<std::size_t>(M + 1));
    for (int i = 0; i <= M; ++i) logit_gamma[static_cast<std::size_t>(i)] = logit(gamma[i]);
    std::vector<double> dW(static_cast<std::size_t>(M + 1));
    for (int i = 0; i <= M; ++i) dW[static_cast<std::size_t>(i)] = logit_gamma[static_cast<std::size_t>(i)] - phi_true[i];

    const auto div_phi = divergence_form(chi, phi_adj.values, h);
    const auto div_dW = divergence_form(chi, dW, h);

    DriftConsistency out;
    out.route_adjoint = GridFunction(gamma.grid, FieldKind::potential);
    out.route_identity = GridFunction(gamma.grid, FieldKind::potential);
    for (int i = 1; i < M; ++i) {
        const double lap = (gamma[i + 1] - 2.0 * gamma[i] + gamma[i - 1]) / (h * h);
        out.route_adjoint[i] = 0.5 * lap - div_phi[static_cast<std::size_t>(i)];
        out.route_identity[i] = -0.5 * lap + div_dW[static_cast<std::size_t>(i)];
        out.sup_difference = std::max(out.sup_difference, std::abs(out.route_adjoint[i] - out.route_identity[i]));
    }
    return out;
}

}  // namespace latgas::qp
