#include "latgas/current_ldf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "latgas/errors.hpp"
#include "latgas/pde.hpp"

namespace latgas::cur {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

CurrentRateEvaluation rate_current(const SpaceTimePath& w, const GridFunction& gamma,
                                   const models::TransportModel& model) {
    w.check_consistent();
    if (w.kind != FieldKind::current) throw ValidationError("rate_current: w must be a current path");
    if (w.grid != gamma.grid) throw ValidationError("rate_current: w and gamma live on different grids");
    if (w.frame_count() < 2) throw ValidationError("rate_current: need at least 2 frames");
    for (int i = 0; i < gamma.size(); ++i)
        if (!model.in_range(gamma[i])) throw ValidationError("rate_current: gamma outside the density range");

    CurrentRateEvaluation out;
    out.w = w;
    out.rho = pde::solve_continuity(gamma, w, model.geometry);
    const SpaceTimePath J = pde::extract_current(out.rho, model);

    const int K = w.frame_count();
    const int M = w.grid.cells;
    const double h = w.grid.h();
    out.per_slice.assign(static_cast<std::size_t>(K), 0.0);

    for (int k = 0; k < K; ++k) {
        const auto& rho = out.rho.frames[static_cast<std::size_t>(k)];
        const auto& wk = w.frames[static_cast<std::size_t>(k)];
        const auto& Jk = J.frames[static_cast<std::size_t>(k)];

        bool finite = true;
        for (int i = 0; i <= M && finite; ++i)
            if (!model.in_range(rho[static_cast<std::size_t>(i)])) finite = false;
        double A = 0.0;
        for (int i = 0; i < M && finite; ++i) {
            const double chi = model.chi(0.5 * (rho[static_cast<std::size_t>(i)] + rho[static_cast<std::size_t>(i + 1)]));
            if (chi < 1e-12) {
                finite = false;
                break;
            }
            const double dev = wk[static_cast<std::size_t>(i)] - Jk[static_cast<std::size_t>(i)];
            A += dev * dev / chi;
        }
        out.per_slice[static_cast<std::size_t>(k)] = finite ? 0.5 * h * A : kInf;
    }

    double cost = 0.0;
    for (int k = 0; k < K; ++k) {
        const double wgt = (k == 0 || k == K - 1) ? 0.5 : 1.0;
        cost += wgt * out.per_slice[static_cast<std::size_t>(k)];
    }
    out.cost = cost * w.dt;
    return out;
}

LlnReport current_lln_check(const sim::SimParams& params, const GridFunction& gamma,
                            const std::function<double(double)>& F_test, double dt) {
    params.require_valid();
    if (params.replicas < 2)
        throw ValidationError("current_lln_check: need at least 2 replicas for the error band");
    if (!F_test) throw ValidationError("current_lln_check: missing test function");
    for (int i = 0; i < gamma.size(); ++i)
        if (!(gamma[i] >= 0.0 && gamma[i] <= 1.0))
            throw ValidationError("current_lln_check: gamma must take values in [0,1]");

    // Macroscopic side: diffusion solution from gamma, then the double
    // integral -1/2 int dt int F grad(rho).
    const Grid& grid = gamma.grid;
    const double h = grid.h();
    if (dt <= 0.0) dt = 0.5 * h;
    const SpaceTimePath rho = pde::solve_heat(gamma, params.alpha, params.beta, params.t_end, dt);
    const int K = rho.frame_count();
    const int M = grid.cells;
    double predicted = 0.0;
    for (int k = 0; k < K; ++k) {
        const auto& f = rho.frames[static_cast<std::size_t>(k)];
        double inner = 0.0;
        for (int i = 0; i < M; ++i)
            inner += F_test(grid.center(i)) * (f[static_cast<std::size_t>(i + 1)] - f[static_cast<std::size_t>(i)]);
        const double wgt = (k == 0 || k == K - 1) ? 0.5 : 1.0;
        predicted += wgt * inner;
    }
    predicted *= -0.5 * rho.dt;

    // Microscopic side: one value per replica from the final bond counters.
    const auto profile = [&gamma, M](double u) {
        const double t = std::clamp(u, 0.0, 1.0) * M;
        int i = std::min(static_cast<int>(t), M - 1);
        const double w = t - i;
        return gamma[i] * (1.0 - w) + gamma[i + 1] * w;
    };
    const auto init = sim::InitialCondition::bernoulli(profile);

    double sum = 0.0, sumsq = 0.0;
    for (int r = 0; r < params.replicas; ++r) {
        const auto traj = sim::simulate(params, init, r);
        const double v = sim::pair_current(params.N, traj.back().counters, F_test);
        sum += v;
        sumsq += v * v;
    }
    const double R = params.replicas;
    LlnReport out;
    out.replicas = params.replicas;
    out.empirical_mean = sum / R;
    const double var = std::max(0.0, (sumsq - R * out.empirical_mean * out.empirical_mean) / (R - 1.0));
    out.empirical_stderr = std::sqrt(var / R);
    out.predicted = predicted;
    out.discrepancy = std::abs(out.empirical_mean - predicted);
    out.within_band = out.discrepancy <= 3.0 * out.empirical_stderr;
    return out;
}

}  // namespace latgas::cur
