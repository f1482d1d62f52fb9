#include "latgas/microsim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "latgas/errors.hpp"
#include "latgas/kmc.hpp"
#include "latgas/rng.hpp"

namespace latgas::sim {

namespace {

// Replica r uses stream (seed, 2r) for the dynamics and (seed, 2r+1) for the
// Bernoulli initial draw, so the two never collide.
constexpr std::uint64_t kmc_stream(int replica) { return 2ULL * static_cast<std::uint64_t>(replica); }
constexpr std::uint64_t init_stream(int replica) { return 2ULL * static_cast<std::uint64_t>(replica) + 1ULL; }

void pooled_stats(const std::vector<double>& sum, const std::vector<double>& sumsq, long long B,
                  std::vector<double>& mean, std::vector<double>& stderr_out) {
    const std::size_t n = sum.size();
    mean.assign(n, 0.0);
    stderr_out.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double m = sum[i] / static_cast<double>(B);
        mean[i] = m;
        if (B > 1) {
            const double var = std::max(0.0, (sumsq[i] - static_cast<double>(B) * m * m) / static_cast<double>(B - 1));
            stderr_out[i] = std::sqrt(var / static_cast<double>(B));
        }
    }
}

}  // namespace

std::vector<std::string> SimParams::validate() const {
    std::vector<std::string> errs;
    if (N < 3) errs.push_back("N must be at least 3 (got " + std::to_string(N) + ")");
    auto check_density = [&](double v, const char* name) {
        if (!(v >= 0.0 && v <= 1.0)) {
            errs.push_back(std::string(name) + " must lie in [0,1] (got " + std::to_string(v) + ")");
        } else if (!allow_extreme_densities && !(v > 0.0 && v < 1.0)) {
            errs.push_back(std::string(name) + " must lie strictly inside (0,1) unless allow_extreme_densities is set");
        }
    };
    check_density(alpha, "alpha");
    check_density(beta, "beta");
    if (!allow_extreme_densities && alpha > beta)
        errs.push_back("alpha <= beta is required unless allow_extreme_densities is set");
    if (!(t_end > 0.0) || !std::isfinite(t_end)) errs.push_back("t_end must be positive and finite");
    if (!(sample_interval > 0.0) || !std::isfinite(sample_interval)) errs.push_back("sample_interval must be positive");
    if (replicas < 1) errs.push_back("replicas must be at least 1");
    if (burn_in < 0.0) errs.push_back("burn_in must be non-negative");
    if (burn_in >= t_end) errs.push_back("burn_in must be smaller than t_end");
    if (batches < 20) errs.push_back("batch means need at least 20 batches (got " + std::to_string(batches) + ")");
    return errs;
}

void SimParams::require_valid() const {
    const auto errs = validate();
    if (errs.empty()) return;
    std::string msg = "invalid simulation parameters:";
    for (const auto& e : errs) msg += "\n  - " + e;
    throw ValidationError(msg);
}

LatticeState realize_initial(const SimParams& params, const InitialCondition& init, int replica) {
    if (init.state) {
        const LatticeState& s = *init.state;
        if (s.N != params.N || static_cast<int>(s.eta.size()) != params.N - 1)
            throw ValidationError("initial state does not match N");
        for (auto v : s.eta)
            if (v > 1) throw ValidationError("initial occupancies must be 0 or 1");
        LatticeState out = s;
        out.alpha = params.alpha;
        out.beta = params.beta;
        return out;
    }
    if (!init.profile) throw ValidationError("initial condition needs a state or a profile");
    LatticeState out;
    out.N = params.N;
    out.alpha = params.alpha;
    out.beta = params.beta;
    out.eta.resize(static_cast<std::size_t>(params.N - 1));
    Rng rng(params.seed, init_stream(replica));
    for (int x = 1; x <= params.N - 1; ++x) {
        const double p = init.profile(static_cast<double>(x) / params.N);
        if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("initial profile must take values in [0,1]");
        out.eta[static_cast<std::size_t>(x - 1)] = rng.bernoulli(p) ? 1 : 0;
    }
    return out;
}

Trajectory simulate(const SimParams& params, const InitialCondition& init, int replica) {
    params.require_valid();
    LatticeState state = realize_initial(params, init, replica);
    Kmc kmc(params.N, params.alpha, params.beta, state.eta, params.seed, kmc_stream(replica));

    Trajectory out;
    auto emit = [&](double t) {
        Snapshot s;
        s.t = t;
        s.state = LatticeState{params.N, params.alpha, params.beta, kmc.eta()};
        s.counters = CurrentCounters{kmc.W(), t};
        out.push_back(std::move(s));
    };

    emit(0.0);
    const auto ticks = static_cast<long long>(std::floor(params.t_end / params.sample_interval + 1e-9));
    double last = 0.0;
    for (long long j = 1; j <= ticks; ++j) {
        const double t = static_cast<double>(j) * params.sample_interval;
        kmc.advance_to(t);
        emit(t);
        last = t;
    }
    if (last < params.t_end * (1.0 - 1e-12)) {
        kmc.advance_to(params.t_end);
        emit(params.t_end);
    }
    return out;
}

namespace {

struct ReplicaAcc {
    std::vector<double> occ_sum, occ_sumsq;    // per-site batch means
    std::vector<double> cur_sum, cur_sumsq;    // per-bond batch means
    std::vector<double> corr_sum, corr_sumsq;  // per-pair batch covariances
    long long samples{0};

    explicit ReplicaAcc(int N)
        : occ_sum(static_cast<std::size_t>(N - 1), 0.0), occ_sumsq(static_cast<std::size_t>(N - 1), 0.0),
          cur_sum(static_cast<std::size_t>(N), 0.0), cur_sumsq(static_cast<std::size_t>(N), 0.0),
          corr_sum(static_cast<std::size_t>(StationaryStats::pair_count(N)), 0.0),
          corr_sumsq(static_cast<std::size_t>(StationaryStats::pair_count(N)), 0.0) {}
};

void run_replica(const SimParams& params, const InitialCondition& init, int replica, ReplicaAcc& acc) {
    const int N = params.N;
    const int sites = N - 1;
    const int pairs = StationaryStats::pair_count(N);
    LatticeState state = realize_initial(params, init, replica);
    Kmc kmc(N, params.alpha, params.beta, state.eta, params.seed, kmc_stream(replica));

    kmc.advance_to(params.burn_in);
    kmc.take_occupancy();
    std::vector<std::int64_t> w_prev = kmc.W();

    const double window = params.t_end - params.burn_in;
    const double batch_len = window / params.batches;
    const auto ticks_per_batch = static_cast<long long>(std::floor(batch_len / params.sample_interval + 1e-9));
    if (ticks_per_batch < 1)
        throw ValidationError("estimate_stationary: sample_interval leaves a batch without samples");

    std::vector<double> s1(static_cast<std::size_t>(sites));
    std::vector<double> s2(static_cast<std::size_t>(pairs));
    std::vector<int> occupied;
    occupied.reserve(static_cast<std::size_t>(sites));

    for (int b = 0; b < params.batches; ++b) {
        const double batch_start = params.burn_in + b * batch_len;
        const double batch_end = b + 1 == params.batches ? params.t_end : batch_start + batch_len;
        std::fill(s1.begin(), s1.end(), 0.0);
        std::fill(s2.begin(), s2.end(), 0.0);

        for (long long j = 1; j <= ticks_per_batch; ++j) {
            kmc.advance_to(batch_start + static_cast<double>(j) * params.sample_interval);
            const auto& eta = kmc.eta();
            occupied.clear();
            for (int i = 0; i < sites; ++i)
                if (eta[static_cast<std::size_t>(i)]) occupied.push_back(i);
            for (int i : occupied) s1[static_cast<std::size_t>(i)] += 1.0;
            for (std::size_t a = 0; a < occupied.size(); ++a) {
                const int i = occupied[a];
                const int base = i * sites - i * (i + 1) / 2 - i - 1;
                for (std::size_t c = a + 1; c < occupied.size(); ++c)
                    s2[static_cast<std::size_t>(base + occupied[c])] += 1.0;
            }
            ++acc.samples;
        }
        kmc.advance_to(batch_end);

        const double len = batch_end - batch_start;
        const std::vector<double> occ = kmc.take_occupancy();
        for (int i = 0; i < sites; ++i) {
            const double v = occ[static_cast<std::size_t>(i)] / len;
            acc.occ_sum[static_cast<std::size_t>(i)] += v;
            acc.occ_sumsq[static_cast<std::size_t>(i)] += v * v;
        }
        const auto& w = kmc.W();
        for (int x = 0; x < N; ++x) {
            const double v = 2.0 * static_cast<double>(w[static_cast<std::size_t>(x)] - w_prev[static_cast<std::size_t>(x)]) /
                             (static_cast<double>(N) * len);
            acc.cur_sum[static_cast<std::size_t>(x)] += v;
            acc.cur_sumsq[static_cast<std::size_t>(x)] += v * v;
        }
        w_prev = w;

        const double n = static_cast<double>(ticks_per_batch);
        for (int i = 0; i < sites; ++i) {
            const int base = i * sites - i * (i + 1) / 2 - i - 1;
            for (int j2 = i + 1; j2 < sites; ++j2) {
                const std::size_t p = static_cast<std::size_t>(base + j2);
                const double v = s2[p] / n - (s1[static_cast<std::size_t>(i)] / n) * (s1[static_cast<std::size_t>(j2)] / n);
                acc.corr_sum[p] += v;
                acc.corr_sumsq[p] += v * v;
            }
        }
    }
}

}  // namespace

StationaryStats estimate_stationary(const SimParams& params) {
    params.require_valid();
    InitialCondition init = InitialCondition::bernoulli(
        [a = params.alpha, b = params.beta](double u) { return a + (b - a) * u; });

    std::vector<ReplicaAcc> accs;
    accs.reserve(static_cast<std::size_t>(params.replicas));
    for (int r = 0; r < params.replicas; ++r) accs.emplace_back(params.N);

    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const int workers = static_cast<int>(std::min<unsigned>(hw, static_cast<unsigned>(params.replicas)));
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(params.replicas));
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            while (true) {
                const int r = next.fetch_add(1);
                if (r >= params.replicas) return;
                try {
                    run_replica(params, init, r, accs[static_cast<std::size_t>(r)]);
                } catch (...) {
                    errors[static_cast<std::size_t>(r)] = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    // Merge in replica order (deterministic reduction).
    const int sites = params.N - 1;
    const int pairs = StationaryStats::pair_count(params.N);
    std::vector<double> occ_sum(static_cast<std::size_t>(sites), 0.0), occ_sumsq(static_cast<std::size_t>(sites), 0.0);
    std::vector<double> cur_sum(static_cast<std::size_t>(params.N), 0.0), cur_sumsq(static_cast<std::size_t>(params.N), 0.0);
    std::vector<double> corr_sum(static_cast<std::size_t>(pairs), 0.0), corr_sumsq(static_cast<std::size_t>(pairs), 0.0);
    long long samples = 0;
    for (const auto& a : accs) {
        for (std::size_t i = 0; i < occ_sum.size(); ++i) {
            occ_sum[i] += a.occ_sum[i];
            occ_sumsq[i] += a.occ_sumsq[i];
        }
        for (std::size_t i = 0; i < cur_sum.size(); ++i) {
            cur_sum[i] += a.cur_sum[i];
            cur_sumsq[i] += a.cur_sumsq[i];
        }
        for (std::size_t i = 0; i < corr_sum.size(); ++i) {
            corr_sum[i] += a.corr_sum[i];
            corr_sumsq[i] += a.corr_sumsq[i];
        }
        samples += a.samples;
    }

    StationaryStats out;
    out.N = params.N;
    out.alpha = params.alpha;
    out.beta = params.beta;
    out.window = params.t_end - params.burn_in;
    out.batch_count = params.replicas * params.batches;
    out.sample_count = samples;
    pooled_stats(occ_sum, occ_sumsq, out.batch_count, out.site_mean, out.site_stderr);
    pooled_stats(cur_sum, cur_sumsq, out.batch_count, out.current_mean, out.current_stderr);
    pooled_stats(corr_sum, corr_sumsq, out.batch_count, out.corr, out.corr_stderr);
    return out;
}

std::pair<GridFunction, GridFunction> empirical_observables(const LatticeState& state,
                                                            const CurrentCounters& counters, const Grid& grid) {
    if (static_cast<int>(state.eta.size()) != state.N - 1)
        throw ValidationError("empirical_observables: state size mismatch");
    if (static_cast<int>(counters.W.size()) != state.N)
        throw ValidationError("empirical_observables: counter size mismatch");
    const int N = state.N;
    const int M = grid.cells;

    GridFunction density(grid, FieldKind::current);  // piecewise-constant bin values live on cell centers
    GridFunction current(grid, FieldKind::current);
    for (int x = 1; x <= N - 1; ++x) {
        if (!state.eta[static_cast<std::size_t>(x - 1)]) continue;
        const int j = std::min(M - 1, x * M / N);
        density[j] += static_cast<double>(M) / N;
    }

    for (int x = 0; x <= N - 1; ++x) {
        const int j = std::min(M - 1, x * M / N);
        current[j] += static_cast<double>(counters.W[static_cast<std::size_t>(x)]) * M / (static_cast<double>(N) * N);
    }
    return {density, current};
}

double pair_density(const LatticeState& state, const std::function<double(double)>& H) {
    double s = 0.0;
    for (int x = 1; x <= state.N - 1; ++x)
        if (state.eta[static_cast<std::size_t>(x - 1)]) s += H(static_cast<double>(x) / state.N);
    return s / state.N;
}

double pair_current(int N, const CurrentCounters& counters, const std::function<double(double)>& F) {
    double s = 0.0;
    for (int x = 0; x <= N - 1; ++x)
        s += F(static_cast<double>(x) / N) * static_cast<double>(counters.W[static_cast<std::size_t>(x)]);
    return s / (static_cast<double>(N) * N);
}

}  // namespace latgas::sim
