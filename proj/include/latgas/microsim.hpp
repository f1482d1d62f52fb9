#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "latgas/grid.hpp"

namespace latgas::sim {

/// Occupancies of the open segment's sites 1..N-1; eta[x-1] is site x.
struct LatticeState {
    int N{50};
    double alpha{0.2};
    double beta{0.8};
    std::vector<std::uint8_t> eta;  // size N-1, values 0/1

    int particle_count() const {
        int n = 0;
        for (auto v : eta) n += v;
        return n;
    }
};

/// Signed net crossings of the N bonds {x,x+1}, x=0..N-1, up to time t.
/// Bonds 0 and N-1 couple to the reservoirs: W[0] counts creations at site 1
/// minus departures into the left reservoir, W[N-1] departures to the right
/// reservoir minus creations at site N-1.
struct CurrentCounters {
    std::vector<std::int64_t> W;
    double t{0.0};
};

struct SimParams {
    int N{50};
    double alpha{0.2};
    double beta{0.8};
    double t_end{10.0};
    std::uint64_t seed{0};
    int replicas{1};
    double sample_interval{0.05};
    double burn_in{10.0};  // discarded by estimate_stationary
    int batches{32};       // batch-means batches per replica (>= 20 enforced)
    bool allow_extreme_densities{false};  // accept the closed interval [0,1]

    /// Returns every violation, not just the first.
    std::vector<std::string> validate() const;
    void require_valid() const;  // throws ValidationError listing all violations
};

struct Snapshot {
    double t;
    LatticeState state;
    CurrentCounters counters;
};
using Trajectory = std::vector<Snapshot>;

/// Either an explicit state or independent Bernoulli(profile(x/N)) draws.
struct InitialCondition {
    std::optional<LatticeState> state;
    std::function<double(double)> profile;

    static InitialCondition bernoulli(std::function<double(double)> p) {
        InitialCondition ic;
        ic.profile = std::move(p);
        return ic;
    }
    static InitialCondition from_state(LatticeState s) {
        InitialCondition ic;
        ic.state = std::move(s);
        return ic;
    }
};

/// Realize the initial state for one replica (Bernoulli profiles draw from
/// the replica's own stream; explicit states are validated against params).
LatticeState realize_initial(const SimParams& params, const InitialCondition& init, int replica);

/// One replica's trajectory, sampled every sample_interval (t=0 and t_end
/// included).  Identical (seed, params, replica, init) give byte-identical
/// trajectories.
Trajectory simulate(const SimParams& params, const InitialCondition& init, int replica = 0);

/// Stationary estimates pooled over replicas; errors are batch-means
/// standard errors over params.batches batches per replica.
///
/// site_* index sites 1..N-1.  current_* index bonds 0..N-1 and are reported
/// in the normalization whose stationary value is alpha - beta (counter rate
/// 2 dW / (N dt); the bond exchange clock runs at N^2/2).  corr holds the
/// covariance estimates E[eta(x); eta(y)] for site pairs x < y, flattened
/// row-major with x, y in 1..N-1, x < y.
struct StationaryStats {
    int N{0};
    double alpha{0.0}, beta{0.0};
    double window{0.0};  // averaged time span per replica after burn-in
    int batch_count{0};  // pooled batches (replicas * batches)
    long long sample_count{0};

    std::vector<double> site_mean, site_stderr;
    std::vector<double> current_mean, current_stderr;
    std::vector<double> corr, corr_stderr;

    static int pair_index(int N, int x, int y) {  // x < y, sites 1..N-1
        const int n = N - 1, i = x - 1, j = y - 1;
        return i * n - i * (i + 1) / 2 + (j - i - 1);
    }
    static int pair_count(int N) { return (N - 1) * (N - 2) / 2; }
};

StationaryStats estimate_stationary(const SimParams& params);

/// Binned empirical fields on the macro grid: density = mass 1/N per
/// particle over the bin width, current = the measure N^-2 sum_x W[x]
/// delta_{x/N} over the bin width.  Bins are [j/M, (j+1)/M); both fields
/// are piecewise constant over the bins, so they come back on cell centers.
std::pair<GridFunction, GridFunction> empirical_observables(const LatticeState& state,
                                                            const CurrentCounters& counters, const Grid& grid);

/// <pi^N, H> = N^-1 sum_x H(x/N) eta(x) over sites 1..N-1.
double pair_density(const LatticeState& state, const std::function<double(double)>& H);

/// <W^N_t, F> = N^-2 sum_{x=0}^{N-1} F(x/N) W[x].
double pair_current(int N, const CurrentCounters& counters, const std::function<double(double)>& F);

}  // namespace latgas::sim
