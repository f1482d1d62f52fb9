#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "latgas/rng.hpp"

namespace latgas::sim {

/// Sum tree over event rates: O(log n) update and inverse-CDF sampling.
class RateTree {
  public:
    explicit RateTree(int n) : n_(n) {
        size_ = 1;
        while (size_ < n) size_ <<= 1;
        tree_.assign(static_cast<std::size_t>(2 * size_), 0.0);
    }

    void set(int i, double rate) {
        std::size_t k = static_cast<std::size_t>(size_ + i);
        tree_[k] = rate;
        for (k >>= 1; k >= 1; k >>= 1) tree_[k] = tree_[2 * k] + tree_[2 * k + 1];
    }

    double get(int i) const { return tree_[static_cast<std::size_t>(size_ + i)]; }
    double total() const { return tree_[1]; }

    /// Index of the leaf containing cumulative coordinate u in [0, total).
    int sample(double u) const {
        std::size_t k = 1;
        while (k < static_cast<std::size_t>(size_)) {
            const double left = tree_[2 * k];
            if (u < left) {
                k = 2 * k;
            } else {
                u -= left;
                k = 2 * k + 1;
            }
        }
        int i = static_cast<int>(k) - size_;
        // FP edge: u == total can land on a zero-rate leaf; walk to a live one.
        if (tree_[k] <= 0.0) {
            for (int d = 1; d < n_; ++d) {
                if (i - d >= 0 && get(i - d) > 0.0) return i - d;
                if (i + d < n_ && get(i + d) > 0.0) return i + d;
            }
        }
        return i;
    }

  private:
    int n_;
    int size_;
    std::vector<double> tree_;
};

/// Boundary-driven symmetric exclusion on sites 1..N-1 with densities
/// alpha/beta pinned by reservoir birth-death at the two end sites.  Event x
/// acts on bond {x, x+1}: x=0 flips site 1 (rate N^2/2 * alpha empty,
/// N^2/2 * (1-alpha) occupied), 1<=x<=N-2 exchanges the bond at rate N^2/2
/// when the occupancies differ, x=N-1 flips site N-1 against beta.  Time is
/// macroscopic (the N^2 speedup is inside the rates).
///
/// W[x] counts net rightward crossings of bond x; the lazily flushed
/// occupancy integral accumulates eta(x) dt exactly between flush() calls.
class Kmc {
  public:
    Kmc(int N, double alpha, double beta, std::vector<std::uint8_t> eta, std::uint64_t seed, std::uint64_t replica)
        : N_(N), alpha_(alpha), beta_(beta), lambda_(0.5 * N * N), eta_(std::move(eta)),
          W_(static_cast<std::size_t>(N), 0), occ_(static_cast<std::size_t>(N - 1), 0.0),
          touched_(static_cast<std::size_t>(N - 1), 0.0), tree_(N), rng_(seed, replica) {
        if (N_ < 3) throw std::invalid_argument("Kmc: N must be at least 3");
        if (static_cast<int>(eta_.size()) != N_ - 1) throw std::invalid_argument("Kmc: eta must have N-1 sites");
        for (int x = 0; x < N_; ++x) tree_.set(x, rate_of(x));
    }

    double time() const { return t_; }
    int N() const { return N_; }
    double alpha() const { return alpha_; }
    double beta() const { return beta_; }
    const std::vector<std::uint8_t>& eta() const { return eta_; }
    const std::vector<std::int64_t>& W() const { return W_; }

    /// Exact occupancy-time integrals since the last take_occupancy(); call
    /// flush() first so the integrals extend to the current time.
    const std::vector<double>& occupancy() const { return occ_; }

    void flush() {
        for (int x = 0; x < N_ - 1; ++x) {
            if (eta_[static_cast<std::size_t>(x)]) occ_[static_cast<std::size_t>(x)] += t_ - touched_[static_cast<std::size_t>(x)];
            touched_[static_cast<std::size_t>(x)] = t_;
        }
    }

    std::vector<double> take_occupancy() {
        flush();
        std::vector<double> out = occ_;
        for (auto& v : occ_) v = 0.0;
        return out;
    }

    /// Process all events strictly inside (time, T] and stop at T.
    void advance_to(double T) {
        advance_to(T, [](double, int) {});
    }

    /// on_event(t_event, bond) fires after each executed event.
    template <typename F>
    void advance_to(double T, F&& on_event) {
        while (true) {
            if (!has_pending_) {
                const double R = tree_.total();
                if (R <= 0.0) break;  // absorbing (alpha = beta = 0 or 1 edge states)
                pending_ = t_ + rng_.exponential(R);
                pending_bond_ = tree_.sample(rng_.uniform() * R);
                has_pending_ = true;
            }
            if (pending_ > T) break;
            t_ = pending_;
            execute(pending_bond_);
            has_pending_ = false;
            on_event(t_, pending_bond_);
            if (++events_ % (1ULL << 22) == 0) rebuild();
        }
        t_ = T;
    }

  private:
    double rate_of(int x) const {
        if (x == 0) return eta_[0] ? lambda_ * (1.0 - alpha_) : lambda_ * alpha_;
        if (x == N_ - 1) return eta_[static_cast<std::size_t>(N_ - 2)] ? lambda_ * (1.0 - beta_) : lambda_ * beta_;
        return eta_[static_cast<std::size_t>(x - 1)] != eta_[static_cast<std::size_t>(x)] ? lambda_ : 0.0;
    }

    void touch(int site_index) {  // site_index is 0-based into eta_
        if (eta_[static_cast<std::size_t>(site_index)])
            occ_[static_cast<std::size_t>(site_index)] += t_ - touched_[static_cast<std::size_t>(site_index)];
        touched_[static_cast<std::size_t>(site_index)] = t_;
    }

    void execute(int x) {
        if (x == 0) {
            touch(0);
            eta_[0] ^= 1;
            W_[0] += eta_[0] ? +1 : -1;
        } else if (x == N_ - 1) {
            touch(N_ - 2);
            eta_[static_cast<std::size_t>(N_ - 2)] ^= 1;
            W_[static_cast<std::size_t>(N_ - 1)] += eta_[static_cast<std::size_t>(N_ - 2)] ? -1 : +1;
        } else {
            touch(x - 1);
            touch(x);
            auto& a = eta_[static_cast<std::size_t>(x - 1)];
            auto& b = eta_[static_cast<std::size_t>(x)];
            W_[static_cast<std::size_t>(x)] += a ? +1 : -1;
            std::swap(a, b);
        }
        const int lo = x > 0 ? x - 1 : 0;
        const int hi = x < N_ - 1 ? x + 1 : N_ - 1;
        for (int y = lo; y <= hi; ++y) tree_.set(y, rate_of(y));
    }

    void rebuild() {
        for (int x = 0; x < N_; ++x) tree_.set(x, rate_of(x));
    }

    int N_;
    double alpha_, beta_;
    double lambda_;
    std::vector<std::uint8_t> eta_;
    std::vector<std::int64_t> W_;
    std::vector<double> occ_, touched_;
    RateTree tree_;
    Rng rng_;
    double t_{0.0};
    double pending_{0.0};
    int pending_bond_{-1};
    bool has_pending_{false};
    std::uint64_t events_{0};
};

}  // namespace latgas::sim
