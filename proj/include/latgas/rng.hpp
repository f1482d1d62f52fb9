#pragma once

#include <cmath>
#include <cstdint>

namespace latgas {

/// xoshiro256++ with splitmix64 seeding.  Hand-rolled so that streams are
/// bit-identical across platforms and standard libraries (std distributions
/// are implementation-defined).
///
/// Stream derivation: replica r of run seed s seeds splitmix64 with
/// s XOR (r+1)*0x9E3779B97F4A7C15 and draws the four state words from it.
/// Distinct (s, r) pairs give independent streams for all r below 2^32.
class Rng {
  public:
    Rng() : Rng(0, 0) {}
    Rng(std::uint64_t seed, std::uint64_t replica) {
        std::uint64_t x = seed ^ ((replica + 1) * 0x9E3779B97F4A7C15ULL);
        for (auto& w : state_) w = splitmix64(x);
        // All-zero state is invalid for xoshiro; splitmix64 of any input
        // yields it with negligible probability, guard anyway.
        if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform on [0,1) with 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform on [0,1): never exactly 0 (safe as a log argument).
    double uniform_pos() {
        double u;
        do {
            u = uniform();
        } while (u == 0.0);
        return u;
    }

    /// Exponential with the given rate (mean 1/rate).
    double exponential(double rate) { return -std::log(uniform_pos()) / rate; }

    bool bernoulli(double p) { return uniform() < p; }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    static std::uint64_t splitmix64(std::uint64_t& x) {
        std::uint64_t z = (x += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_[4];
};

}  // namespace latgas
