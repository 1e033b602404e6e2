#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace tilegan {

// Deterministic random source. std::mt19937_64 output is fully specified by
// the standard; the distributions below are hand-rolled on top of it because
// std::uniform_real_distribution / std::normal_distribution are
// implementation-defined and would break byte-identical reruns across
// standard libraries.
class rng {
  public:
    explicit rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // uniform in [0, 1)
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    // uniform in [lo, hi)
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer in [0, n)
    std::uint64_t uniform_index(std::uint64_t n) {
        // rejection sampling keeps the draw unbiased for any n
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v;
        do {
            v = engine_();
        } while (v >= limit);
        return v % n;
    }

    int uniform_int(int lo, int hi_inclusive) {
        return lo + static_cast<int>(uniform_index(
                        static_cast<std::uint64_t>(hi_inclusive - lo + 1)));
    }

    // standard normal via Box-Muller; caches the second draw
    double normal() {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 2.0 * std::numbers::pi * u2;
        cached_ = r * std::sin(t);
        has_cached_ = true;
        return r * std::cos(t);
    }

    bool bernoulli(double p) { return uniform() < p; }

    // seed of an independent stream derived from (seed, stream id); lets
    // per-sample work stay deterministic regardless of evaluation order
    static std::uint64_t substream_seed(std::uint64_t seed,
                                        std::uint64_t stream) {
        // splitmix64 hash of (seed, stream)
        std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    static rng substream(std::uint64_t seed, std::uint64_t stream) {
        return rng(substream_seed(seed, stream));
    }

  private:
    std::mt19937_64 engine_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

}  // namespace tilegan
