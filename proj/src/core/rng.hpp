#pragma once

#include <cstdint>
#include <vector>

namespace sdr {

// Deterministic seed mixing for derived streams (restart k of solve s, ...).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// splitmix64 stream; small, reproducible, good enough for sampling boxes
// and proposal draws.
class SplitMix {
  public:
    explicit SplitMix(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // uniform in [0,1)
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // uniform in [lo,hi)
    double next_in(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

    // uniform integer in [0,n)
    std::uint64_t next_below(std::uint64_t n) { return n ? next_u64() % n : 0; }

  private:
    std::uint64_t state_;
};

// Seeded quasi-random sampler: Halton sequence with a seed-derived index
// offset per stream. Low-discrepancy coverage of the sampling box makes
// hypothesis screens hit growth-regime corners faster than iid draws.
class HaltonSampler {
  public:
    HaltonSampler(int dim, std::uint64_t seed) : dim_(dim), index_(1 + (mix_seed(seed, 0x5d) % 4096)) {}

    // next point in [0,1)^dim
    std::vector<double> next() {
        static const int primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
        std::vector<double> p(dim_);
        for (int k = 0; k < dim_; ++k) p[k] = radical_inverse(index_, primes[k % 12]);
        ++index_;
        return p;
    }

  private:
    static double radical_inverse(std::uint64_t i, int base) {
        double f = 1.0, r = 0.0;
        while (i > 0) {
            f /= base;
            r += f * static_cast<double>(i % base);
            i /= base;
        }
        return r;
    }

    int dim_;
    std::uint64_t index_;
};

}  // namespace sdr
