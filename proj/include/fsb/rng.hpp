#pragma once

// Splittable RNG streams. Stream derivation rule: stream(seed, idx) seeds a
// mt19937_64 with splitmix64(seed + (idx+1) * 0x9E3779B97F4A7C15). Workers
// (batch elements, sample paths) each own the stream at their index, so
// results do not depend on scheduling order.

#include <cstdint>
#include <random>

namespace fsb {

inline uint64_t splitmix64(uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

class RngStream {
  public:
    RngStream(uint64_t seed, uint64_t stream_index)
        : engine_(splitmix64(seed + (stream_index + 1) * 0x9E3779B97F4A7C15ULL)) {}

    double normal() { return normal_(engine_); }
    double uniform() { return uniform_(engine_); }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    // uniform integer in [lo, hi]
    int64_t uniform_int(int64_t lo, int64_t hi) {
        return std::uniform_int_distribution<int64_t>(lo, hi)(engine_);
    }
    std::mt19937_64& engine() { return engine_; }

  private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace fsb
