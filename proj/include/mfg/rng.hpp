#pragma once

#include <cstdint>
#include <vector>

// Counter-based random numbers. Every draw is a pure function of
// (seed, stream indices..., counter), so per-agent-per-step streams are
// stable: changing N or T never perturbs draws that both runs share, and
// threaded consumers can partition index ranges without coordination.
namespace mfg::rng {

inline constexpr std::uint64_t golden = 0x9E3779B97F4A7C15ull;

// splitmix64 finalizer; bijective on 64-bit words.
inline std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

inline std::uint64_t derive(std::uint64_t key, std::uint64_t index) {
    return mix(key + golden * (index + 1));
}

inline double to_unit(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;  // [0, 1)
}

// A node in the stream tree. child(i) descends one level; u01(c) reads the
// c-th variate of this node without mutating it.
struct Key {
    std::uint64_t k = 0;

    static Key root(std::uint64_t seed) { return Key{mix(seed)}; }
    Key child(std::uint64_t index) const { return Key{derive(k, index)}; }
    double u01(std::uint64_t counter) const { return to_unit(derive(k, counter)); }
};

// Inverse-CDF draw from a probability row by linear scan. The row is assumed
// normalized; accumulated rounding can leave cdf(last) slightly below 1, so
// the last index absorbs the remainder.
inline int sample_index(const std::vector<double>& prob, double u) {
    double acc = 0.0;
    const int n = static_cast<int>(prob.size());
    for (int i = 0; i < n; ++i) {
        acc += prob[i];
        if (u < acc) return i;
    }
    return n - 1;
}

}  // namespace mfg::rng
