#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace trajsr::rng {

// 64-bit FNV-1a, used to fold stage names into seeds.
inline uint64_t fnv1a64(std::string_view s) {
    uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Stage seed = splitmix of (global seed XOR stage-name hash).
inline uint64_t derive_seed(uint64_t base, std::string_view stage) {
    return splitmix64(base ^ fnv1a64(stage));
}

// Per-item stream within a stage (e.g. one stream per trajectory).
inline uint64_t derive_seed(uint64_t base, uint64_t index) {
    return splitmix64(base ^ splitmix64(index));
}

// Deterministic generator. mt19937_64 is fully specified by the standard;
// the distributions below are hand-rolled because std:: distributions are
// implementation-defined and would break cross-platform reproducibility.
class Rng {
public:
    explicit Rng(uint64_t seed) : eng_(seed) {}

    uint64_t next_u64() { return eng_(); }

    // [0, 1) with 53 random bits.
    double uniform01() { return (next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Inclusive range, unbiased via rejection.
    int64_t uniform_int(int64_t lo, int64_t hi) {
        uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
        if (span == 0) return static_cast<int64_t>(next_u64());  // full range
        uint64_t limit = UINT64_MAX - UINT64_MAX % span;
        uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return lo + static_cast<int64_t>(x % span);
    }

    // Box-Muller, cosine branch only. Two draws per sample keeps the
    // stream position independent of call parity.
    double gaussian() {
        double u1 = 1.0 - uniform01();  // (0, 1], log-safe
        double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.141592653589793238462643383279502884 * u2);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(uniform_int(0, static_cast<int64_t>(i) - 1));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 eng_;
};

}  // namespace trajsr::rng
