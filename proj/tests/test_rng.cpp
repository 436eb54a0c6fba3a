#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "trajsr/rng.hpp"

using namespace trajsr;

TEST_CASE("derive_seed: stage names and indices give distinct, stable streams") {
    uint64_t base = 42;
    CHECK(rng::derive_seed(base, "gen") == rng::derive_seed(base, "gen"));
    CHECK(rng::derive_seed(base, "gen") != rng::derive_seed(base, "train"));
    CHECK(rng::derive_seed(base, uint64_t{0}) != rng::derive_seed(base, uint64_t{1}));
    CHECK(rng::derive_seed(base, "gen") != rng::derive_seed(base + 1, "gen"));
}

TEST_CASE("Rng: determinism for equal seeds") {
    rng::Rng a(9), b(9);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("Rng: uniform01 stays in [0, 1) and fills the range") {
    rng::Rng r(1);
    double lo = 1.0, hi = 0.0;
    for (int i = 0; i < 10000; ++i) {
        double x = r.uniform01();
        CHECK(x >= 0.0);
        CHECK(x < 1.0);
        lo = std::min(lo, x);
        hi = std::max(hi, x);
    }
    CHECK(lo < 0.01);
    CHECK(hi > 0.99);
}

TEST_CASE("Rng: uniform_int covers the inclusive range") {
    rng::Rng r(2);
    std::vector<int> seen(5, 0);
    for (int i = 0; i < 5000; ++i) {
        int64_t v = r.uniform_int(10, 14);
        CHECK(v >= 10);
        CHECK(v <= 14);
        ++seen[static_cast<size_t>(v - 10)];
    }
    for (int count : seen) CHECK(count > 800);
}

TEST_CASE("Rng: gaussian moments are roughly standard") {
    rng::Rng r(3);
    int n = 50000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
        double x = r.gaussian();
        sum += x;
        sum2 += x * x;
    }
    double mean = sum / n;
    double var = sum2 / n - mean * mean;
    CHECK(std::fabs(mean) < 0.02);
    CHECK(std::fabs(var - 1.0) < 0.03);
}

TEST_CASE("Rng: shuffle is a permutation and is seed-stable") {
    std::vector<int> v1{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    std::vector<int> v2 = v1;
    rng::Rng a(4), b(4);
    a.shuffle(v1);
    b.shuffle(v2);
    CHECK(v1 == v2);
    std::vector<int> sorted = v1;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
}
