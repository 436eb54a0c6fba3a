#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "trajsr/geo.hpp"
#include "trajsr/metrics.hpp"
#include "trajsr/rng.hpp"

using namespace trajsr;

namespace {

const double kDegPerKm = 180.0 / (geo::kPi * geo::kEarthRadiusKm);
const double kInf = std::numeric_limits<double>::infinity();

Trajectory random_traj(rng::Rng& r, size_t n) {
    Trajectory tr{"t", {}};
    for (size_t i = 0; i < n; ++i) {
        tr.points.push_back(TrajPoint{{r.uniform01() * 0.05, r.uniform01() * 0.05}, 10.0 * i});
    }
    return tr;
}

std::vector<std::vector<double>> cost_matrix(const Trajectory& a, const Trajectory& b) {
    std::vector<std::vector<double>> c(a.points.size(), std::vector<double>(b.points.size()));
    for (size_t i = 0; i < a.points.size(); ++i) {
        for (size_t j = 0; j < b.points.size(); ++j) {
            c[i][j] = geo::haversine_km(a.points[i].pos, b.points[j].pos);
        }
    }
    return c;
}

// oracle: exhaustive enumeration of all monotone couplings, minimizing the max
void frechet_enum(const std::vector<std::vector<double>>& c, size_t i, size_t j, double acc,
                  double& best) {
    acc = std::max(acc, c[i][j]);
    if (acc >= best) return;
    if (i + 1 == c.size() && j + 1 == c[0].size()) {
        best = acc;
        return;
    }
    if (i + 1 < c.size()) frechet_enum(c, i + 1, j, acc, best);
    if (j + 1 < c[0].size()) frechet_enum(c, i, j + 1, acc, best);
    if (i + 1 < c.size() && j + 1 < c[0].size()) frechet_enum(c, i + 1, j + 1, acc, best);
}

double frechet_bruteforce(const Trajectory& a, const Trajectory& b) {
    auto c = cost_matrix(a, b);
    double best = kInf;
    frechet_enum(c, 0, 0, 0.0, best);
    return best;
}

// oracle: exhaustive enumeration minimizing the sum (classic DTW)
void dtw_enum(const std::vector<std::vector<double>>& c, size_t i, size_t j, double acc,
              double& best) {
    acc += c[i][j];
    if (acc >= best) return;
    if (i + 1 == c.size() && j + 1 == c[0].size()) {
        best = acc;
        return;
    }
    if (i + 1 < c.size()) dtw_enum(c, i + 1, j, acc, best);
    if (j + 1 < c[0].size()) dtw_enum(c, i, j + 1, acc, best);
    if (i + 1 < c.size() && j + 1 < c[0].size()) dtw_enum(c, i + 1, j + 1, acc, best);
}

double dtw_bruteforce(const Trajectory& a, const Trajectory& b) {
    auto c = cost_matrix(a, b);
    double best = kInf;
    dtw_enum(c, 0, 0, 0.0, best);
    return best;
}

// two parallel east-west 2-point segments, offset north by `offset_km`
std::pair<Trajectory, Trajectory> parallel_segments(double offset_km) {
    Trajectory a{"a", {{{0.0, 0.0}, 0.0}, {{0.0, 0.02}, 10.0}}};
    Trajectory b{"b",
                 {{{offset_km * kDegPerKm, 0.0}, 0.0}, {{offset_km * kDegPerKm, 0.02}, 10.0}}};
    return {a, b};
}

}  // namespace

TEST_CASE("discrete_frechet_km: identical and analytic cases") {
    rng::Rng r(3);
    Trajectory a = random_traj(r, 7);
    CHECK(metrics::discrete_frechet_km(a, a) == 0.0);

    for (double d : {0.5, 1.0, 2.5}) {
        auto [p, q] = parallel_segments(d);
        CHECK(metrics::discrete_frechet_km(p, q) == doctest::Approx(d).epsilon(1e-9));
    }

    CHECK_THROWS_AS(metrics::discrete_frechet_km(Trajectory{"e", {}}, a), std::invalid_argument);
    CHECK_THROWS_AS(metrics::discrete_frechet_km(a, Trajectory{"e", {}}), std::invalid_argument);
}

TEST_CASE("discrete_frechet_km: matches exhaustive coupling enumeration") {
    rng::Rng r(41);
    for (int trial = 0; trial < 60; ++trial) {
        Trajectory a = random_traj(r, size_t(r.uniform_int(1, 8)));
        Trajectory b = random_traj(r, size_t(r.uniform_int(1, 8)));
        double dp = metrics::discrete_frechet_km(a, b);
        double brute = frechet_bruteforce(a, b);
        CHECK(std::abs(dp - brute) <= 1e-12);
        CHECK(std::abs(dp - metrics::discrete_frechet_km(b, a)) <= 1e-12);  // symmetric
    }
}

TEST_CASE("discrete_frechet_km: lower bound and duplication invariance") {
    rng::Rng r(59);
    for (int trial = 0; trial < 30; ++trial) {
        Trajectory a = random_traj(r, 6);
        Trajectory b = random_traj(r, 5);
        double f = metrics::discrete_frechet_km(a, b);

        double lower = 0.0;
        for (const auto& pa : a.points) {
            double mn = kInf;
            for (const auto& pb : b.points) mn = std::min(mn, geo::haversine_km(pa.pos, pb.pos));
            lower = std::max(lower, mn);
        }
        CHECK(f >= lower - 1e-12);

        // duplicating any single point changes nothing
        for (size_t k = 0; k < a.points.size(); ++k) {
            Trajectory dup = a;
            dup.points.insert(dup.points.begin() + k, a.points[k]);
            CHECK(std::abs(metrics::discrete_frechet_km(dup, b) - f) <= 1e-12);
        }
    }
}

TEST_CASE("dtw_km: identities and exhaustive oracle") {
    rng::Rng r(67);
    Trajectory a = random_traj(r, 6);
    CHECK(metrics::dtw_km(a, a) == 0.0);

    Trajectory p{"p", {{{0.0, 0.0}, 0.0}}};
    Trajectory q{"q", {{{0.01, 0.02}, 0.0}}};
    CHECK(metrics::dtw_km(p, q) == geo::haversine_km(p.points[0].pos, q.points[0].pos));

    for (int trial = 0; trial < 60; ++trial) {
        Trajectory x = random_traj(r, size_t(r.uniform_int(1, 6)));
        Trajectory y = random_traj(r, size_t(r.uniform_int(1, 6)));
        double dp = metrics::dtw_km(x, y);
        CHECK(dp >= 0.0);
        CHECK(std::abs(dp - dtw_bruteforce(x, y)) <= 1e-12);
        CHECK(std::abs(dp - metrics::dtw_km(y, x)) <= 1e-12);
    }
    CHECK_THROWS_AS(metrics::dtw_km(Trajectory{"e", {}}, a), std::invalid_argument);
}

TEST_CASE("percentile_nearest_rank") {
    CHECK(metrics::percentile_nearest_rank({3.0, 1.0, 2.0}, 50) == 2.0);
    CHECK(metrics::percentile_nearest_rank({3.0, 1.0, 2.0}, 100) == 3.0);
    CHECK(metrics::percentile_nearest_rank({5.0}, 85) == 5.0);
    // 20 values 1..20: ceil(0.85*20) = 17th smallest
    std::vector<double> v;
    for (int i = 20; i >= 1; --i) v.push_back(double(i));
    CHECK(metrics::percentile_nearest_rank(v, 85) == 17.0);
    CHECK(metrics::percentile_nearest_rank(v, 50) == 10.0);
}

TEST_CASE("default_bins: 0 to 2 km by 0.1 plus overflow") {
    auto bins = metrics::default_bins();
    REQUIRE(bins.size() == 22);
    CHECK(bins.front() == 0.0);
    for (int i = 0; i <= 20; ++i) CHECK(bins[size_t(i)] == doctest::Approx(0.1 * i).epsilon(1e-12));
    CHECK(std::isinf(bins.back()));
    CHECK(std::is_sorted(bins.begin(), bins.end()));
}

TEST_CASE("evaluate: identical pairs, arithmetic mean, histogram clamping") {
    rng::Rng r(83);
    Trajectory t = random_traj(r, 9);
    std::vector<std::pair<Trajectory, Trajectory>> same{{t, t}, {t, t}, {t, t}};
    auto rep = metrics::evaluate(same, metrics::default_bins(), "self");
    CHECK(rep.label == "self");
    CHECK(rep.mean_km == 0.0);
    CHECK(rep.median_km == 0.0);
    CHECK(rep.p85_km == 0.0);
    REQUIRE(rep.counts.size() == 21);
    CHECK(rep.counts[0] == 3);
    for (size_t i = 1; i < rep.counts.size(); ++i) CHECK(rep.counts[i] == 0);

    // controlled distances 1.05, 2.05, 3.05 km -> mean 2.05; the last overflows
    // into the final bin (mid-bin values keep the histogram robust to rounding)
    std::vector<std::pair<Trajectory, Trajectory>> pairs;
    for (double d : {1.05, 2.05, 3.05}) {
        auto [a, b] = parallel_segments(d);
        pairs.push_back({a, b});
    }
    auto rep2 = metrics::evaluate(pairs, metrics::default_bins(), "offsets");
    REQUIRE(rep2.frechet_km.size() == 3);
    CHECK(rep2.frechet_km[0] == doctest::Approx(1.05).epsilon(1e-9));
    CHECK(rep2.mean_km == doctest::Approx(2.05).epsilon(1e-9));
    CHECK(rep2.median_km == doctest::Approx(2.05).epsilon(1e-9));
    CHECK(rep2.p85_km == doctest::Approx(3.05).epsilon(1e-9));
    size_t total = 0;
    for (size_t c : rep2.counts) total += c;
    CHECK(total == 3);
    CHECK(rep2.counts[10] == 1);      // 1.05 km lands in [1.0, 1.1)
    CHECK(rep2.counts[20] == 2);      // 2.05 and 3.05 both land in [2.0, inf)

    // distances below the first edge clamp into the first bin
    auto [a, b] = parallel_segments(0.5);
    auto rep3 = metrics::evaluate({{a, b}}, {1.0, 2.0}, "low");
    REQUIRE(rep3.counts.size() == 1);
    CHECK(rep3.counts[0] == 1);

    CHECK_THROWS_AS(metrics::evaluate({}, metrics::default_bins(), "x"), std::invalid_argument);
    CHECK_THROWS_AS(metrics::evaluate(same, {2.0, 1.0}, "x"), std::invalid_argument);
}

TEST_CASE("EvalReport: JSON round trip including the infinite edge") {
    rng::Rng r(97);
    std::vector<std::pair<Trajectory, Trajectory>> pairs;
    for (int i = 0; i < 5; ++i) {
        auto [a, b] = parallel_segments(0.2 + 0.3 * i);
        pairs.push_back({a, b});
    }
    auto rep = metrics::evaluate(pairs, metrics::default_bins(), "round-trip");
    std::string json = to_json(rep);
    CHECK(json.find("\"inf\"") != std::string::npos);
    auto back = metrics::report_from_json(json);
    CHECK(back.label == rep.label);
    CHECK(back.frechet_km == rep.frechet_km);
    CHECK(back.mean_km == rep.mean_km);
    CHECK(back.median_km == rep.median_km);
    CHECK(back.p85_km == rep.p85_km);
    REQUIRE(back.bin_edges_km.size() == rep.bin_edges_km.size());
    for (size_t i = 0; i + 1 < back.bin_edges_km.size(); ++i) {
        CHECK(back.bin_edges_km[i] == rep.bin_edges_km[i]);
    }
    CHECK(std::isinf(back.bin_edges_km.back()));
    CHECK(back.counts == rep.counts);
    // serialization is stable
    CHECK(to_json(back) == json);
}

TEST_CASE("EvalReport: CSV table with published summary figures") {
    metrics::EvalReport lstm, mm, proposed;
    lstm.label = "lstm";
    lstm.mean_km = 0.498;
    lstm.median_km = 0.41;
    lstm.p85_km = 0.9;
    lstm.frechet_km.assign(10, 0.498);
    mm.label = "mapmatch";
    mm.mean_km = 0.632;
    mm.median_km = 0.6;
    mm.p85_km = 1.1;
    mm.frechet_km.assign(10, 0.632);
    proposed.label = "reconstructed";
    proposed.mean_km = 0.198;
    proposed.median_km = 0.15;
    proposed.p85_km = 0.35;
    proposed.frechet_km.assign(10, 0.198);

    CHECK(metrics::csv_header() == "label,mean_km,median_km,p85_km,n");
    CHECK(metrics::to_csv_row(lstm) == "lstm,0.498000,0.410000,0.900000,10");
    CHECK(metrics::to_csv_row(mm) == "mapmatch,0.632000,0.600000,1.100000,10");
    CHECK(metrics::to_csv_row(proposed) == "reconstructed,0.198000,0.150000,0.350000,10");
}
