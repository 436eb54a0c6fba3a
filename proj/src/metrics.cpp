#include "trajsr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "trajsr/geo.hpp"
#include "trajsr/parallel.hpp"

#include <json.hpp>

namespace trajsr::metrics {

double discrete_frechet_km(const Trajectory& a, const Trajectory& b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("discrete_frechet_km: empty trajectory");
    size_t n = a.size();
    size_t m = b.size();
    // Rolling row keeps it O(min extra space); c(i,j) depends on row i-1 and c(i,j-1).
    std::vector<double> prev(m), cur(m);
    for (size_t j = 0; j < m; ++j) {
        double d = geo::haversine_km(a.points[0].pos, b.points[j].pos);
        prev[j] = j == 0 ? d : std::max(prev[j - 1], d);
    }
    for (size_t i = 1; i < n; ++i) {
        for (size_t j = 0; j < m; ++j) {
            double d = geo::haversine_km(a.points[i].pos, b.points[j].pos);
            double reach;
            if (j == 0) {
                reach = prev[0];
            } else {
                reach = std::min(prev[j], std::min(cur[j - 1], prev[j - 1]));
            }
            cur[j] = std::max(d, reach);
        }
        std::swap(prev, cur);
    }
    return prev[m - 1];
}

double dtw_km(const Trajectory& a, const Trajectory& b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("dtw_km: empty trajectory");
    size_t n = a.size();
    size_t m = b.size();
    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<double> prev(m + 1, kInf), cur(m + 1, kInf);
    prev[0] = 0.0;
    for (size_t i = 1; i <= n; ++i) {
        cur[0] = kInf;
        for (size_t j = 1; j <= m; ++j) {
            double d = geo::haversine_km(a.points[i - 1].pos, b.points[j - 1].pos);
            cur[j] = d + std::min(prev[j], std::min(cur[j - 1], prev[j - 1]));
        }
        std::swap(prev, cur);
    }
    return prev[m];
}

double percentile_nearest_rank(std::vector<double> values, double p) {
    if (values.empty()) throw std::invalid_argument("percentile_nearest_rank: empty input");
    if (!(p > 0.0 && p <= 100.0)) throw std::invalid_argument("percentile_nearest_rank: p must be in (0, 100]");
    std::sort(values.begin(), values.end());
    size_t rank = static_cast<size_t>(std::ceil(p / 100.0 * static_cast<double>(values.size())));
    if (rank == 0) rank = 1;
    return values[rank - 1];
}

std::vector<double> default_bins() {
    std::vector<double> edges;
    for (int i = 0; i <= 20; ++i) edges.push_back(static_cast<double>(i) * 0.1);
    edges.push_back(std::numeric_limits<double>::infinity());
    return edges;
}

EvalReport evaluate(const std::vector<std::pair<Trajectory, Trajectory>>& pairs,
                    const std::vector<double>& bin_edges_km, const std::string& label) {
    if (pairs.empty()) throw std::invalid_argument("evaluate: no pairs");
    if (bin_edges_km.size() < 2) throw std::invalid_argument("evaluate: need at least two bin edges");
    for (size_t i = 1; i < bin_edges_km.size(); ++i) {
        if (!(bin_edges_km[i] > bin_edges_km[i - 1]))
            throw std::invalid_argument("evaluate: bin edges must be strictly increasing");
    }

    EvalReport report;
    report.label = label;
    report.bin_edges_km = bin_edges_km;
    report.frechet_km.assign(pairs.size(), 0.0);
    par::parallel_for(pairs.size(), [&](size_t i) {
        report.frechet_km[i] = discrete_frechet_km(pairs[i].first, pairs[i].second);
    });

    double sum = 0.0;
    for (double d : report.frechet_km) sum += d;
    report.mean_km = sum / static_cast<double>(pairs.size());
    report.median_km = percentile_nearest_rank(report.frechet_km, 50.0);
    report.p85_km = percentile_nearest_rank(report.frechet_km, 85.0);

    report.counts.assign(bin_edges_km.size() - 1, 0);
    for (double d : report.frechet_km) {
        auto it = std::upper_bound(bin_edges_km.begin(), bin_edges_km.end(), d);
        size_t bin;
        if (it == bin_edges_km.begin()) {
            bin = 0;  // below the first edge
        } else {
            bin = static_cast<size_t>(it - bin_edges_km.begin()) - 1;
            if (bin >= report.counts.size()) bin = report.counts.size() - 1;  // at or past the last edge
        }
        ++report.counts[bin];
    }
    return report;
}

namespace {

nlohmann::ordered_json edge_to_json(double e) {
    if (std::isinf(e)) return "inf";
    return e;
}

double edge_from_json(const nlohmann::json& j) {
    if (j.is_string()) {
        if (j.get<std::string>() == "inf") return std::numeric_limits<double>::infinity();
        throw std::invalid_argument("EvalReport: bad bin edge \"" + j.get<std::string>() + "\"");
    }
    return j.get<double>();
}

}  // namespace

std::string to_json(const EvalReport& report) {
    nlohmann::ordered_json j;
    j["label"] = report.label;
    j["n"] = report.frechet_km.size();
    j["mean_km"] = report.mean_km;
    j["median_km"] = report.median_km;
    j["p85_km"] = report.p85_km;
    j["frechet_km"] = report.frechet_km;
    nlohmann::ordered_json edges = nlohmann::ordered_json::array();
    for (double e : report.bin_edges_km) edges.push_back(edge_to_json(e));
    j["bin_edges_km"] = edges;
    j["counts"] = report.counts;
    return j.dump(2) + "\n";
}

EvalReport report_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("EvalReport: bad JSON: ") + e.what());
    }
    EvalReport report;
    try {
        report.label = j.at("label").get<std::string>();
        report.frechet_km = j.at("frechet_km").get<std::vector<double>>();
        report.mean_km = j.at("mean_km").get<double>();
        report.median_km = j.at("median_km").get<double>();
        report.p85_km = j.at("p85_km").get<double>();
        for (const auto& e : j.at("bin_edges_km")) report.bin_edges_km.push_back(edge_from_json(e));
        report.counts = j.at("counts").get<std::vector<size_t>>();
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("EvalReport: missing field: ") + e.what());
    }
    return report;
}

std::string csv_header() { return "label,mean_km,median_km,p85_km,n"; }

std::string to_csv_row(const EvalReport& report) {
    char buf[128];
    std::snprintf(buf, sizeof buf, ",%.6f,%.6f,%.6f,%zu", report.mean_km, report.median_km,
                  report.p85_km, report.frechet_km.size());
    return report.label + buf;
}

}  // namespace trajsr::metrics
