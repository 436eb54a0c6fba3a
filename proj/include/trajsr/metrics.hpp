#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "trajsr/trajectory.hpp"

namespace trajsr::metrics {

// Discrete Fréchet distance with haversine point cost:
//   c(i,j) = max(d(a_i, b_j), min(c(i-1,j), c(i,j-1), c(i-1,j-1))).
double discrete_frechet_km(const Trajectory& a, const Trajectory& b);

// Classic DTW, sum aggregation, same point cost.
double dtw_km(const Trajectory& a, const Trajectory& b);

struct EvalReport {
    std::string label;
    std::vector<double> frechet_km;   // per pair, input order
    double mean_km = 0.0;
    double median_km = 0.0;           // nearest-rank p50
    double p85_km = 0.0;              // nearest-rank p85
    std::vector<double> bin_edges_km; // ascending; last may be +inf
    std::vector<size_t> counts;       // bin_edges_km.size() - 1 half-open bins
};

// Nearest-rank percentile: ceil(p/100 * n)-th smallest value.
double percentile_nearest_rank(std::vector<double> values, double p);

// 0, 0.1, ..., 2.0 km plus an overflow bin to +inf.
std::vector<double> default_bins();

// Fréchet distance per (candidate, reference) pair plus summary stats and a
// histogram over half-open bins [e_k, e_k+1). Out-of-range values are
// clamped into the end bins so counts always sum to the pair count.
EvalReport evaluate(const std::vector<std::pair<Trajectory, Trajectory>>& pairs,
                    const std::vector<double>& bin_edges_km, const std::string& label);

std::string to_json(const EvalReport& report);
EvalReport report_from_json(const std::string& text);

std::string csv_header();
std::string to_csv_row(const EvalReport& report);  // label,mean,median,p85,n

}  // namespace trajsr::metrics
