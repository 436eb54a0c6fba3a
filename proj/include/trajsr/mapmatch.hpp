#pragma once

#include <vector>

#include "trajsr/roadnet.hpp"
#include "trajsr/trajectory.hpp"

namespace trajsr::mapmatch {

struct HmmParams {
    double sigma_m = 10.0;             // emission (GPS noise) std
    double beta_m = 200.0;             // transition discrepancy scale
    double candidate_radius_m = 1000.0;
    int max_candidates = 8;

    void validate() const;
};

struct EdgeRef {
    roadnet::NodeId u = 0;  // u < v
    roadnet::NodeId v = 0;

    friend bool operator==(const EdgeRef&, const EdgeRef&) = default;
};

struct MatchResult {
    Trajectory matched;           // projection points, input id and timestamps
    std::vector<EdgeRef> edges;   // matched edge per point
};

// HMM map matching, Newson–Krumm style: Gaussian emission on projection
// distance, exponential transition on |route − great-circle| discrepancy,
// log-domain Viterbi. Ties resolve toward the candidate with smaller
// emission distance, then the smaller (u, v) edge pair.
MatchResult map_match_detailed(const roadnet::RoadGraph& g, const Trajectory& traj,
                               const HmmParams& params);

Trajectory map_match(const roadnet::RoadGraph& g, const Trajectory& traj, const HmmParams& params);

}  // namespace trajsr::mapmatch
