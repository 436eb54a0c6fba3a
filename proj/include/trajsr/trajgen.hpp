#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "trajsr/roadnet.hpp"
#include "trajsr/trajectory.hpp"

namespace trajsr::trajgen {

struct GenConfig {
    geo::BBox bbox;
    int n_traj = 200;
    double speed_mps = 8.0;
    double dt_s = 20.0;
    int max_len = 128;
    uint64_t seed = 0;

    void validate() const;
};

// Walks the path polyline at constant speed, emitting a point every dt_s
// starting at t=0; the path end is appended at its exact arrival time when
// the sampling grid missed it. Interpolation is linear in the graph's local
// frame, which keeps every emitted point on the lat/lon segment.
Trajectory path_to_trajectory(const roadnet::RoadGraph& g, const std::vector<roadnet::NodeId>& path,
                              double speed_mps, double dt_s, const std::string& id);

// OD sampling per the seeded per-trajectory stream: two distinct in-bbox
// nodes, routed by shortest_path, resampled; draws that yield length < 2 or
// > max_len are rejected (budget 1000 draws per trajectory).
std::vector<Trajectory> generate_dataset(const roadnet::RoadGraph& g, const GenConfig& cfg);

// Seeded shuffle, then contiguous split; floor sizes with the remainder
// going to train.
std::array<std::vector<Trajectory>, 3> split_dataset(const std::vector<Trajectory>& trajs,
                                                     double train_ratio, double val_ratio,
                                                     double test_ratio, uint64_t seed);

}  // namespace trajsr::trajgen
