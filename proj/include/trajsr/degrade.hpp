#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "trajsr/geo.hpp"
#include "trajsr/trajectory.hpp"

namespace trajsr::degrade {

// Planar pointy-top axial hexagonal lattice anchored at the frame origin.
// Stands in for H3 snapping: same snap-to-center semantics, displacement
// bounded by the cell circumradius (= edge length), without the icosahedral
// projection or hierarchy.
struct HexGrid {
    geo::LocalFrame frame;
    double edge_len_m = 0.0;
};

struct CellId {
    int64_t q = 0;
    int64_t r = 0;

    friend bool operator==(const CellId&, const CellId&) = default;
};

CellId hex_cell_of(const HexGrid& grid, const geo::GeoPoint& p);
geo::GeoPoint cell_center(const HexGrid& grid, const CellId& c);

// Snap every point to its cell center. Length, order, timestamps, id kept.
Trajectory truncate_trajectory(const HexGrid& grid, const Trajectory& traj);

// Half-away-from-zero rounding of lat/lon to `decimals` places.
Trajectory round_coords(const Trajectory& traj, int decimals);

// Independent zero-mean Gaussian offsets of std sigma_m, applied in meters
// at each point's own latitude scale.
Trajectory add_noise(const Trajectory& traj, double sigma_m, uint64_t seed);

struct NormStats {
    double mean_lat = 0.0, std_lat = 1.0;
    double mean_lon = 0.0, std_lon = 1.0;
    double mean_t = 0.0, std_t = 1.0;
};

NormStats fit_norm_stats(const std::vector<Trajectory>& trajs);
// (lat, lon, t) -> z-scores per channel.
std::vector<std::array<double, 3>> normalize(const Trajectory& traj, const NormStats& s);
// Inverse for the lat/lon channels.
std::vector<geo::GeoPoint> denormalize(const std::vector<std::array<double, 2>>& values,
                                       const NormStats& s);

// Average H3 hexagon edge length (meters) by resolution level, rounded to
// three significant figures from the reference resolution table.
double resolution_edge_len(int level);

}  // namespace trajsr::degrade
