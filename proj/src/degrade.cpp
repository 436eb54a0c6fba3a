#include "trajsr/degrade.hpp"

#include <cmath>
#include <iostream>
#include <stdexcept>

#include "trajsr/rng.hpp"

namespace trajsr::degrade {

namespace {
const double kSqrt3 = std::sqrt(3.0);
}

CellId hex_cell_of(const HexGrid& grid, const geo::GeoPoint& p) {
    if (!(grid.edge_len_m > 0.0)) throw std::invalid_argument("hex grid: edge_len_m must be > 0");
    auto [x, y] = geo::to_local(grid.frame, p);
    // fractional axial coordinates, then cube rounding
    double q = (kSqrt3 / 3.0 * x - 1.0 / 3.0 * y) / grid.edge_len_m;
    double r = (2.0 / 3.0 * y) / grid.edge_len_m;
    double cx = q, cz = r, cy = -cx - cz;
    double rx = std::round(cx), ry = std::round(cy), rz = std::round(cz);
    double dx = std::abs(rx - cx), dy = std::abs(ry - cy), dz = std::abs(rz - cz);
    if (dx > dy && dx > dz) {
        rx = -ry - rz;
    } else if (dy > dz) {
        ry = -rx - rz;
    } else {
        rz = -rx - ry;
    }
    return CellId{static_cast<int64_t>(rx), static_cast<int64_t>(rz)};
}

geo::GeoPoint cell_center(const HexGrid& grid, const CellId& c) {
    if (!(grid.edge_len_m > 0.0)) throw std::invalid_argument("hex grid: edge_len_m must be > 0");
    double x = grid.edge_len_m * kSqrt3 * (static_cast<double>(c.q) + static_cast<double>(c.r) / 2.0);
    double y = grid.edge_len_m * 1.5 * static_cast<double>(c.r);
    return geo::from_local(grid.frame, x, y);
}

Trajectory truncate_trajectory(const HexGrid& grid, const Trajectory& traj) {
    Trajectory out{traj.id, {}};
    out.points.reserve(traj.points.size());
    for (const auto& p : traj.points) {
        out.points.push_back(TrajPoint{cell_center(grid, hex_cell_of(grid, p.pos)), p.t});
    }
    return out;
}

Trajectory round_coords(const Trajectory& traj, int decimals) {
    if (decimals < 0 || decimals > 9) {
        throw std::invalid_argument("round_coords: decimals must be in [0, 9]");
    }
    double scale = std::pow(10.0, decimals);
    Trajectory out{traj.id, {}};
    out.points.reserve(traj.points.size());
    for (const auto& p : traj.points) {
        out.points.push_back(TrajPoint{{std::round(p.pos.lat * scale) / scale,
                                        std::round(p.pos.lon * scale) / scale},
                                       p.t});
    }
    return out;
}

Trajectory add_noise(const Trajectory& traj, double sigma_m, uint64_t seed) {
    if (sigma_m < 0.0) throw std::invalid_argument("add_noise: sigma_m must be >= 0");
    if (sigma_m == 0.0) return traj;
    rng::Rng r(seed);
    Trajectory out{traj.id, {}};
    out.points.reserve(traj.points.size());
    for (const auto& p : traj.points) {
        double dx = r.gaussian() * sigma_m;
        double dy = r.gaussian() * sigma_m;
        double mpd_lon = geo::kMetersPerDegLat * std::cos(p.pos.lat * geo::kPi / 180.0);
        out.points.push_back(
            TrajPoint{{p.pos.lat + dy / geo::kMetersPerDegLat, p.pos.lon + dx / mpd_lon}, p.t});
    }
    return out;
}

NormStats fit_norm_stats(const std::vector<Trajectory>& trajs) {
    size_t n = 0;
    double sum[3] = {0, 0, 0};
    for (const auto& tr : trajs) {
        for (const auto& p : tr.points) {
            sum[0] += p.pos.lat;
            sum[1] += p.pos.lon;
            sum[2] += p.t;
            ++n;
        }
    }
    if (n < 2) throw std::invalid_argument("fit_norm_stats: need at least 2 points");
    double mean[3] = {sum[0] / n, sum[1] / n, sum[2] / n};
    double ss[3] = {0, 0, 0};
    for (const auto& tr : trajs) {
        for (const auto& p : tr.points) {
            double d0 = p.pos.lat - mean[0];
            double d1 = p.pos.lon - mean[1];
            double d2 = p.t - mean[2];
            ss[0] += d0 * d0;
            ss[1] += d1 * d1;
            ss[2] += d2 * d2;
        }
    }
    double stdv[3];
    for (int c = 0; c < 3; ++c) {
        stdv[c] = std::sqrt(ss[c] / static_cast<double>(n));
        if (stdv[c] < 1e-12) {
            std::cerr << "warning: constant channel " << c << " in normalization fit, std floored\n";
            stdv[c] = 1e-12;
        }
    }
    return NormStats{mean[0], stdv[0], mean[1], stdv[1], mean[2], stdv[2]};
}

std::vector<std::array<double, 3>> normalize(const Trajectory& traj, const NormStats& s) {
    std::vector<std::array<double, 3>> out;
    out.reserve(traj.points.size());
    for (const auto& p : traj.points) {
        out.push_back({(p.pos.lat - s.mean_lat) / s.std_lat, (p.pos.lon - s.mean_lon) / s.std_lon,
                       (p.t - s.mean_t) / s.std_t});
    }
    return out;
}

std::vector<geo::GeoPoint> denormalize(const std::vector<std::array<double, 2>>& values,
                                       const NormStats& s) {
    std::vector<geo::GeoPoint> out;
    out.reserve(values.size());
    for (const auto& v : values) {
        out.push_back(geo::GeoPoint{v[0] * s.std_lat + s.mean_lat, v[1] * s.std_lon + s.mean_lon});
    }
    return out;
}

double resolution_edge_len(int level) {
    switch (level) {
        case 5: return 8540.0;
        case 6: return 3230.0;
        case 7: return 1220.0;
        case 8: return 461.0;
        case 9: return 174.0;
        default:
            throw std::invalid_argument("resolution_edge_len: level must be in [5, 9], got " +
                                        std::to_string(level));
    }
}

}  // namespace trajsr::degrade
