#pragma once

#include <string>
#include <vector>

#include "trajsr/geo.hpp"

namespace trajsr {

struct TrajPoint {
    geo::GeoPoint pos;
    double t = 0.0;  // seconds since trajectory start

    friend bool operator==(const TrajPoint&, const TrajPoint&) = default;
};

// Time-ordered GPS trace. The unit of data flowing through every stage.
struct Trajectory {
    std::string id;
    std::vector<TrajPoint> points;

    size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }

    friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

geo::BBox bbox_of(const std::vector<Trajectory>& trajs);

}  // namespace trajsr
