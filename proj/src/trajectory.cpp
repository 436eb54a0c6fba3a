#include "trajsr/trajectory.hpp"

#include <algorithm>
#include <stdexcept>

namespace trajsr {

geo::BBox bbox_of(const std::vector<Trajectory>& trajs) {
    bool any = false;
    geo::BBox b{{90.0, 180.0}, {-90.0, -180.0}};
    for (const auto& tr : trajs) {
        for (const auto& p : tr.points) {
            any = true;
            b.lo.lat = std::min(b.lo.lat, p.pos.lat);
            b.lo.lon = std::min(b.lo.lon, p.pos.lon);
            b.hi.lat = std::max(b.hi.lat, p.pos.lat);
            b.hi.lon = std::max(b.hi.lon, p.pos.lon);
        }
    }
    if (!any) throw std::invalid_argument("bbox_of: no points");
    return b;
}

}  // namespace trajsr
