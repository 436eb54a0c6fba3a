#include "trajsr/geo.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace trajsr::geo {

namespace {
constexpr double deg2rad(double d) { return d * kPi / 180.0; }
}  // namespace

bool is_valid(const GeoPoint& p) {
    return std::isfinite(p.lat) && std::isfinite(p.lon) && p.lat >= -90.0 && p.lat <= 90.0 &&
           p.lon >= -180.0 && p.lon <= 180.0;
}

void require_valid(const GeoPoint& p, const char* what) {
    if (!is_valid(p)) {
        throw std::invalid_argument(std::string(what) + ": invalid point (lat=" +
                                    std::to_string(p.lat) + ", lon=" + std::to_string(p.lon) + ")");
    }
}

BBox BBox::expanded(double frac) const {
    double dlat = (hi.lat - lo.lat) * frac;
    double dlon = (hi.lon - lo.lon) * frac;
    return BBox{{lo.lat - dlat, lo.lon - dlon}, {hi.lat + dlat, hi.lon + dlon}};
}

double haversine_km(const GeoPoint& a, const GeoPoint& b) {
    require_valid(a, "haversine_km");
    require_valid(b, "haversine_km");
    double lat1 = deg2rad(a.lat);
    double lat2 = deg2rad(b.lat);
    double dlat = deg2rad(b.lat - a.lat);
    double dlon = deg2rad(b.lon - a.lon);
    double s1 = std::sin(dlat / 2.0);
    double s2 = std::sin(dlon / 2.0);
    double h = s1 * s1 + std::cos(lat1) * std::cos(lat2) * s2 * s2;
    h = std::min(1.0, h);
    return 2.0 * kEarthRadiusKm * std::asin(std::sqrt(h));
}

LocalFrame frame_for_region(const BBox& bbox) {
    require_valid(bbox.lo, "frame_for_region");
    require_valid(bbox.hi, "frame_for_region");
    if (!(bbox.lo.lat < bbox.hi.lat) || !(bbox.lo.lon < bbox.hi.lon)) {
        throw std::invalid_argument("frame_for_region: degenerate bbox (min must be < max in both axes)");
    }
    LocalFrame f;
    f.origin = GeoPoint{(bbox.lo.lat + bbox.hi.lat) / 2.0, (bbox.lo.lon + bbox.hi.lon) / 2.0};
    f.meters_per_deg_lat = kMetersPerDegLat;
    f.meters_per_deg_lon = kMetersPerDegLat * std::cos(deg2rad(f.origin.lat));
    return f;
}

std::pair<double, double> to_local(const LocalFrame& f, const GeoPoint& p) {
    require_valid(p, "to_local");
    return {(p.lon - f.origin.lon) * f.meters_per_deg_lon,
            (p.lat - f.origin.lat) * f.meters_per_deg_lat};
}

GeoPoint from_local(const LocalFrame& f, double x_m, double y_m) {
    return GeoPoint{f.origin.lat + y_m / f.meters_per_deg_lat,
                    f.origin.lon + x_m / f.meters_per_deg_lon};
}

}  // namespace trajsr::geo
