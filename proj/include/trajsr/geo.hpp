#pragma once

#include <utility>

namespace trajsr::geo {

// IUGG mean Earth radius. Haversine constants differ across references;
// this one is fixed project-wide.
inline constexpr double kEarthRadiusKm = 6371.0088;
inline constexpr double kMetersPerDegLat = 111320.0;
inline constexpr double kPi = 3.141592653589793238462643383279502884;

struct GeoPoint {
    double lat = 0.0;  // degrees, [-90, 90]
    double lon = 0.0;  // degrees, [-180, 180]

    friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

bool is_valid(const GeoPoint& p);
void require_valid(const GeoPoint& p, const char* what);

struct BBox {
    GeoPoint lo;
    GeoPoint hi;

    bool contains(const GeoPoint& p) const {
        return p.lat >= lo.lat && p.lat <= hi.lat && p.lon >= lo.lon && p.lon <= hi.lon;
    }
    BBox expanded(double frac) const;
};

// Equirectangular frame anchored at a region centroid. Affine and exactly
// invertible; good to ~1% against haversine at city scale.
struct LocalFrame {
    GeoPoint origin;
    double meters_per_deg_lat = 0.0;
    double meters_per_deg_lon = 0.0;
};

double haversine_km(const GeoPoint& a, const GeoPoint& b);

LocalFrame frame_for_region(const BBox& bbox);

std::pair<double, double> to_local(const LocalFrame& f, const GeoPoint& p);
GeoPoint from_local(const LocalFrame& f, double x_m, double y_m);

}  // namespace trajsr::geo
