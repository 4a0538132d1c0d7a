#ifndef odflow_geo_hpp
#define odflow_geo_hpp

#include <string>
#include <string_view>

namespace odflow::geo {

struct LatLon {
    double lat = 0.0;  // degrees, [-90, 90]
    double lon = 0.0;  // degrees, [-180, 180]
};

// IUGG mean Earth radius.
inline constexpr double kEarthRadiusKm = 6371.0088;

// Centroid of the cell addressed by a base-32 geohash string (1-12 chars).
// Throws DomainError naming the offending character on invalid input.
LatLon decode_geohash(std::string_view code);

// Great-circle distance in km between two points.
double haversine_km(const LatLon& a, const LatLon& b);

}  // namespace odflow::geo

#endif
