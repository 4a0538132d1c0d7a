#include "odflow/geo.hpp"

#include <cmath>

#include "odflow/error.hpp"

namespace odflow::geo {

namespace {

constexpr std::string_view kBase32 = "0123456789bcdefghjkmnpqrstuvwxyz";

int base32_value(char c) {
    auto pos = kBase32.find(c);
    return pos == std::string_view::npos ? -1 : static_cast<int>(pos);
}

}  // namespace

LatLon decode_geohash(std::string_view code) {
    if (code.empty())
        throw DomainError("decode_geohash: empty geohash");
    if (code.size() > 12)
        throw DomainError("decode_geohash: geohash longer than 12 characters");

    double lat_lo = -90.0, lat_hi = 90.0;
    double lon_lo = -180.0, lon_hi = 180.0;
    bool even_bit = true;  // geohash interleaving starts with longitude
    for (std::size_t i = 0; i < code.size(); ++i) {
        int v = base32_value(code[i]);
        if (v < 0)
            throw DomainError("decode_geohash: invalid character '" +
                              std::string(1, code[i]) + "' at position " +
                              std::to_string(i));
        for (int bit = 4; bit >= 0; --bit) {
            int b = (v >> bit) & 1;
            if (even_bit) {
                double mid = 0.5 * (lon_lo + lon_hi);
                (b ? lon_lo : lon_hi) = mid;
            } else {
                double mid = 0.5 * (lat_lo + lat_hi);
                (b ? lat_lo : lat_hi) = mid;
            }
            even_bit = !even_bit;
        }
    }
    return {0.5 * (lat_lo + lat_hi), 0.5 * (lon_lo + lon_hi)};
}

double haversine_km(const LatLon& a, const LatLon& b) {
    constexpr double deg = M_PI / 180.0;
    double phi1 = a.lat * deg, phi2 = b.lat * deg;
    // fabs keeps the function exactly symmetric in its arguments
    double dphi = std::fabs(b.lat - a.lat) * deg;
    double dlam = std::fabs(b.lon - a.lon) * deg;
    double s = std::sin(0.5 * dphi), t = std::sin(0.5 * dlam);
    double h = s * s + std::cos(phi1) * std::cos(phi2) * t * t;
    if (h > 1.0) h = 1.0;
    return 2.0 * kEarthRadiusKm * std::asin(std::sqrt(h));
}

}  // namespace odflow::geo
