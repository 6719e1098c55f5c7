#include "placemove/geo.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace placemove {

bool GeoPoint::valid(double lat, double lon) {
    return std::isfinite(lat) && std::isfinite(lon) && lat >= -90.0 && lat <= 90.0 &&
           lon >= -180.0 && lon <= 180.0;
}

double haversine_m(const GeoPoint& a, const GeoPoint& b) {
    constexpr double deg = kPi / 180.0;
    double lat1 = a.lat * deg, lat2 = b.lat * deg;
    double dlat = (b.lat - a.lat) * deg;
    double dlon = (b.lon - a.lon) * deg;
    double s1 = std::sin(dlat / 2.0), s2 = std::sin(dlon / 2.0);
    double h = s1 * s1 + std::cos(lat1) * std::cos(lat2) * s2 * s2;
    return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(h)));
}

GridIndex::GridIndex(const std::vector<GeoPoint>& points, double cell_size_m)
    : points_(points), cell_size_m_(cell_size_m) {
    if (cell_size_m <= 0.0) throw std::invalid_argument("GridIndex: cell_size_m must be > 0");

    double mean_lat = 0.0;
    for (const auto& p : points_) mean_lat += p.lat;
    if (!points_.empty()) mean_lat /= static_cast<double>(points_.size());

    const double m_per_deg_lat = kEarthRadiusM * kPi / 180.0;
    const double cos_lat = std::max(0.05, std::cos(mean_lat * kPi / 180.0));
    deg_per_cell_lat_ = cell_size_m_ / m_per_deg_lat;
    deg_per_cell_lon_ = cell_size_m_ / (m_per_deg_lat * cos_lat);

    for (PlaceId id = 0; id < points_.size(); ++id) {
        auto row = static_cast<int32_t>(std::floor(points_[id].lat / deg_per_cell_lat_));
        auto col = static_cast<int32_t>(std::floor(points_[id].lon / deg_per_cell_lon_));
        buckets_[cell_key(row, col)].push_back(id);
    }
}

std::optional<NearestHit> GridIndex::nearest_within(const GeoPoint& q, double radius_m) const {
    if (radius_m <= 0.0 || points_.empty()) return std::nullopt;

    auto row = static_cast<int32_t>(std::floor(q.lat / deg_per_cell_lat_));
    auto col = static_cast<int32_t>(std::floor(q.lon / deg_per_cell_lon_));
    // +1 ring of slack absorbs the degrees-per-meter approximation away from
    // the mean latitude.
    auto rings = static_cast<int32_t>(std::ceil(radius_m / cell_size_m_)) + 1;

    std::optional<NearestHit> best;
    for (int32_t dr = -rings; dr <= rings; ++dr) {
        for (int32_t dc = -rings; dc <= rings; ++dc) {
            auto it = buckets_.find(cell_key(row + dr, col + dc));
            if (it == buckets_.end()) continue;
            for (PlaceId id : it->second) {
                double d = haversine_m(q, points_[id]);
                if (d > radius_m) continue;
                if (!best || d < best->distance_m ||
                    (d == best->distance_m && id < best->id)) {
                    best = NearestHit{id, d};
                }
            }
        }
    }
    return best;
}

}  // namespace placemove
