#pragma once

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

namespace placemove {

using PlaceId = uint32_t;

inline constexpr double kEarthRadiusM = 6371008.8;  // IUGG mean radius
inline constexpr double kPi = 3.14159265358979323846;

struct GeoPoint {
    double lat = 0.0;  // degrees, [-90, 90]
    double lon = 0.0;  // degrees, [-180, 180]

    static bool valid(double lat, double lon);
};

// Great-circle distance in meters.
double haversine_m(const GeoPoint& a, const GeoPoint& b);

struct NearestHit {
    PlaceId id;
    double distance_m;
};

// Uniform lat/lon grid over indexed points. Cell size is fixed in meters and
// converted to degrees per axis at the mean latitude of the indexed set.
// Immutable after construction; queries are thread-safe.
class GridIndex {
public:
    GridIndex(const std::vector<GeoPoint>& points, double cell_size_m);

    // Nearest indexed point within radius_m; ties broken by smallest id.
    std::optional<NearestHit> nearest_within(const GeoPoint& q, double radius_m) const;

    size_t size() const { return points_.size(); }
    double cell_size_m() const { return cell_size_m_; }

private:
    int64_t cell_key(int32_t row, int32_t col) const {
        return (static_cast<int64_t>(row) << 32) | static_cast<uint32_t>(col);
    }

    std::vector<GeoPoint> points_;
    double cell_size_m_;
    double deg_per_cell_lat_;
    double deg_per_cell_lon_;
    std::unordered_map<int64_t, std::vector<PlaceId>> buckets_;
};

}  // namespace placemove
