#include "doctest.h"
#include "placemove/geo.hpp"
#include "placemove/rng.hpp"

#include <cmath>

using namespace placemove;

namespace {

// brute-force oracle with the same tie-break
std::optional<NearestHit> scan_nearest(const std::vector<GeoPoint>& pts, const GeoPoint& q,
                                       double radius) {
    std::optional<NearestHit> best;
    for (PlaceId id = 0; id < pts.size(); ++id) {
        double d = haversine_m(q, pts[id]);
        if (d > radius) continue;
        if (!best || d < best->distance_m || (d == best->distance_m && id < best->id))
            best = NearestHit{id, d};
    }
    return best;
}

}  // namespace

TEST_CASE("haversine: identical points") {
    GeoPoint p{40.7580, -73.9855};
    CHECK(haversine_m(p, p) == 0.0);
}

TEST_CASE("haversine: antipodal on equator is half circumference") {
    double d = haversine_m({0.0, 0.0}, {0.0, 180.0});
    CHECK(d == doctest::Approx(kPi * kEarthRadiusM).epsilon(1e-12));
    CHECK(d == doctest::Approx(20015114.0).epsilon(1e-6));
}

TEST_CASE("haversine: Times Square to Empire State Building") {
    // frozen from an independent geodesy computation (sphere R=6371008.8):
    // 1067.606 m between (40.7580,-73.9855) and (40.7484,-73.9857)
    double d = haversine_m({40.7580, -73.9855}, {40.7484, -73.9857});
    CHECK(d == doctest::Approx(1067.606).epsilon(0.001));
}

TEST_CASE("haversine: symmetry and triangle inequality on random triples") {
    Rng rng(7);
    for (int it = 0; it < 500; ++it) {
        GeoPoint a{rng.uniform(40.5, 41.0), rng.uniform(-74.2, -73.6)};
        GeoPoint b{rng.uniform(40.5, 41.0), rng.uniform(-74.2, -73.6)};
        GeoPoint c{rng.uniform(40.5, 41.0), rng.uniform(-74.2, -73.6)};
        CHECK(haversine_m(a, b) == haversine_m(b, a));
        double ab = haversine_m(a, b), bc = haversine_m(b, c), ac = haversine_m(a, c);
        CHECK(ac <= (ab + bc) * (1.0 + 1e-6) + 1e-9);
    }
}

TEST_CASE("nearest_within: exact hit and absence") {
    std::vector<GeoPoint> pts = {{40.70, -74.00}, {40.71, -74.01}, {40.80, -73.90}};
    GridIndex idx(pts, 200.0);

    auto hit = idx.nearest_within(pts[1], 200.0);
    REQUIRE(hit.has_value());
    CHECK(hit->id == 1);
    CHECK(hit->distance_m == 0.0);

    CHECK(!idx.nearest_within({40.75, -73.95}, 200.0).has_value());
    CHECK(!GridIndex({}, 200.0).nearest_within({40.75, -73.95}, 200.0).has_value());
}

TEST_CASE("nearest_within matches exhaustive scan on random instances") {
    Rng rng(42);
    std::vector<GeoPoint> pts;
    for (int i = 0; i < 1000; ++i)
        pts.push_back({rng.uniform(40.60, 40.85), rng.uniform(-74.05, -73.75)});
    GridIndex idx(pts, 200.0);

    for (int q = 0; q < 1000; ++q) {
        GeoPoint query{rng.uniform(40.60, 40.85), rng.uniform(-74.05, -73.75)};
        double radius = rng.uniform(50.0, 800.0);
        auto got = idx.nearest_within(query, radius);
        auto want = scan_nearest(pts, query, radius);
        REQUIRE(got.has_value() == want.has_value());
        if (got) {
            CHECK(got->id == want->id);
            CHECK(got->distance_m == want->distance_m);
        }
    }
}

TEST_CASE("nearest_within ties break to the smallest id") {
    // two places at the same coordinates
    std::vector<GeoPoint> pts = {{40.70, -74.00}, {40.70, -74.00}};
    GridIndex idx(pts, 200.0);
    auto hit = idx.nearest_within({40.7001, -74.0001}, 200.0);
    REQUIRE(hit.has_value());
    CHECK(hit->id == 0);
}
