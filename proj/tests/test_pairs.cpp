#include "doctest.h"
#include "placemove/pairs.hpp"
#include "placemove/rng.hpp"

#include <algorithm>
#include <cstdlib>
#include <set>
#include <utility>

using namespace placemove;

namespace {

// literal double loop over trips: contexts are origins of other trips with the
// same destination arriving within the window
std::vector<TrainingPair> od_pairs_bruteforce(const std::vector<Trip>& trips,
                                              int64_t window_seconds) {
    std::vector<TrainingPair> out;
    for (size_t i = 0; i < trips.size(); ++i) {
        for (size_t j = 0; j < trips.size(); ++j) {
            if (j == i) continue;
            if (trips[j].dest != trips[i].dest) continue;
            if (std::abs(trips[i].arrive - trips[j].arrive) > window_seconds) continue;
            out.push_back({trips[i].origin, trips[j].origin});
        }
    }
    return out;
}

std::multiset<std::pair<PlaceId, PlaceId>> as_multiset(const std::vector<TrainingPair>& v) {
    std::multiset<std::pair<PlaceId, PlaceId>> m;
    for (const auto& p : v) m.insert({p.center, p.context});
    return m;
}

std::vector<Trip> random_trips(Rng& rng, size_t n, PlaceId n_places, int64_t time_span) {
    std::vector<Trip> trips(n);
    for (auto& t : trips) {
        t.origin = static_cast<PlaceId>(rng.below(n_places));
        t.dest = static_cast<PlaceId>(rng.below(n_places));
        t.depart = static_cast<int64_t>(rng.below(time_span));
        t.arrive = t.depart + static_cast<int64_t>(rng.below(3600));
    }
    return trips;
}

}  // namespace

TEST_CASE("trip_pairs: one pair per trip, self-loops dropped") {
    std::vector<Trip> trips = {{1, 2, 0, 10}, {3, 3, 5, 15}, {2, 1, 7, 20}};
    TripPairStats stats;
    auto pairs = trip_pairs(trips, &stats);
    REQUIRE(pairs.size() == 2);
    CHECK(pairs[0] == TrainingPair{1, 2});
    CHECK(pairs[1] == TrainingPair{2, 1});
    CHECK(stats.self_loops == 1);
}

TEST_CASE("trip_pairs multiset equals direct enumeration on random trips") {
    Rng rng(11);
    auto trips = random_trips(rng, 1000, 30, 100000);
    auto got = as_multiset(trip_pairs(trips));
    std::multiset<std::pair<PlaceId, PlaceId>> want;
    for (const auto& t : trips)
        if (t.origin != t.dest) want.insert({t.origin, t.dest});
    CHECK(got == want);
}

TEST_CASE("od_pairs: symmetric one-hour window") {
    // A->C arriving t, B->C arriving t+30min
    std::vector<Trip> trips = {{0, 2, 0, 1000}, {1, 2, 100, 1000 + 1800}};
    ODConfig cfg;
    cfg.window_seconds = 3600;
    cfg.max_contexts_per_center = 0;
    auto got = as_multiset(od_pairs(trips, cfg));
    std::multiset<std::pair<PlaceId, PlaceId>> want = {{0, 1}, {1, 0}};
    CHECK(got == want);

    cfg.window_seconds = 15 * 60;
    CHECK(od_pairs(trips, cfg).empty());
}

TEST_CASE("od_pairs keeps same-origin contexts from different trips") {
    std::vector<Trip> trips = {{0, 2, 0, 1000}, {0, 2, 5, 1200}};
    ODConfig cfg;
    cfg.max_contexts_per_center = 0;
    auto got = as_multiset(od_pairs(trips, cfg));
    std::multiset<std::pair<PlaceId, PlaceId>> want = {{0, 0}, {0, 0}};
    CHECK(got == want);
}

TEST_CASE("od_pairs equals the quadratic oracle on random instances") {
    Rng rng(13);
    for (int inst = 0; inst < 30; ++inst) {
        size_t n = 50 + rng.below(950);
        auto trips = random_trips(rng, n, static_cast<PlaceId>(5 + rng.below(40)),
                                  200000 + static_cast<int64_t>(rng.below(400000)));
        ODConfig cfg;
        cfg.window_seconds = 600 + static_cast<int64_t>(rng.below(7200));
        cfg.max_contexts_per_center = 0;
        CHECK(as_multiset(od_pairs(trips, cfg)) ==
              as_multiset(od_pairs_bruteforce(trips, cfg.window_seconds)));
    }
}

TEST_CASE("od_pairs window symmetry with cap disabled") {
    Rng rng(17);
    auto trips = random_trips(rng, 400, 20, 150000);
    ODConfig cfg;
    cfg.window_seconds = 1800;
    cfg.max_contexts_per_center = 0;
    auto pairs = od_pairs(trips, cfg);
    auto m = as_multiset(pairs);
    for (const auto& p : pairs)
        CHECK(m.count({p.context, p.center}) >= 1);
}

TEST_CASE("od_pairs cap monotonicity and subsample validity") {
    Rng rng(19);
    auto trips = random_trips(rng, 500, 8, 50000);  // few places -> big buckets
    ODConfig cfg;
    cfg.window_seconds = 7200;
    cfg.seed = 123;

    cfg.max_contexts_per_center = 0;
    auto uncapped = od_pairs(trips, cfg);
    size_t prev = 0;
    for (uint32_t cap : {2u, 5u, 20u, 100u}) {
        cfg.max_contexts_per_center = cap;
        auto capped = od_pairs(trips, cfg);
        CHECK(capped.size() >= prev);
        CHECK(capped.size() <= uncapped.size());
        prev = capped.size();
        // capped pairs are a sub-multiset of the uncapped stream
        auto cm = as_multiset(capped);
        auto um = as_multiset(uncapped);
        for (const auto& key : cm)
            CHECK(cm.count(key) <= um.count(key));
    }
}

TEST_CASE("od_pairs is deterministic given seed") {
    Rng rng(23);
    auto trips = random_trips(rng, 300, 6, 40000);
    ODConfig cfg;
    cfg.window_seconds = 3600;
    cfg.max_contexts_per_center = 10;
    cfg.seed = 7;
    auto a = od_pairs(trips, cfg);
    auto b = od_pairs(trips, cfg);
    CHECK(a == b);
    cfg.seed = 8;
    auto c = od_pairs(trips, cfg);
    CHECK(a != c);  // different subsample draw (overwhelmingly likely)
}
