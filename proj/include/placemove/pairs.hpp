#pragma once

#include <cstdint>
#include <vector>

#include "placemove/ingest.hpp"

namespace placemove {

struct TrainingPair {
    PlaceId center = 0;
    PlaceId context = 0;

    friend bool operator==(const TrainingPair&, const TrainingPair&) = default;
    friend auto operator<=>(const TrainingPair&, const TrainingPair&) = default;
};

struct ODConfig {
    int64_t window_seconds = 3600;       // W_d
    uint32_t max_contexts_per_center = 100;  // 0 = uncapped
    uint64_t seed = 0;                   // context subsampling
};

struct TripPairStats {
    uint64_t self_loops = 0;
};

// One (origin, destination) pair per trip; self-loops dropped and counted.
std::vector<TrainingPair> trip_pairs(const std::vector<Trip>& trips,
                                     TripPairStats* stats = nullptr);

// For each trip, contexts are the origins of all other trips with the same
// destination place arriving within window_seconds. Contexts with the same
// origin place are kept; only the trip itself is excluded. Oversized context
// sets are subsampled uniformly without replacement (seeded, per-center).
// Output order is deterministic: destination buckets in id order, centers in
// arrival order within each bucket.
std::vector<TrainingPair> od_pairs(const std::vector<Trip>& trips, const ODConfig& cfg);

// Debug dump: CSV `center_id,context_id`.
void write_pairs_csv(const std::string& path, const std::vector<TrainingPair>& pairs);

}  // namespace placemove
