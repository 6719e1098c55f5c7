#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "placemove/ingest.hpp"
#include "placemove/pairs.hpp"

namespace placemove {

enum class BaselineModel { checkin, distance, combined, itdl };

struct SpatialContextConfig {
    int k_neighbors = 10;
    double alpha = 1.0;          // inverse distance factor
    double bin_width_m = 30.0;   // h
    double omega = 0.4;          // ITDL activity/uniqueness weight
    BaselineModel model = BaselineModel::checkin;
    double distance_unit_m = 1000.0;  // d(i,j) is divided by this (km by default)
    uint32_t beta_max = 1000;

    void validate() const;
};

struct SpatialContext {
    PlaceId center;
    PlaceId context;
    double distance_m;
};

// Per-type check-in totals plus lazily computed per-(center, distance-bin)
// histograms of context place types and their check-ins.
class TypeStats {
public:
    TypeStats(const PlaceSet& places, const CheckinCounts& counts, double bin_width_m);

    struct BinStats {
        std::vector<uint64_t> type_checkins;  // per type, within the bin
        std::vector<uint64_t> type_places;    // per type, places within the bin
        uint64_t total_checkins = 0;
        uint64_t total_places = 0;
    };

    // stats of the distance bin around `center` that contains distance_m
    const BinStats& bin(PlaceId center, double distance_m) const;

    size_t n_types() const { return type_totals_.size(); }
    const std::vector<uint64_t>& type_totals() const { return type_totals_; }
    double bin_width_m() const { return bin_width_m_; }

private:
    const PlaceSet& places_;
    const CheckinCounts& counts_;
    double bin_width_m_;
    std::vector<uint64_t> type_totals_;
    mutable std::unordered_map<uint64_t, BinStats> cache_;
};

TypeStats type_stats(const PlaceSet& places, const CheckinCounts& counts, double bin_width_m);

// k nearest other places per center by great-circle distance, ties by id.
// Emitted in center-id order, neighbors nearest-first.
std::vector<SpatialContext> spatial_contexts(const PlaceSet& places,
                                             const SpatialContextConfig& cfg);

// Augmenting factor β for one (center, context) pair; ceiling applied last and
// the result clamped to [1, beta_max].
uint32_t beta(BaselineModel model, uint64_t context_checkins, double mean_checkins,
              double distance_m, PlaceId center, uint32_t context_type, const TypeStats* stats,
              const SpatialContextConfig& cfg);

// Each spatial context replicated β times.
std::vector<TrainingPair> baseline_pairs(const std::vector<SpatialContext>& contexts,
                                         const PlaceSet& places, const CheckinCounts& counts,
                                         const TypeStats* stats,
                                         const SpatialContextConfig& cfg);

}  // namespace placemove
