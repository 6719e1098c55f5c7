#include "placemove/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace placemove {

void SpatialContextConfig::validate() const {
    if (k_neighbors < 1) throw std::invalid_argument("k_neighbors must be >= 1");
    if (bin_width_m <= 0.0) throw std::invalid_argument("bin_width_m must be > 0");
    if (omega < 0.0 || omega > 1.0) throw std::invalid_argument("omega must be in [0,1]");
    if (distance_unit_m <= 0.0) throw std::invalid_argument("distance_unit_m must be > 0");
    if (beta_max < 1) throw std::invalid_argument("beta_max must be >= 1");
}

TypeStats::TypeStats(const PlaceSet& places, const CheckinCounts& counts, double bin_width_m)
    : places_(places), counts_(counts), bin_width_m_(bin_width_m) {
    if (bin_width_m <= 0.0) throw std::invalid_argument("TypeStats: bin_width_m must be > 0");
    if (counts.counts.size() != places.places.size())
        throw std::invalid_argument("TypeStats: counts size does not match places");
    type_totals_.assign(places.categories.size(), 0);
    for (const auto& p : places.places) type_totals_[p.category] += counts.counts[p.id];
}

const TypeStats::BinStats& TypeStats::bin(PlaceId center, double distance_m) const {
    auto bin_idx = static_cast<uint32_t>(std::floor(distance_m / bin_width_m_));
    uint64_t key = (static_cast<uint64_t>(center) << 32) | bin_idx;
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;

    BinStats bs;
    bs.type_checkins.assign(places_.categories.size(), 0);
    bs.type_places.assign(places_.categories.size(), 0);
    const GeoPoint& c = places_.places[center].location;
    const double lo = bin_idx * bin_width_m_;
    const double hi = lo + bin_width_m_;
    for (const auto& p : places_.places) {
        if (p.id == center) continue;
        double d = haversine_m(c, p.location);
        if (d < lo || d >= hi) continue;
        bs.type_checkins[p.category] += counts_.counts[p.id];
        bs.type_places[p.category] += 1;
        bs.total_checkins += counts_.counts[p.id];
        bs.total_places += 1;
    }
    return cache_.emplace(key, std::move(bs)).first->second;
}

TypeStats type_stats(const PlaceSet& places, const CheckinCounts& counts, double bin_width_m) {
    return TypeStats(places, counts, bin_width_m);
}

std::vector<SpatialContext> spatial_contexts(const PlaceSet& places,
                                             const SpatialContextConfig& cfg) {
    cfg.validate();
    const auto& P = places.places;
    std::vector<SpatialContext> out;
    if (P.size() < 2) return out;
    const size_t k = std::min<size_t>(cfg.k_neighbors, P.size() - 1);
    out.reserve(P.size() * k);

    std::vector<std::pair<double, PlaceId>> cand(P.size() - 1);
    for (const auto& center : P) {
        size_t n = 0;
        for (const auto& other : P) {
            if (other.id == center.id) continue;
            cand[n++] = {haversine_m(center.location, other.location), other.id};
        }
        std::partial_sort(cand.begin(), cand.begin() + k, cand.end());
        for (size_t i = 0; i < k; ++i)
            out.push_back({center.id, cand[i].second, cand[i].first});
    }
    return out;
}

uint32_t beta(BaselineModel model, uint64_t context_checkins, double mean_checkins,
              double distance_m, PlaceId center, uint32_t context_type, const TypeStats* stats,
              const SpatialContextConfig& cfg) {
    double value = 1.0;
    const double d = distance_m / cfg.distance_unit_m;
    switch (model) {
        case BaselineModel::checkin:
            value = 1.0 + std::log(1.0 + static_cast<double>(context_checkins));
            break;
        case BaselineModel::distance:
            value = (1.0 + mean_checkins) / (1.0 + std::pow(d, cfg.alpha));
            break;
        case BaselineModel::combined:
            value = (1.0 + std::log(1.0 + static_cast<double>(context_checkins))) /
                    (1.0 + std::pow(d, cfg.alpha));
            break;
        case BaselineModel::itdl: {
            if (!stats) throw std::invalid_argument("beta: itdl requires TypeStats");
            const auto& bs = stats->bin(center, distance_m);
            // activity: share of the bin's check-ins carried by the context type
            double frac = static_cast<double>(bs.type_checkins[context_type]) /
                          (1.0 + static_cast<double>(bs.total_checkins));
            double activity = -std::log2(1.0 - frac);
            // uniqueness: -log2 of the type's frequency in the bin; a type
            // absent from its bin gets the Laplace-style bound
            double uniq;
            if (bs.type_places[context_type] == 0) {
                uniq = std::log2(static_cast<double>(bs.total_places + stats->n_types()));
            } else {
                double f = static_cast<double>(bs.type_places[context_type]) /
                           static_cast<double>(bs.total_places);
                uniq = -std::log2(f);
            }
            value = cfg.omega * activity + (1.0 - cfg.omega) * uniq;
            break;
        }
    }
    double ceiled = std::ceil(value);
    if (!(ceiled >= 1.0)) ceiled = 1.0;
    if (ceiled > cfg.beta_max) ceiled = cfg.beta_max;
    return static_cast<uint32_t>(ceiled);
}

std::vector<TrainingPair> baseline_pairs(const std::vector<SpatialContext>& contexts,
                                         const PlaceSet& places, const CheckinCounts& counts,
                                         const TypeStats* stats,
                                         const SpatialContextConfig& cfg) {
    cfg.validate();
    double mean_checkins = 0.0;
    if (!counts.counts.empty())
        mean_checkins =
            static_cast<double>(counts.total()) / static_cast<double>(counts.counts.size());

    std::vector<TrainingPair> out;
    for (const auto& sc : contexts) {
        uint32_t b = beta(cfg.model, counts.counts[sc.context], mean_checkins, sc.distance_m,
                          sc.center, places.places[sc.context].category, stats, cfg);
        for (uint32_t r = 0; r < b; ++r) out.push_back({sc.center, sc.context});
    }
    return out;
}

}  // namespace placemove
