#include "placemove/pairs.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <stdexcept>

#include "placemove/rng.hpp"

namespace placemove {

std::vector<TrainingPair> trip_pairs(const std::vector<Trip>& trips, TripPairStats* stats) {
    std::vector<TrainingPair> out;
    out.reserve(trips.size());
    uint64_t self_loops = 0;
    for (const auto& t : trips) {
        if (t.origin == t.dest) {
            ++self_loops;
            continue;
        }
        out.push_back({t.origin, t.dest});
    }
    if (stats) stats->self_loops = self_loops;
    return out;
}

std::vector<TrainingPair> od_pairs(const std::vector<Trip>& trips, const ODConfig& cfg) {
    if (cfg.window_seconds <= 0) throw std::invalid_argument("od_pairs: window_seconds must be > 0");

    // destination buckets, each sorted by (arrival, trip index)
    std::map<PlaceId, std::vector<size_t>> buckets;
    for (size_t i = 0; i < trips.size(); ++i) buckets[trips[i].dest].push_back(i);

    std::vector<TrainingPair> out;
    for (auto& [dest, idx] : buckets) {
        std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) {
            if (trips[a].arrive != trips[b].arrive) return trips[a].arrive < trips[b].arrive;
            return a < b;
        });

        // sliding window over arrival times, width W_d on both sides
        size_t lo = 0, hi = 0;
        for (size_t c = 0; c < idx.size(); ++c) {
            int64_t t = trips[idx[c]].arrive;
            while (lo < idx.size() && trips[idx[lo]].arrive < t - cfg.window_seconds) ++lo;
            if (hi < c + 1) hi = c + 1;
            while (hi < idx.size() && trips[idx[hi]].arrive <= t + cfg.window_seconds) ++hi;

            size_t n_ctx = hi - lo - 1;  // window minus the center trip
            if (n_ctx == 0) continue;
            PlaceId center = trips[idx[c]].origin;

            if (cfg.max_contexts_per_center == 0 || n_ctx <= cfg.max_contexts_per_center) {
                for (size_t j = lo; j < hi; ++j) {
                    if (j == c) continue;
                    out.push_back({center, trips[idx[j]].origin});
                }
            } else {
                // reservoir sample over the window, seeded per center trip so
                // the draw is independent of bucket processing order
                size_t k = cfg.max_contexts_per_center;
                Rng rng(substream(cfg.seed, "od_subsample", idx[c]));
                std::vector<size_t> sample;
                sample.reserve(k);
                size_t seen = 0;
                for (size_t j = lo; j < hi; ++j) {
                    if (j == c) continue;
                    if (seen < k) {
                        sample.push_back(j);
                    } else {
                        size_t r = rng.below(seen + 1);
                        if (r < k) sample[r] = j;
                    }
                    ++seen;
                }
                std::sort(sample.begin(), sample.end());
                for (size_t j : sample) out.push_back({center, trips[idx[j]].origin});
            }
        }
    }
    return out;
}

void write_pairs_csv(const std::string& path, const std::vector<TrainingPair>& pairs) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write pairs file: " + path);
    out << "center_id,context_id\n";
    for (const auto& p : pairs) out << p.center << ',' << p.context << '\n';
}

}  // namespace placemove
