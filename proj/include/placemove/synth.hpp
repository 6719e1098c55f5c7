#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "placemove/geo.hpp"

namespace placemove {

struct TimeProfile {
    // mixture of hour-of-day Gaussian peaks (hours wrap mod 24)
    struct Peak {
        double mean_hour;
        double stddev_hours;
        double weight;
    };
    std::vector<Peak> peaks;
};

struct SynthConfig {
    size_t n_places = 200;
    size_t n_categories = 5;
    size_t n_trips = 50000;
    // row-stochastic category transition probabilities, n_categories^2
    std::vector<std::vector<double>> flow_matrix;
    // per (origin-cat, dest-cat); empty profile = single flat peak
    std::vector<std::vector<TimeProfile>> time_profiles;
    double zipf_s = 1.0;          // popularity exponent
    double lat_min = 40.60, lat_max = 40.85;
    double lon_min = -74.05, lon_max = -73.75;
    int n_days = 30;
    double speed_m_per_s = 10.0;  // trip duration = distance / speed + noise
    uint64_t seed = 42;

    void validate() const;
};

// The acceptance fixture: 200 places, 5 categories with home/work/food/shop/
// recreation flows and distinct arrival-time peaks, 50k trips.
SynthConfig city5_config(uint64_t seed = 42);

struct SynthOutput {
    std::string places_path;
    std::string trips_path;
    std::string manifest_path;
};

// Writes places CSV, trips CSV (ingest schemas) and a JSON manifest.
// Byte-identical outputs for identical config+seed.
SynthOutput generate(const SynthConfig& cfg, const std::string& out_dir);

}  // namespace placemove
