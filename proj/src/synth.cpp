#include "placemove/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "json.hpp"
#include "placemove/rng.hpp"

namespace placemove {

void SynthConfig::validate() const {
    if (n_categories < 2) throw std::invalid_argument("synth: n_categories must be >= 2");
    if (n_places < n_categories)
        throw std::invalid_argument("synth: every category needs at least one place");
    if (zipf_s <= 0.0) throw std::invalid_argument("synth: zipf_s must be > 0");
    if (flow_matrix.size() != n_categories)
        throw std::invalid_argument("synth: flow_matrix must be n_categories x n_categories");
    for (const auto& row : flow_matrix) {
        if (row.size() != n_categories)
            throw std::invalid_argument("synth: flow_matrix must be n_categories x n_categories");
        double s = 0.0;
        for (double v : row) {
            if (v < 0.0) throw std::invalid_argument("synth: negative flow probability");
            s += v;
        }
        if (std::abs(s - 1.0) > 1e-9)
            throw std::invalid_argument("synth: flow_matrix rows must sum to 1");
    }
    if (lat_min >= lat_max || lon_min >= lon_max)
        throw std::invalid_argument("synth: empty bounding box");
}

SynthConfig city5_config(uint64_t seed) {
    // categories: 0 residential, 1 work, 2 food, 3 shop, 4 recreation
    //
    // Destination choice is only weakly category-biased (commute and evening
    // tilts); the category signal lives in departure times.  Within each
    // destination column the five origin categories depart 2.5 h apart, so a
    // roughly hour-wide window isolates same-category co-arrivals while a
    // multi-hour window mixes neighbouring peaks.
    SynthConfig cfg;
    cfg.seed = seed;
    cfg.zipf_s = 1.0;
    cfg.n_days = 120;
    cfg.flow_matrix = {
        {0.12, 0.32, 0.16, 0.20, 0.20},  // residential: morning commute tilt
        {0.32, 0.12, 0.24, 0.16, 0.16},  // work: evening return + lunch tilt
        {0.24, 0.24, 0.12, 0.20, 0.20},  // food
        {0.28, 0.16, 0.20, 0.16, 0.20},  // shop
        {0.32, 0.16, 0.20, 0.20, 0.12},  // recreation: heads home
    };
    // Each profile is a sharp category peak over a broad all-day background;
    // the background is identical everywhere, so widening the window dilutes
    // the category signal instead of adding to it.
    auto peak = [](double h) {
        return TimeProfile{{{h, 0.45, 0.5}, {12.0, 8.0, 0.5}}};
    };
    cfg.time_profiles.assign(5, std::vector<TimeProfile>(5));
    // -> residential: work 18 is the evening return; recreation straggles last
    cfg.time_profiles[3][0] = peak(13.0);
    cfg.time_profiles[2][0] = peak(15.5);
    cfg.time_profiles[1][0] = peak(18.0);
    cfg.time_profiles[4][0] = peak(20.5);
    cfg.time_profiles[0][0] = peak(23.0);
    // -> work: residential 8 is the morning commute
    cfg.time_profiles[0][1] = peak(8.0);
    cfg.time_profiles[1][1] = peak(10.5);
    cfg.time_profiles[2][1] = peak(13.0);
    cfg.time_profiles[3][1] = peak(15.5);
    cfg.time_profiles[4][1] = peak(18.0);
    // -> food: work 12 is the lunch run
    cfg.time_profiles[0][2] = peak(9.5);
    cfg.time_profiles[1][2] = peak(12.0);
    cfg.time_profiles[3][2] = peak(14.5);
    cfg.time_profiles[2][2] = peak(17.0);
    cfg.time_profiles[4][2] = peak(19.5);
    // -> shop
    cfg.time_profiles[2][3] = peak(10.0);
    cfg.time_profiles[0][3] = peak(12.5);
    cfg.time_profiles[4][3] = peak(15.0);
    cfg.time_profiles[1][3] = peak(17.5);
    cfg.time_profiles[3][3] = peak(20.0);
    // -> recreation: residential 19.5 is the evening outing
    cfg.time_profiles[1][4] = peak(12.0);
    cfg.time_profiles[2][4] = peak(14.5);
    cfg.time_profiles[3][4] = peak(17.0);
    cfg.time_profiles[0][4] = peak(19.5);
    cfg.time_profiles[4][4] = peak(22.0);
    return cfg;
}

namespace {

size_t sample_discrete(Rng& rng, const std::vector<double>& cum) {
    double u = rng.uniform() * cum.back();
    auto it = std::upper_bound(cum.begin(), cum.end(), u);
    if (it == cum.end()) --it;
    return static_cast<size_t>(it - cum.begin());
}

double sample_hour(Rng& rng, const TimeProfile& profile) {
    if (profile.peaks.empty()) return rng.uniform(0.0, 24.0);
    std::vector<double> cum;
    double acc = 0.0;
    for (const auto& p : profile.peaks) cum.push_back(acc += p.weight);
    const auto& pk = profile.peaks[sample_discrete(rng, cum)];
    double h = rng.normal(pk.mean_hour, pk.stddev_hours);
    h = std::fmod(h, 24.0);
    return h < 0.0 ? h + 24.0 : h;
}

std::string format_datetime(int64_t epoch) {
    // epoch is always >= 0 here (synthetic days start at 2015-01-01)
    int64_t days = epoch / 86400;
    int64_t rem = epoch % 86400;
    // civil_from_days (proleptic Gregorian)
    int64_t z = days + 719468;
    int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    unsigned doe = static_cast<unsigned>(z - era * 146097);
    unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    int64_t y = static_cast<int64_t>(yoe) + era * 400;
    unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    unsigned mp = (5 * doy + 2) / 153;
    unsigned d = doy - (153 * mp + 2) / 5 + 1;
    unsigned m = mp + (mp < 10 ? 3 : -9);
    y += m <= 2;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04lld-%02u-%02uT%02lld:%02lld:%02lld",
                  static_cast<long long>(y), m, d, static_cast<long long>(rem / 3600),
                  static_cast<long long>((rem / 60) % 60), static_cast<long long>(rem % 60));
    return buf;
}

constexpr int64_t kEpochBase = 16436 * 86400;  // 2015-01-01

}  // namespace

SynthOutput generate(const SynthConfig& cfg, const std::string& out_dir) {
    cfg.validate();
    std::filesystem::create_directories(out_dir);

    Rng rng(substream(cfg.seed, "synth"));

    // places: uniform in bbox, category round-robin, popularity Zipf by index
    struct SynthPlace {
        GeoPoint loc;
        uint32_t category;
        double weight;
    };
    std::vector<SynthPlace> places(cfg.n_places);
    std::vector<std::vector<size_t>> by_category(cfg.n_categories);
    for (size_t i = 0; i < cfg.n_places; ++i) {
        places[i].loc = GeoPoint{rng.uniform(cfg.lat_min, cfg.lat_max),
                                 rng.uniform(cfg.lon_min, cfg.lon_max)};
        places[i].category = static_cast<uint32_t>(i % cfg.n_categories);
        places[i].weight = 1.0 / std::pow(static_cast<double>(i + 1), cfg.zipf_s);
        by_category[places[i].category].push_back(i);
    }

    std::vector<double> origin_cum;
    {
        double acc = 0.0;
        for (const auto& p : places) origin_cum.push_back(acc += p.weight);
    }
    std::vector<std::vector<double>> dest_cum(cfg.n_categories);
    for (size_t c = 0; c < cfg.n_categories; ++c) {
        double acc = 0.0;
        for (size_t i : by_category[c]) dest_cum[c].push_back(acc += places[i].weight);
    }
    std::vector<std::vector<double>> flow_cum(cfg.n_categories);
    for (size_t c = 0; c < cfg.n_categories; ++c) {
        double acc = 0.0;
        for (double v : cfg.flow_matrix[c]) flow_cum[c].push_back(acc += v);
    }

    SynthOutput out;
    out.places_path = out_dir + "/places.csv";
    out.trips_path = out_dir + "/trips.csv";
    out.manifest_path = out_dir + "/manifest.json";

    {
        std::ofstream pf(out.places_path);
        if (!pf) throw std::runtime_error("cannot write " + out.places_path);
        pf << "external_id,lat,lon,category\n";
        char buf[64];
        for (size_t i = 0; i < cfg.n_places; ++i) {
            std::snprintf(buf, sizeof(buf), "%.9f,%.9f", places[i].loc.lat, places[i].loc.lon);
            pf << "P" << i << ',' << buf << ",cat" << places[i].category << '\n';
        }
    }

    std::vector<std::vector<uint64_t>> transition_counts(
        cfg.n_categories, std::vector<uint64_t>(cfg.n_categories, 0));
    {
        std::ofstream tf(out.trips_path);
        if (!tf) throw std::runtime_error("cannot write " + out.trips_path);
        tf << "pickup_datetime,dropoff_datetime,pickup_lon,pickup_lat,dropoff_lon,dropoff_lat\n";
        char buf[128];
        for (size_t t = 0; t < cfg.n_trips; ++t) {
            size_t o = sample_discrete(rng, origin_cum);
            uint32_t oc = places[o].category;
            auto dc = static_cast<uint32_t>(sample_discrete(rng, flow_cum[oc]));
            size_t d = by_category[dc][sample_discrete(rng, dest_cum[dc])];

            const TimeProfile* profile = nullptr;
            if (oc < cfg.time_profiles.size() && dc < cfg.time_profiles[oc].size())
                profile = &cfg.time_profiles[oc][dc];
            double hour = profile ? sample_hour(rng, *profile) : rng.uniform(0.0, 24.0);
            int64_t day = static_cast<int64_t>(rng.below(cfg.n_days));
            auto depart = kEpochBase + day * 86400 + static_cast<int64_t>(hour * 3600.0);

            double dist = haversine_m(places[o].loc, places[d].loc);
            double duration = dist / cfg.speed_m_per_s + rng.lognormal(4.0, 0.5);
            int64_t arrive = depart + static_cast<int64_t>(duration);

            std::snprintf(buf, sizeof(buf), "%.9f,%.9f,%.9f,%.9f", places[o].loc.lon,
                          places[o].loc.lat, places[d].loc.lon, places[d].loc.lat);
            tf << format_datetime(depart) << ',' << format_datetime(arrive) << ',' << buf
               << '\n';
            ++transition_counts[oc][dc];
        }
    }

    {
        nlohmann::json j;
        j["n_places"] = cfg.n_places;
        j["n_categories"] = cfg.n_categories;
        j["n_trips"] = cfg.n_trips;
        j["zipf_s"] = cfg.zipf_s;
        j["seed"] = cfg.seed;
        j["flow_matrix"] = cfg.flow_matrix;
        j["category_transition_counts"] = transition_counts;
        std::ofstream mf(out.manifest_path);
        if (!mf) throw std::runtime_error("cannot write " + out.manifest_path);
        mf << j.dump(2) << '\n';
    }
    return out;
}

}  // namespace placemove
