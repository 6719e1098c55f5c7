#include "placemove/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <memory>
#include <stdexcept>

#include "json.hpp"
#include "placemove/rng.hpp"

namespace placemove {

std::string to_string(ModelKind k) {
    switch (k) {
        case ModelKind::trip: return "trip";
        case ModelKind::od: return "od";
        case ModelKind::baseline_checkin: return "baseline:checkin";
        case ModelKind::baseline_distance: return "baseline:distance";
        case ModelKind::baseline_combined: return "baseline:combined";
        case ModelKind::baseline_itdl: return "baseline:itdl";
    }
    throw std::logic_error("unknown ModelKind");
}

ModelKind model_kind_from_string(const std::string& s) {
    if (s == "trip") return ModelKind::trip;
    if (s == "od") return ModelKind::od;
    if (s == "baseline:checkin") return ModelKind::baseline_checkin;
    if (s == "baseline:distance") return ModelKind::baseline_distance;
    if (s == "baseline:combined") return ModelKind::baseline_combined;
    if (s == "baseline:itdl") return ModelKind::baseline_itdl;
    throw std::invalid_argument("unknown model '" + s +
                                "' (expected trip|od|baseline:{checkin,distance,combined,itdl})");
}

std::string run_config_to_json(const RunConfig& cfg) {
    nlohmann::json j;
    j["places"] = cfg.places_path;
    j["trips"] = cfg.trips_path;
    j["model"] = to_string(cfg.model);
    j["snap_radius_m"] = cfg.snap_radius_m;
    j["utc_offset_seconds"] = cfg.utc_offset_seconds;
    j["window_hours"] = cfg.window_hours;
    j["max_contexts"] = cfg.max_contexts;
    j["dim"] = cfg.train.dim;
    j["epochs"] = cfg.train.epochs;
    j["negatives"] = cfg.train.negatives;
    j["lr_initial"] = cfg.train.lr_initial;
    j["lr_min"] = cfg.train.lr_min;
    j["noise_power"] = cfg.train.noise_power;
    j["mode"] = cfg.train.mode == TrainMode::exact_softmax ? "exact_softmax" : "negative_sampling";
    j["threads"] = cfg.train.threads;
    j["k_neighbors"] = cfg.spatial.k_neighbors;
    j["alpha"] = cfg.spatial.alpha;
    j["bin_width_m"] = cfg.spatial.bin_width_m;
    j["omega"] = cfg.spatial.omega;
    j["distance_unit_m"] = cfg.spatial.distance_unit_m;
    j["beta_max"] = cfg.spatial.beta_max;
    j["seed"] = cfg.seed;
    j["holdout_fraction"] = cfg.holdout_fraction;
    j["full_precision"] = cfg.full_precision;
    return j.dump(2);
}

RunConfig run_config_from_json(const std::string& json_text) {
    auto j = nlohmann::json::parse(json_text);
    RunConfig cfg;
    cfg.places_path = j.value("places", cfg.places_path);
    cfg.trips_path = j.value("trips", cfg.trips_path);
    if (j.contains("model")) cfg.model = model_kind_from_string(j["model"].get<std::string>());
    cfg.snap_radius_m = j.value("snap_radius_m", cfg.snap_radius_m);
    cfg.utc_offset_seconds = j.value("utc_offset_seconds", cfg.utc_offset_seconds);
    cfg.window_hours = j.value("window_hours", cfg.window_hours);
    cfg.max_contexts = j.value("max_contexts", cfg.max_contexts);
    cfg.train.dim = j.value("dim", cfg.train.dim);
    cfg.train.epochs = j.value("epochs", cfg.train.epochs);
    cfg.train.negatives = j.value("negatives", cfg.train.negatives);
    cfg.train.lr_initial = j.value("lr_initial", cfg.train.lr_initial);
    cfg.train.lr_min = j.value("lr_min", cfg.train.lr_min);
    cfg.train.noise_power = j.value("noise_power", cfg.train.noise_power);
    if (j.value("mode", "negative_sampling") == std::string("exact_softmax"))
        cfg.train.mode = TrainMode::exact_softmax;
    cfg.train.threads = j.value("threads", cfg.train.threads);
    cfg.spatial.k_neighbors = j.value("k_neighbors", cfg.spatial.k_neighbors);
    cfg.spatial.alpha = j.value("alpha", cfg.spatial.alpha);
    cfg.spatial.bin_width_m = j.value("bin_width_m", cfg.spatial.bin_width_m);
    cfg.spatial.omega = j.value("omega", cfg.spatial.omega);
    cfg.spatial.distance_unit_m = j.value("distance_unit_m", cfg.spatial.distance_unit_m);
    cfg.spatial.beta_max = j.value("beta_max", cfg.spatial.beta_max);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.holdout_fraction = j.value("holdout_fraction", cfg.holdout_fraction);
    cfg.full_precision = j.value("full_precision", cfg.full_precision);
    return cfg;
}

uint64_t RunConfig::config_hash() const { return mix64(hash_name(run_config_to_json(*this))); }

namespace {

bool is_trip_cache(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    char magic[6] = {};
    in.read(magic, 6);
    return in && std::string_view(magic, 6) == "PMTRIP";
}

}  // namespace

PipelineData load_data(const RunConfig& cfg) {
    PipelineData data;
    data.places = load_places(cfg.places_path);
    if (is_trip_cache(cfg.trips_path)) {
        data.trips = read_trip_cache(cfg.trips_path);
        data.checkins.counts.assign(data.places.places.size(), 0);
        for (const auto& t : data.trips) {
            if (t.origin >= data.places.places.size() || t.dest >= data.places.places.size())
                throw std::runtime_error("trip cache references unknown place ids");
            ++data.checkins.counts[t.dest];
        }
        data.drop_stats.total = data.drop_stats.retained = data.trips.size();
    } else {
        auto raw = load_trips_csv(cfg.trips_path, cfg.utc_offset_seconds);
        GridIndex index(data.places.locations(), cfg.snap_radius_m);
        auto snapped = snap_trips(raw, index, data.places.places.size(), cfg.snap_radius_m);
        data.trips = std::move(snapped.trips);
        data.checkins = std::move(snapped.checkins);
        data.drop_stats = std::move(snapped.stats);
    }
    return data;
}

PairSource make_pair_source(const RunConfig& cfg, const PipelineData& data) {
    switch (cfg.model) {
        case ModelKind::trip:
            return [&data](int) { return trip_pairs(data.trips); };
        case ModelKind::od: {
            ODConfig od;
            od.window_seconds = static_cast<int64_t>(cfg.window_hours * 3600.0);
            od.max_contexts_per_center = cfg.max_contexts;
            uint64_t seed = cfg.seed;
            return [&data, od, seed](int epoch) mutable {
                ODConfig e = od;
                e.seed = substream(seed, "od_epoch", epoch);
                return od_pairs(data.trips, e);
            };
        }
        default: {
            SpatialContextConfig sc = cfg.spatial;
            switch (cfg.model) {
                case ModelKind::baseline_checkin: sc.model = BaselineModel::checkin; break;
                case ModelKind::baseline_distance: sc.model = BaselineModel::distance; break;
                case ModelKind::baseline_combined: sc.model = BaselineModel::combined; break;
                default: sc.model = BaselineModel::itdl; break;
            }
            auto contexts = std::make_shared<std::vector<SpatialContext>>(
                spatial_contexts(data.places, sc));
            std::shared_ptr<TypeStats> stats;
            if (sc.model == BaselineModel::itdl)
                stats = std::make_shared<TypeStats>(data.places, data.checkins, sc.bin_width_m);
            auto pairs = std::make_shared<std::vector<TrainingPair>>(
                baseline_pairs(*contexts, data.places, data.checkins, stats.get(), sc));
            return [pairs](int) { return *pairs; };
        }
    }
}

TrainOutput run_training(const RunConfig& cfg, const PipelineData& data) {
    TrainConfig tc = cfg.train;
    tc.seed = substream(cfg.seed, "train");
    TrainOutput out;
    out.model = init_model(static_cast<Eigen::Index>(data.places.places.size()), tc);
    out.stats = train(out.model, make_pair_source(cfg, data), tc);
    return out;
}

EvalReport evaluate(const Matrix& vectors, const PipelineData& data, const EvalOptions& opts) {
    std::vector<bool> active(data.places.places.size(), false);
    for (const auto& t : data.trips) {
        active[t.origin] = true;
        active[t.dest] = true;
    }

    EvalReport report;
    std::vector<PlaceId> eval_set;
    for (PlaceId id = 0; id < active.size(); ++id) {
        if (!active[id]) continue;
        if (vectors.row(id).norm() == 0.0) {
            ++report.zero_vectors_excluded;
            continue;
        }
        eval_set.push_back(id);
    }
    if (opts.holdout_fraction > 0.0 && opts.holdout_fraction < 1.0) {
        Rng rng(substream(opts.holdout_seed, "holdout"));
        rng.shuffle(eval_set);
        size_t keep = std::max<size_t>(
            2, static_cast<size_t>(opts.holdout_fraction * eval_set.size()));
        eval_set.resize(std::min(keep, eval_set.size()));
        std::sort(eval_set.begin(), eval_set.end());
    }

    std::vector<uint32_t> labels(data.places.places.size());
    for (const auto& p : data.places.places) labels[p.id] = p.category;
    if (opts.shuffle_labels) {
        std::vector<uint32_t> subset;
        for (PlaceId id : eval_set) subset.push_back(labels[id]);
        Rng rng(substream(opts.shuffle_seed, "label_shuffle"));
        rng.shuffle(subset);
        for (size_t i = 0; i < eval_set.size(); ++i) labels[eval_set[i]] = subset[i];
    }

    report.match = match_rate(vectors, eval_set, labels);
    report.silhouette = silhouette(vectors, eval_set, labels);
    return report;
}

}  // namespace placemove
