#pragma once

#include <optional>
#include <string>

#include "placemove/baselines.hpp"
#include "placemove/eval.hpp"
#include "placemove/ingest.hpp"
#include "placemove/pairs.hpp"
#include "placemove/synth.hpp"
#include "placemove/trainer.hpp"

namespace placemove {

enum class ModelKind { trip, od, baseline_checkin, baseline_distance, baseline_combined, baseline_itdl };

std::string to_string(ModelKind k);
ModelKind model_kind_from_string(const std::string& s);

struct RunConfig {
    std::string places_path;
    std::string trips_path;      // CSV or snapped binary cache (auto-detected)
    ModelKind model = ModelKind::od;
    double snap_radius_m = 200.0;
    int64_t utc_offset_seconds = 0;
    double window_hours = 1.0;   // W_d, OD model
    uint32_t max_contexts = 100; // 0 = uncapped
    TrainConfig train;           // dim/epochs/negatives/lr/seed/mode/threads
    SpatialContextConfig spatial;
    uint64_t seed = 42;
    double holdout_fraction = 0.0;  // 0 = leave-one-out over all active places
    bool full_precision = false;

    uint64_t config_hash() const;
};

// JSON round-trip for --config files; flags override loaded values.
std::string run_config_to_json(const RunConfig& cfg);
RunConfig run_config_from_json(const std::string& json_text);

struct PipelineData {
    PlaceSet places;
    std::vector<Trip> trips;
    CheckinCounts checkins;
    DropStats drop_stats;
};

// Load places + trips (snapping CSVs, or reading a cache file directly).
PipelineData load_data(const RunConfig& cfg);

// Per-epoch pair source for the configured model; seeds derive from
// (cfg.seed, epoch) so OD subsampling is re-drawn each epoch.
PairSource make_pair_source(const RunConfig& cfg, const PipelineData& data);

struct TrainOutput {
    EmbeddingModel model;
    TrainStats stats;
};

TrainOutput run_training(const RunConfig& cfg, const PipelineData& data);

// Eval set: places with >= 1 trip endpoint and a nonzero vector; labels can be
// shuffled (seeded) for the permutation control.
struct EvalOptions {
    bool shuffle_labels = false;
    uint64_t shuffle_seed = 0;
    double holdout_fraction = 0.0;
    uint64_t holdout_seed = 0;
};

EvalReport evaluate(const Matrix& vectors, const PipelineData& data,
                    const EvalOptions& opts = {});

}  // namespace placemove
