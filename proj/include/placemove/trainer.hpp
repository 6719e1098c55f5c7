#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "placemove/pairs.hpp"
#include "placemove/rng.hpp"

namespace placemove {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class TrainMode { negative_sampling, exact_softmax };

struct TrainConfig {
    int dim = 180;
    int epochs = 6;
    int negatives = 5;
    double lr_initial = 0.025;
    double lr_min = 1e-4;
    double noise_power = 0.75;
    uint64_t seed = 0;
    TrainMode mode = TrainMode::negative_sampling;
    int threads = 1;

    void validate() const;
};

struct EmbeddingModel {
    Matrix center;   // Φ, |N| x d; rows are the reported place vectors
    Matrix context;  // Φ', |N| x d

    Eigen::Index vocab_size() const { return center.rows(); }
    Eigen::Index dim() const { return center.cols(); }
};

// Φ i.i.d. uniform in [-0.5/d, 0.5/d], Φ' zero.
EmbeddingModel init_model(Eigen::Index n_places, const TrainConfig& cfg);

// Cumulative distribution over context ids proportional to freq^noise_power.
class NoiseTable {
public:
    NoiseTable(const std::vector<uint64_t>& context_freq, double power);
    static NoiseTable from_pairs(const std::vector<TrainingPair>& pairs, size_t n_places,
                                 double power);

    PlaceId sample(Rng& rng) const;
    size_t support_size() const { return ids_.size(); }

private:
    std::vector<PlaceId> ids_;    // places with nonzero frequency
    std::vector<double> cum_;     // cumulative probability, ends at 1
};

// One SGNS update: gradient of -log σ(u_ctx·v) - Σ log σ(-u_neg·v), negatives
// redrawn when they collide with the true context.
void sgns_step(EmbeddingModel& model, const TrainingPair& pair, double lr,
               const NoiseTable& noise, int negatives, Rng& rng);

// Full-softmax gradient step over all places as candidate contexts.
void exact_softmax_step(EmbeddingModel& model, const TrainingPair& pair, double lr);

// Mean log p(context|center) with the softmax denominator over all places.
// Guard: vocabulary must be <= 10,000.
double exact_softmax_objective(const EmbeddingModel& model,
                               const std::vector<TrainingPair>& pairs);

// Regenerable per-epoch pair stream; must return the same count every epoch.
using PairSource = std::function<std::vector<TrainingPair>(int epoch)>;

struct TrainStats {
    std::vector<uint64_t> epoch_pair_counts;
    std::vector<double> epoch_objectives;  // exact mode only
};

// γ epochs of SGD; lr decays linearly from lr_initial to lr_min over the total
// scheduled pair count. Pairs are shuffled with a per-epoch seed. threads > 1
// (negative-sampling mode only) uses racy shared-matrix updates and is
// nondeterministic; threads == 1 is bit-reproducible.
TrainStats train(EmbeddingModel& model, const PairSource& source, const TrainConfig& cfg);

// word2vec text format: first line `|N| d`, then `external_id v_1 ... v_d`.
void write_embedding(const std::string& path, const EmbeddingModel& model,
                     const std::vector<std::string>& external_ids,
                     bool full_precision = false);

struct LoadedEmbedding {
    Matrix vectors;
    std::vector<std::string> external_ids;
};
LoadedEmbedding read_embedding(const std::string& path);

// Binary checkpoint: both matrices plus a caller-supplied config hash.
void write_checkpoint(const std::string& path, const EmbeddingModel& model,
                      uint64_t config_hash);
EmbeddingModel read_checkpoint(const std::string& path, uint64_t* config_hash = nullptr);

}  // namespace placemove
