#include "placemove/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <thread>

namespace placemove {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

void TrainConfig::validate() const {
    if (dim < 1) throw std::invalid_argument("dim must be >= 1");
    if (epochs < 0) throw std::invalid_argument("epochs must be >= 0");
    if (mode == TrainMode::negative_sampling && negatives < 1)
        throw std::invalid_argument("negatives must be >= 1 in negative_sampling mode");
    if (!(lr_min > 0.0 && lr_min <= lr_initial))
        throw std::invalid_argument("require 0 < lr_min <= lr_initial");
    if (threads < 1) throw std::invalid_argument("threads must be >= 1");
}

EmbeddingModel init_model(Eigen::Index n_places, const TrainConfig& cfg) {
    if (n_places < 1) throw std::invalid_argument("init_model: need at least one place");
    cfg.validate();

    EmbeddingModel m;
    m.center.resize(n_places, cfg.dim);
    m.context = Matrix::Zero(n_places, cfg.dim);

    const double half = 0.5 / static_cast<double>(cfg.dim);
    Rng rng(substream(cfg.seed, "init"));
    for (Eigen::Index i = 0; i < n_places; ++i)
        for (Eigen::Index j = 0; j < cfg.dim; ++j)
            m.center(i, j) = rng.uniform(-half, half);
    return m;
}

NoiseTable::NoiseTable(const std::vector<uint64_t>& context_freq, double power) {
    double total = 0.0;
    for (size_t i = 0; i < context_freq.size(); ++i) {
        if (context_freq[i] == 0) continue;
        ids_.push_back(static_cast<PlaceId>(i));
        total += std::pow(static_cast<double>(context_freq[i]), power);
    }
    if (ids_.empty()) throw std::invalid_argument("NoiseTable: no context occurrences");
    cum_.reserve(ids_.size());
    double acc = 0.0;
    for (PlaceId id : ids_) {
        acc += std::pow(static_cast<double>(context_freq[id]), power) / total;
        cum_.push_back(acc);
    }
    cum_.back() = 1.0;
}

NoiseTable NoiseTable::from_pairs(const std::vector<TrainingPair>& pairs, size_t n_places,
                                  double power) {
    std::vector<uint64_t> freq(n_places, 0);
    for (const auto& p : pairs) ++freq[p.context];
    return NoiseTable(freq, power);
}

PlaceId NoiseTable::sample(Rng& rng) const {
    double u = rng.uniform();
    auto it = std::upper_bound(cum_.begin(), cum_.end(), u);
    if (it == cum_.end()) --it;
    return ids_[static_cast<size_t>(it - cum_.begin())];
}

void sgns_step(EmbeddingModel& model, const TrainingPair& pair, double lr,
               const NoiseTable& noise, int negatives, Rng& rng) {
    auto v = model.center.row(pair.center);
    Eigen::RowVectorXd v_grad = Eigen::RowVectorXd::Zero(model.dim());

    // positive
    {
        auto u = model.context.row(pair.context);
        double g = 1.0 - sigmoid(u.dot(v));
        v_grad += g * u;
        model.context.row(pair.context) += (lr * g) * v;
    }
    // negatives; redraw on collision with the true context unless the noise
    // support leaves no alternative
    const bool can_redraw = noise.support_size() > 1;
    for (int n = 0; n < negatives; ++n) {
        PlaceId neg = noise.sample(rng);
        if (neg == pair.context) {
            if (!can_redraw) continue;
            int tries = 0;
            while (neg == pair.context && ++tries < 64) neg = noise.sample(rng);
            if (neg == pair.context) continue;
        }
        auto u = model.context.row(neg);
        double g = -sigmoid(u.dot(v));
        v_grad += g * u;
        model.context.row(neg) += (lr * g) * v;
    }
    model.center.row(pair.center) += lr * v_grad;
}

void exact_softmax_step(EmbeddingModel& model, const TrainingPair& pair, double lr) {
    auto v = model.center.row(pair.center);
    Eigen::VectorXd scores = model.context * v.transpose();
    double mx = scores.maxCoeff();
    Eigen::VectorXd p = (scores.array() - mx).exp();
    p /= p.sum();

    // d(-log softmax)/dv = Σ_k p_k u_k - u_ctx ; per-row context gradient is
    // (1[k=ctx] - p_k) v
    Eigen::RowVectorXd v_grad = model.context.row(pair.context) - p.transpose() * model.context;
    model.context.noalias() += (lr * -1.0) * (p * v);
    model.context.row(pair.context) += lr * v;
    model.center.row(pair.center) += lr * v_grad;
}

double exact_softmax_objective(const EmbeddingModel& model,
                               const std::vector<TrainingPair>& pairs) {
    if (model.vocab_size() > 10000)
        throw std::invalid_argument("exact_softmax_objective: vocabulary exceeds 10,000");
    if (pairs.empty()) return 0.0;

    double total = 0.0;
    for (const auto& pr : pairs) {
        Eigen::VectorXd scores = model.context * model.center.row(pr.center).transpose();
        double mx = scores.maxCoeff();
        double lse = mx + std::log((scores.array() - mx).exp().sum());
        total += scores(pr.context) - lse;
    }
    return total / static_cast<double>(pairs.size());
}

namespace {

void train_epoch_threaded(EmbeddingModel& model, const std::vector<TrainingPair>& pairs,
                          const TrainConfig& cfg, const NoiseTable& noise, double lr_start,
                          double lr_span, uint64_t done_before, uint64_t total, int epoch) {
    // Hogwild-style shard workers with racy shared writes; acceptable for
    // sparse SGNS updates, documented as nondeterministic.
    const int nt = cfg.threads;
    std::vector<std::thread> workers;
    for (int w = 0; w < nt; ++w) {
        workers.emplace_back([&, w] {
            Rng rng(substream(cfg.seed, "train_worker",
                              static_cast<uint64_t>(epoch) * 1000 + w));
            size_t begin = pairs.size() * w / nt;
            size_t end = pairs.size() * (w + 1) / nt;
            for (size_t i = begin; i < end; ++i) {
                double progress =
                    static_cast<double>(done_before + i) / static_cast<double>(total);
                double lr = std::max(cfg.lr_min, lr_start - lr_span * progress);
                sgns_step(model, pairs[i], lr, noise, cfg.negatives, rng);
            }
        });
    }
    for (auto& t : workers) t.join();
}

}  // namespace

TrainStats train(EmbeddingModel& model, const PairSource& source, const TrainConfig& cfg) {
    cfg.validate();
    TrainStats stats;
    if (cfg.epochs == 0) return stats;

    std::vector<TrainingPair> pairs = source(0);
    const uint64_t per_epoch = pairs.size();
    const uint64_t total = std::max<uint64_t>(1, per_epoch * cfg.epochs);
    const double lr_span = cfg.lr_initial - cfg.lr_min;

    NoiseTable noise = cfg.mode == TrainMode::negative_sampling
                           ? NoiseTable::from_pairs(pairs, model.vocab_size(), cfg.noise_power)
                           : NoiseTable(std::vector<uint64_t>{1}, 1.0);

    uint64_t done = 0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        if (epoch > 0) pairs = source(epoch);
        if (pairs.size() != per_epoch)
            throw std::runtime_error("pair source must produce a stable per-epoch count");

        Rng shuffle_rng(substream(cfg.seed, "epoch_shuffle", epoch));
        shuffle_rng.shuffle(pairs);

        if (cfg.mode == TrainMode::exact_softmax || cfg.threads == 1) {
            Rng rng(substream(cfg.seed, "train", epoch));
            for (size_t i = 0; i < pairs.size(); ++i) {
                double progress = static_cast<double>(done + i) / static_cast<double>(total);
                double lr = std::max(cfg.lr_min, cfg.lr_initial - lr_span * progress);
                if (cfg.mode == TrainMode::exact_softmax)
                    exact_softmax_step(model, pairs[i], lr);
                else
                    sgns_step(model, pairs[i], lr, noise, cfg.negatives, rng);
            }
        } else {
            train_epoch_threaded(model, pairs, cfg, noise, cfg.lr_initial, lr_span, done,
                                 total, epoch);
        }
        done += pairs.size();
        stats.epoch_pair_counts.push_back(pairs.size());
        if (cfg.mode == TrainMode::exact_softmax)
            stats.epoch_objectives.push_back(exact_softmax_objective(model, pairs));
    }
    return stats;
}

void write_embedding(const std::string& path, const EmbeddingModel& model,
                     const std::vector<std::string>& external_ids, bool full_precision) {
    if (static_cast<Eigen::Index>(external_ids.size()) != model.vocab_size())
        throw std::invalid_argument("write_embedding: id count does not match vocabulary");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write embedding file: " + path);

    out << model.vocab_size() << ' ' << model.dim() << '\n';
    char buf[40];
    for (Eigen::Index i = 0; i < model.vocab_size(); ++i) {
        out << external_ids[i];
        for (Eigen::Index j = 0; j < model.dim(); ++j) {
            std::snprintf(buf, sizeof(buf), full_precision ? "%a" : "%.6g", model.center(i, j));
            out << ' ' << buf;
        }
        out << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

LoadedEmbedding read_embedding(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open embedding file: " + path);
    Eigen::Index n = 0, d = 0;
    if (!(in >> n >> d) || n < 1 || d < 1)
        throw std::runtime_error("bad embedding header in " + path);

    LoadedEmbedding le;
    le.vectors.resize(n, d);
    le.external_ids.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!(in >> le.external_ids[i]))
            throw std::runtime_error("truncated embedding file: " + path);
        for (Eigen::Index j = 0; j < d; ++j) {
            std::string tok;
            if (!(in >> tok)) throw std::runtime_error("truncated embedding file: " + path);
            le.vectors(i, j) = std::strtod(tok.c_str(), nullptr);
        }
    }
    return le;
}

namespace {
constexpr char kCkptMagic[8] = {'P', 'M', 'C', 'K', 'P', 'T', '0', '1'};
}

void write_checkpoint(const std::string& path, const EmbeddingModel& model,
                      uint64_t config_hash) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
    out.write(kCkptMagic, sizeof(kCkptMagic));
    uint64_t n = model.vocab_size(), d = model.dim();
    out.write(reinterpret_cast<const char*>(&n), 8);
    out.write(reinterpret_cast<const char*>(&d), 8);
    out.write(reinterpret_cast<const char*>(&config_hash), 8);
    out.write(reinterpret_cast<const char*>(model.center.data()),
              static_cast<std::streamsize>(n * d * sizeof(double)));
    out.write(reinterpret_cast<const char*>(model.context.data()),
              static_cast<std::streamsize>(n * d * sizeof(double)));
    if (!out) throw std::runtime_error("write failed: " + path);
}

EmbeddingModel read_checkpoint(const std::string& path, uint64_t* config_hash) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kCkptMagic, 8) != 0)
        throw std::runtime_error("not a checkpoint file: " + path);
    uint64_t n = 0, d = 0, hash = 0;
    in.read(reinterpret_cast<char*>(&n), 8);
    in.read(reinterpret_cast<char*>(&d), 8);
    in.read(reinterpret_cast<char*>(&hash), 8);
    if (config_hash) *config_hash = hash;

    EmbeddingModel m;
    m.center.resize(n, d);
    m.context.resize(n, d);
    in.read(reinterpret_cast<char*>(m.center.data()),
            static_cast<std::streamsize>(n * d * sizeof(double)));
    in.read(reinterpret_cast<char*>(m.context.data()),
            static_cast<std::streamsize>(n * d * sizeof(double)));
    if (!in) throw std::runtime_error("truncated checkpoint: " + path);
    return m;
}

}  // namespace placemove
