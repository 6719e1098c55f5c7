// placemove: learn place embeddings from trip data and evaluate them.
//
// Subcommands: synth, ingest, pairs, train, eval, sweep, report.
// Exit codes: 0 success, 2 usage/input error, 3 internal invariant violation.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <unordered_map>

#include "CLI11.hpp"
#include "json.hpp"
#include "placemove/pipeline.hpp"
#include "placemove/rng.hpp"

namespace pm = placemove;
namespace fs = std::filesystem;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string cache_dir() {
    if (const char* env = std::getenv("PLACEMOVE_CACHE_DIR")) return env;
    return ".placemove_cache";
}

// Flags override config-file values which override defaults. CLI11 only
// records flags the user actually passed, so we load the file first and then
// re-apply passed flags on top.
struct CommonOpts {
    std::string config_path;
    pm::RunConfig cfg;

    void attach(CLI::App* app, bool with_train_flags) {
        app->add_option("--config", config_path, "JSON config file");
        app->add_option("--places", cfg.places_path, "places CSV");
        app->add_option("--trips", cfg.trips_path, "trips CSV or snapped cache");
        app->add_option("--seed", cfg.seed, "master seed");
        app->add_option("--snap-radius-m", cfg.snap_radius_m, "snapping radius in meters");
        app->add_option("--utc-offset", cfg.utc_offset_seconds, "timezone offset in seconds");
        if (with_train_flags) {
            app->add_option("--model", model_name, "trip|od|baseline:{checkin,distance,combined,itdl}");
            app->add_option("--dim", cfg.train.dim, "embedding dimension");
            app->add_option("--epochs", cfg.train.epochs, "training epochs");
            app->add_option("--negatives", cfg.train.negatives, "negative samples per positive");
            app->add_option("--lr", cfg.train.lr_initial, "initial learning rate");
            app->add_option("--window-hours", cfg.window_hours, "OD arrival-time window");
            app->add_option("--max-contexts", cfg.max_contexts, "OD context cap (0 = uncapped)");
            app->add_option("--threads", cfg.train.threads, "worker threads (1 = deterministic)");
            app->add_option("--noise-power", cfg.train.noise_power, "negative-sampling distribution power");
            app->add_option("--k-neighbors", cfg.spatial.k_neighbors, "baseline spatial contexts per place");
            app->add_option("--omega", cfg.spatial.omega, "itdl activity/uniqueness weight");
            app->add_flag("--exact-softmax", exact, "exact softmax mode (small vocabularies)");
            app->add_flag("--full-precision", cfg.full_precision, "hexfloat embedding output");
        }
    }

    // call after parsing: merge file + flags with flag precedence
    void resolve(CLI::App* app) {
        if (!config_path.empty()) {
            pm::RunConfig file_cfg = pm::run_config_from_json(read_file(config_path));
            pm::RunConfig flag_cfg = cfg;
            cfg = file_cfg;
            auto passed = [&](const std::string& name) { return app->count(name) > 0; };
            if (passed("--places")) cfg.places_path = flag_cfg.places_path;
            if (passed("--trips")) cfg.trips_path = flag_cfg.trips_path;
            if (passed("--seed")) cfg.seed = flag_cfg.seed;
            if (passed("--snap-radius-m")) cfg.snap_radius_m = flag_cfg.snap_radius_m;
            if (passed("--utc-offset")) cfg.utc_offset_seconds = flag_cfg.utc_offset_seconds;
            if (app->get_option_no_throw("--dim")) {
                if (passed("--dim")) cfg.train.dim = flag_cfg.train.dim;
                if (passed("--epochs")) cfg.train.epochs = flag_cfg.train.epochs;
                if (passed("--negatives")) cfg.train.negatives = flag_cfg.train.negatives;
                if (passed("--lr")) cfg.train.lr_initial = flag_cfg.train.lr_initial;
                if (passed("--window-hours")) cfg.window_hours = flag_cfg.window_hours;
                if (passed("--max-contexts")) cfg.max_contexts = flag_cfg.max_contexts;
                if (passed("--threads")) cfg.train.threads = flag_cfg.train.threads;
                if (passed("--noise-power")) cfg.train.noise_power = flag_cfg.train.noise_power;
                if (passed("--k-neighbors")) cfg.spatial.k_neighbors = flag_cfg.spatial.k_neighbors;
                if (passed("--omega")) cfg.spatial.omega = flag_cfg.spatial.omega;
            }
        }
        if (!model_name.empty()) cfg.model = pm::model_kind_from_string(model_name);
        if (exact) cfg.train.mode = pm::TrainMode::exact_softmax;
    }

    std::string model_name;
    bool exact = false;
};

void require_file(const std::string& path, const char* what) {
    if (path.empty() || !fs::exists(path))
        throw CLI::ValidationError(std::string(what) + " file not found: " +
                                   (path.empty() ? "(unset)" : path));
}

int cmd_synth(const std::string& out_dir, uint64_t seed, size_t n_places, size_t n_trips) {
    pm::SynthConfig cfg = pm::city5_config(seed);
    cfg.n_places = n_places;
    cfg.n_trips = n_trips;
    auto out = pm::generate(cfg, out_dir);
    std::cout << "places=" << out.places_path << "\ntrips=" << out.trips_path
              << "\nmanifest=" << out.manifest_path << "\n";
    return 0;
}

int cmd_ingest(CommonOpts& opts, const std::string& out_path) {
    require_file(opts.cfg.places_path, "places");
    require_file(opts.cfg.trips_path, "trips");
    auto data = pm::load_data(opts.cfg);
    pm::write_trip_cache(out_path, data.trips);
    const auto& st = data.drop_stats;
    std::cout << "total=" << st.total << "\nretained=" << st.retained
              << "\nretention=" << st.retention() << "\n";
    for (const auto& [reason, n] : st.dropped_by_reason)
        std::cout << "dropped." << reason << "=" << n << "\n";
    std::cout << "cache=" << out_path << "\n";
    return 0;
}

int cmd_pairs(CommonOpts& opts, const std::string& out_path) {
    require_file(opts.cfg.places_path, "places");
    require_file(opts.cfg.trips_path, "trips");
    auto data = pm::load_data(opts.cfg);
    auto source = pm::make_pair_source(opts.cfg, data);
    pm::write_pairs_csv(out_path, source(0));
    std::cout << "pairs=" << out_path << "\n";
    return 0;
}

int cmd_train(CommonOpts& opts, const std::string& out_path, const std::string& ckpt_path) {
    require_file(opts.cfg.places_path, "places");
    require_file(opts.cfg.trips_path, "trips");
    auto data = pm::load_data(opts.cfg);
    auto trained = pm::run_training(opts.cfg, data);

    std::vector<std::string> ids;
    for (const auto& p : data.places.places) ids.push_back(p.external_id);
    pm::write_embedding(out_path, trained.model, ids, opts.cfg.full_precision);
    if (!ckpt_path.empty())
        pm::write_checkpoint(ckpt_path, trained.model, opts.cfg.config_hash());

    std::cout << "embedding=" << out_path << "\n";
    for (size_t e = 0; e < trained.stats.epoch_pair_counts.size(); ++e) {
        std::cout << "epoch." << e << ".pairs=" << trained.stats.epoch_pair_counts[e];
        if (e < trained.stats.epoch_objectives.size())
            std::cout << " objective=" << trained.stats.epoch_objectives[e];
        std::cout << "\n";
    }
    return 0;
}

int cmd_eval(CommonOpts& opts, const std::string& embedding_path, const std::string& out_json,
             const std::string& rank_freq_path, bool shuffle_labels, double holdout) {
    require_file(opts.cfg.places_path, "places");
    require_file(opts.cfg.trips_path, "trips");
    require_file(embedding_path, "embedding");
    auto data = pm::load_data(opts.cfg);

    auto emb = pm::read_embedding(embedding_path);
    // align embedding rows to place ids via external ids
    std::unordered_map<std::string, size_t> row_of;
    for (size_t i = 0; i < emb.external_ids.size(); ++i) row_of[emb.external_ids[i]] = i;
    pm::Matrix vectors = pm::Matrix::Zero(data.places.places.size(), emb.vectors.cols());
    for (const auto& p : data.places.places) {
        auto it = row_of.find(p.external_id);
        if (it == row_of.end())
            throw CLI::ValidationError("embedding is missing place " + p.external_id);
        vectors.row(p.id) = emb.vectors.row(static_cast<Eigen::Index>(it->second));
    }

    pm::EvalOptions eopts;
    eopts.shuffle_labels = shuffle_labels;
    eopts.shuffle_seed = opts.cfg.seed;
    eopts.holdout_fraction = holdout;
    eopts.holdout_seed = opts.cfg.seed;
    auto report = pm::evaluate(vectors, data, eopts);

    std::cout << pm::report_to_text(report, data.places.categories);
    if (!out_json.empty()) {
        std::ofstream out(out_json);
        out << pm::report_to_json(report, data.places.categories) << "\n";
        std::cout << "report=" << out_json << "\n";
    }
    if (!rank_freq_path.empty()) {
        pm::write_rank_frequency_csv(rank_freq_path, data.trips);
        auto fit = pm::power_law_fit(data.trips);
        std::cout << "power_law.slope=" << fit.slope << "\npower_law.r_squared="
                  << fit.r_squared << "\nrank_freq=" << rank_freq_path << "\n";
    }
    return 0;
}

int cmd_sweep(CommonOpts& opts, const std::string& parameter, const std::string& values_csv,
              const std::string& out_path) {
    require_file(opts.cfg.places_path, "places");
    require_file(opts.cfg.trips_path, "trips");

    std::vector<double> values;
    std::stringstream ss(values_csv);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!tok.empty()) values.push_back(std::stod(tok));
    if (values.empty()) throw CLI::ValidationError("sweep: no values given");

    // snap once, reuse the cached trips for every sweep point
    fs::create_directories(cache_dir());
    auto data = pm::load_data(opts.cfg);

    std::ofstream out(out_path);
    if (!out) throw CLI::ValidationError("cannot write sweep output: " + out_path);
    out << parameter << ",match_rate,silhouette\n";
    for (double v : values) {
        pm::RunConfig cfg = opts.cfg;
        if (parameter == "window-hours") cfg.window_hours = v;
        else if (parameter == "dim") cfg.train.dim = static_cast<int>(v);
        else if (parameter == "epochs") cfg.train.epochs = static_cast<int>(v);
        else if (parameter == "negatives") cfg.train.negatives = static_cast<int>(v);
        else throw CLI::ValidationError("unknown sweep parameter '" + parameter + "'");

        auto trained = pm::run_training(cfg, data);
        auto report = pm::evaluate(trained.model.center, data);
        out << v << ',' << report.match.match_rate << ',' << report.silhouette.mean << '\n';
        std::cout << parameter << "=" << v << " match_rate=" << report.match.match_rate
                  << " silhouette=" << report.silhouette.mean << "\n";
    }
    std::cout << "sweep=" << out_path << "\n";
    return 0;
}

int cmd_report(const std::string& report_path) {
    require_file(report_path, "report");
    auto j = nlohmann::json::parse(read_file(report_path));
    std::cout << "match_rate=" << j["match_rate"].get<double>() << "\n";
    std::cout << "n_evaluated=" << j["n_evaluated"].get<uint64_t>() << "\n";
    std::cout << "silhouette_mean=" << j["silhouette_mean"].get<double>() << "\n";
    for (auto& [name, val] : j["silhouette_per_category"].items())
        std::cout << "silhouette." << name << "=" << val.get<double>() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"place embeddings from movement data"};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic city dataset");
    std::string synth_out = "city5";
    uint64_t synth_seed = 42;
    size_t synth_places = 200, synth_trips = 50000;
    synth->add_option("--out", synth_out, "output directory");
    synth->add_option("--seed", synth_seed);
    synth->add_option("--n-places", synth_places);
    synth->add_option("--n-trips", synth_trips);

    CommonOpts ingest_opts, pairs_opts, train_opts, eval_opts, sweep_opts;
    std::string ingest_out = "trips.pmtrips";
    auto* ingest = app.add_subcommand("ingest", "snap trips to places and cache them");
    ingest_opts.attach(ingest, false);
    ingest->add_option("--out", ingest_out, "snapped-trip cache path");

    std::string pairs_out = "pairs.csv";
    auto* pairs = app.add_subcommand("pairs", "dump training pairs as CSV");
    pairs_opts.attach(pairs, true);
    pairs->add_option("--out", pairs_out);

    std::string train_out = "embedding.txt", train_ckpt;
    auto* train = app.add_subcommand("train", "train an embedding model");
    train_opts.attach(train, true);
    train->add_option("--out", train_out, "embedding output (word2vec text format)");
    train->add_option("--checkpoint", train_ckpt, "binary checkpoint path");

    std::string eval_embedding, eval_json, eval_rank_freq;
    bool eval_shuffle = false;
    double eval_holdout = 0.0;
    auto* eval = app.add_subcommand("eval", "evaluate an embedding");
    eval_opts.attach(eval, false);
    eval->add_option("--embedding", eval_embedding, "embedding file")->required();
    eval->add_option("--out", eval_json, "JSON report path");
    eval->add_option("--dump-rank-freq", eval_rank_freq, "rank,frequency CSV path");
    eval->add_flag("--shuffle-labels", eval_shuffle, "permutation control");
    eval->add_option("--holdout", eval_holdout, "evaluate a seeded random fraction");

    std::string sweep_param = "window-hours", sweep_values = "0.5,1,2", sweep_out = "sweep.csv";
    auto* sweep = app.add_subcommand("sweep", "sweep one parameter, emit plot-ready CSV");
    sweep_opts.attach(sweep, true);
    sweep->add_option("--parameter", sweep_param, "window-hours|dim|epochs|negatives");
    sweep->add_option("--values", sweep_values, "comma-separated values");
    sweep->add_option("--out", sweep_out);

    std::string report_path;
    auto* report = app.add_subcommand("report", "print a JSON eval report as key=value text");
    report->add_option("--report", report_path, "report JSON")->required();

    try {
        app.parse(argc, argv);
        if (synth->parsed()) return cmd_synth(synth_out, synth_seed, synth_places, synth_trips);
        if (ingest->parsed()) {
            ingest_opts.resolve(ingest);
            return cmd_ingest(ingest_opts, ingest_out);
        }
        if (pairs->parsed()) {
            pairs_opts.resolve(pairs);
            return cmd_pairs(pairs_opts, pairs_out);
        }
        if (train->parsed()) {
            train_opts.resolve(train);
            return cmd_train(train_opts, train_out, train_ckpt);
        }
        if (eval->parsed()) {
            eval_opts.resolve(eval);
            return cmd_eval(eval_opts, eval_embedding, eval_json, eval_rank_freq, eval_shuffle,
                            eval_holdout);
        }
        if (sweep->parsed()) {
            sweep_opts.resolve(sweep);
            return cmd_sweep(sweep_opts, sweep_param, sweep_values, sweep_out);
        }
        if (report->parsed()) return cmd_report(report_path);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const CLI::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
