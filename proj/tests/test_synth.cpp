#include "doctest.h"
#include "placemove/eval.hpp"
#include "placemove/pipeline.hpp"
#include "placemove/synth.hpp"

#include <cmath>

#include "json.hpp"
#include "test_util.hpp"

using namespace placemove;
using pmtest::TempDir;

TEST_CASE("generate: zero trips gives a valid places file and empty trips") {
    TempDir tmp("pm_synth");
    SynthConfig cfg = city5_config(1);
    cfg.n_trips = 0;
    auto out = generate(cfg, tmp.file("c"));
    auto ps = load_places(out.places_path);
    CHECK(ps.places.size() == cfg.n_places);
    CHECK(ps.categories.size() == cfg.n_categories);
    CHECK(load_trips_csv(out.trips_path).empty());
}

TEST_CASE("generate: identity flow matrix keeps trips within category") {
    TempDir tmp("pm_synth");
    SynthConfig cfg = city5_config(2);
    cfg.n_places = 50;
    cfg.n_trips = 500;
    cfg.flow_matrix.assign(5, std::vector<double>(5, 0.0));
    for (int c = 0; c < 5; ++c) cfg.flow_matrix[c][c] = 1.0;
    cfg.time_profiles.clear();
    cfg.time_profiles.assign(5, std::vector<TimeProfile>(5));
    auto out = generate(cfg, tmp.file("c"));

    RunConfig rc;
    rc.places_path = out.places_path;
    rc.trips_path = out.trips_path;
    auto data = load_data(rc);
    REQUIRE(data.trips.size() == 500);
    for (const auto& t : data.trips)
        CHECK(data.places.places[t.origin].category == data.places.places[t.dest].category);
}

TEST_CASE("generate: byte-identical outputs for identical config") {
    TempDir tmp("pm_synth");
    SynthConfig cfg = city5_config(3);
    cfg.n_places = 40;
    cfg.n_trips = 300;
    auto a = generate(cfg, tmp.file("a"));
    auto b = generate(cfg, tmp.file("b"));
    CHECK(pmtest::read_file(a.places_path) == pmtest::read_file(b.places_path));
    CHECK(pmtest::read_file(a.trips_path) == pmtest::read_file(b.trips_path));
    CHECK(pmtest::read_file(a.manifest_path) == pmtest::read_file(b.manifest_path));
}

TEST_CASE("generate: invalid configs are rejected") {
    SynthConfig cfg = city5_config(4);
    cfg.n_places = 3;  // fewer places than categories
    CHECK_THROWS_AS(generate(cfg, "/tmp/pm_synth_invalid"), std::invalid_argument);

    cfg = city5_config(4);
    cfg.flow_matrix[0][0] = 0.5;  // row no longer sums to 1
    CHECK_THROWS_AS(generate(cfg, "/tmp/pm_synth_invalid"), std::invalid_argument);
}

TEST_CASE("generate: transition frequencies converge to the flow matrix") {
    TempDir tmp("pm_synth");
    SynthConfig cfg = city5_config(5);
    cfg.n_trips = 20000;
    auto out = generate(cfg, tmp.file("c"));
    auto manifest = nlohmann::json::parse(pmtest::read_file(out.manifest_path));
    auto counts = manifest["category_transition_counts"]
                      .get<std::vector<std::vector<uint64_t>>>();

    std::vector<uint64_t> row_totals(5, 0);
    for (int o = 0; o < 5; ++o)
        for (int d = 0; d < 5; ++d) row_totals[o] += counts[o][d];

    for (int o = 0; o < 5; ++o) {
        REQUIRE(row_totals[o] > 100);
        for (int d = 0; d < 5; ++d) {
            double p = cfg.flow_matrix[o][d];
            double n = static_cast<double>(row_totals[o]);
            double sigma = std::sqrt(std::max(1e-12, p * (1.0 - p) / n));
            double phat = static_cast<double>(counts[o][d]) / n;
            CHECK(std::abs(phat - p) <= 3.0 * sigma + 1e-9);
        }
    }
}

TEST_CASE("generate: zipf origins reproduce the configured exponent") {
    TempDir tmp("pm_synth");
    SynthConfig cfg = city5_config(6);
    cfg.n_places = 50;
    cfg.n_trips = 10000;
    cfg.zipf_s = 1.2;
    auto out = generate(cfg, tmp.file("c"));

    RunConfig rc;
    rc.places_path = out.places_path;
    rc.trips_path = out.trips_path;
    auto data = load_data(rc);
    auto fit = power_law_fit(data.trips);
    CHECK(std::abs(fit.slope + 1.2) < 0.15);
}
