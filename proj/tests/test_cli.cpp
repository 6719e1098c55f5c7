#include "doctest.h"

#include <algorithm>
#include <cstdlib>
#include <string>
#include <sys/wait.h>

#include "test_util.hpp"

using pmtest::TempDir;
using pmtest::read_file;

namespace {

const std::string cli = PLACEMOVE_CLI_PATH;

int run(const std::string& args, const std::string& log_path) {
    std::string cmd = cli + " " + args + " >" + log_path + " 2>&1";
    int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

}  // namespace

TEST_CASE("cli: full pipeline on a small synthetic city") {
    TempDir tmp("pm_cli");
    const std::string log = tmp.file("log.txt");

    CHECK(run("synth --out " + tmp.file("city") + " --seed 5 --n-places 60 --n-trips 2000",
              log) == 0);

    CHECK(run("ingest --places " + tmp.file("city/places.csv") + " --trips " +
                  tmp.file("city/trips.csv") + " --out " + tmp.file("trips.bin"),
              log) == 0);
    CHECK(read_file(log).find("retention=1") != std::string::npos);

    CHECK(run("train --places " + tmp.file("city/places.csv") + " --trips " +
                  tmp.file("trips.bin") +
                  " --model od --dim 16 --epochs 2 --seed 5 --out " + tmp.file("emb.txt"),
              log) == 0);

    CHECK(run("eval --places " + tmp.file("city/places.csv") + " --trips " +
                  tmp.file("trips.bin") + " --embedding " + tmp.file("emb.txt") + " --out " +
                  tmp.file("report.json") + " --dump-rank-freq " + tmp.file("rank.csv"),
              log) == 0);
    CHECK(read_file(log).find("match_rate=") != std::string::npos);
    CHECK(read_file(tmp.file("rank.csv")).substr(0, 15) == "rank,frequency\n");

    CHECK(run("report --report " + tmp.file("report.json"), log) == 0);
    CHECK(read_file(log).find("silhouette_mean=") != std::string::npos);
}

TEST_CASE("cli: --epochs 0 reproduces the initialization") {
    TempDir tmp("pm_cli");
    const std::string log = tmp.file("log.txt");
    REQUIRE(run("synth --out " + tmp.file("city") + " --seed 6 --n-places 40 --n-trips 500",
                log) == 0);

    std::string base = "train --places " + tmp.file("city/places.csv") + " --trips " +
                       tmp.file("city/trips.csv") + " --model trip --dim 8 --seed 6 ";
    CHECK(run(base + "--epochs 0 --out " + tmp.file("a.txt"), log) == 0);
    CHECK(run(base + "--epochs 0 --out " + tmp.file("b.txt"), log) == 0);
    CHECK(read_file(tmp.file("a.txt")) == read_file(tmp.file("b.txt")));
}

TEST_CASE("cli: same seed gives identical embedding files") {
    TempDir tmp("pm_cli");
    const std::string log = tmp.file("log.txt");
    REQUIRE(run("synth --out " + tmp.file("city") + " --seed 7 --n-places 50 --n-trips 1500",
                log) == 0);
    std::string base = "train --places " + tmp.file("city/places.csv") + " --trips " +
                       tmp.file("city/trips.csv") +
                       " --model od --dim 12 --epochs 2 --threads 1 --seed 7 ";
    CHECK(run(base + "--out " + tmp.file("a.txt"), log) == 0);
    CHECK(run(base + "--out " + tmp.file("b.txt"), log) == 0);
    CHECK(read_file(tmp.file("a.txt")) == read_file(tmp.file("b.txt")));
}

TEST_CASE("cli: missing inputs exit with code 2") {
    TempDir tmp("pm_cli");
    const std::string log = tmp.file("log.txt");
    CHECK(run("ingest --places /nonexistent/p.csv --trips /nonexistent/t.csv --out " +
                  tmp.file("x.bin"),
              log) == 2);
    CHECK(read_file(log).find("/nonexistent/p.csv") != std::string::npos);

    CHECK(run("eval --places /nonexistent/p.csv --trips /nonexistent/t.csv "
              "--embedding /nonexistent/e.txt",
              log) == 2);
    CHECK(run("train --places /nonexistent/p.csv --trips /nonexistent/t.csv --model bogus",
              log) == 2);
}

TEST_CASE("cli: drop stats report missing coordinates") {
    TempDir tmp("pm_cli");
    const std::string log = tmp.file("log.txt");
    pmtest::write_file(tmp.file("p.csv"),
                       "external_id,lat,lon,category\n"
                       "a,40.70,-74.00,x\nb,40.71,-74.01,y\n");
    // 10 trips, exactly one with missing coordinates
    std::string trips =
        "pickup_datetime,dropoff_datetime,pickup_lon,pickup_lat,dropoff_lon,dropoff_lat\n";
    for (int i = 0; i < 9; ++i)
        trips += "100,200,-74.00,40.70,-74.01,40.71\n";
    trips += "100,200,,,-74.01,40.71\n";
    pmtest::write_file(tmp.file("t.csv"), trips);

    CHECK(run("ingest --places " + tmp.file("p.csv") + " --trips " + tmp.file("t.csv") +
                  " --out " + tmp.file("t.bin"),
              log) == 0);
    auto text = read_file(log);
    CHECK(text.find("dropped.missing_coords=1") != std::string::npos);
    CHECK(text.find("retained=9") != std::string::npos);
}

TEST_CASE("cli: config file with flag precedence") {
    TempDir tmp("pm_cli");
    const std::string log = tmp.file("log.txt");
    REQUIRE(run("synth --out " + tmp.file("city") + " --seed 8 --n-places 40 --n-trips 400",
                log) == 0);

    pmtest::write_file(tmp.file("cfg.json"),
                       "{\"places\": \"" + tmp.file("city/places.csv") +
                           "\", \"trips\": \"" + tmp.file("city/trips.csv") +
                           "\", \"model\": \"trip\", \"dim\": 8, \"epochs\": 1, \"seed\": 8}");

    CHECK(run("train --config " + tmp.file("cfg.json") + " --out " + tmp.file("a.txt"), log) ==
          0);
    CHECK(read_file(tmp.file("a.txt")).substr(0, 5) == "40 8\n");  // dim 8 from the file

    // flag overrides the file's dim
    CHECK(run("train --config " + tmp.file("cfg.json") + " --dim 4 --out " + tmp.file("b.txt"),
              log) == 0);
    CHECK(read_file(tmp.file("b.txt")).substr(0, 5) == "40 4\n");
}

TEST_CASE("cli: sweep emits one row per value") {
    TempDir tmp("pm_cli");
    const std::string log = tmp.file("log.txt");
    REQUIRE(run("synth --out " + tmp.file("city") + " --seed 9 --n-places 50 --n-trips 1000",
                log) == 0);
    CHECK(run("sweep --places " + tmp.file("city/places.csv") + " --trips " +
                  tmp.file("city/trips.csv") +
                  " --model od --dim 12 --epochs 1 --seed 9 --parameter window-hours "
                  "--values 0.5,1 --out " +
                  tmp.file("sweep.csv"),
              log) == 0);
    auto text = read_file(tmp.file("sweep.csv"));
    CHECK(text.find("window-hours,match_rate,silhouette\n") == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 3);
}
