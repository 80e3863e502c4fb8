#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "ibnr/common.hpp"
#include "ibnr/csvio.hpp"
#include "ibnr/rng.hpp"
#include "ibnr/synth.hpp"

using namespace ibnr;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / "ibnr_csvio_test";
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

} // namespace

TEST_CASE("triangle CSV round trip preserves counts, mask and hidden truth") {
    TempDir dir;
    Rng rng(7);
    for (int rep = 0; rep < 10; ++rep) {
        const int rows = 6 + static_cast<int>(rng.uniform01() * 20);
        const int d_max = 2 + static_cast<int>(rng.uniform01() * 6);
        SynthConfig cfg;
        cfg.t_rows = rows;
        cfg.delays = d_max;
        cfg.seed = 1000 + rep;
        auto [tri, truth] = generate(cfg);
        const int t_cut = d_max + 1 +
                          static_cast<int>(rng.uniform01() * (rows + 1 - d_max - 1));
        const auto masked = tri.masked_to(t_cut);

        const auto path = dir.file("tri.csv");
        write_triangle_csv(path, masked);
        // full truth is retained in the file, so the inferred present is
        // rows+1; re-masking on load restores the backtest view
        const auto loaded = read_triangle_csv(path, t_cut);
        CHECK(loaded.present() == masked.present());
        CHECK(loaded.n_rows() == masked.n_rows());
        for (int t = 1; t <= masked.n_rows(); ++t) {
            for (int d = 1; d <= d_max; ++d) {
                REQUIRE(loaded.known(t, d) == masked.known(t, d));
                REQUIRE(loaded.observed(t, d) == masked.observed(t, d));
                if (masked.known(t, d)) REQUIRE(loaded.count(t, d) == masked.count(t, d));
            }
        }
    }
}

TEST_CASE("triangle CSV reader infers the present time from empty cells") {
    TempDir dir;
    const auto path = dir.file("masked.csv");
    write_text(path, "t,d1,d2,d3\n1,4,5,6\n2,7,8,\n3,9,,\n");
    const auto tri = read_triangle_csv(path);
    CHECK(tri.present() == 4); // staircase: largest consistent T
    CHECK(tri.n_rows() == 3);
    CHECK(tri.observed(1, 3));
    CHECK(!tri.known(2, 3));
    CHECK_THROWS_AS(read_triangle_csv(path, 5), InputError); // would unmask unknown cells
}

TEST_CASE("triangle CSV reader reports malformed rows with line numbers") {
    TempDir dir;
    const auto path = dir.file("bad.csv");
    write_text(path, "t,d1,d2\n1,4,5\n3,7,8\n");
    try {
        read_triangle_csv(path);
        FAIL("expected InputError");
    } catch (const InputError& e) {
        CHECK(std::string(e.what()).find(":3:") != std::string::npos);
    }
    write_text(path, "t,d1,d2\n1,4,x\n");
    CHECK_THROWS_AS(read_triangle_csv(path), InputError);
    write_text(path, "t,d1,d2\n1,4,-2\n");
    CHECK_THROWS_AS(read_triangle_csv(path), InputError);
    write_text(path, "delay,d1\n");
    CHECK_THROWS_AS(read_triangle_csv(path), InputError);
}

TEST_CASE("incident CSV parses and flags bad records by line") {
    TempDir dir;
    const auto path = dir.file("inc.csv");
    write_text(path, "id,breach_date,report_date\nA-1,2018-01-03,2018-02-11\n");
    const auto recs = read_incidents_csv(path);
    REQUIRE(recs.size() == 1);
    CHECK(recs[0].id == "A-1");
    CHECK(recs[0].breach_date.str() == "2018-01-03");

    write_text(path, "id,breach_date,report_date\nA-1,2018-01-03,2017-02-11\n");
    try {
        read_incidents_csv(path);
        FAIL("expected InputError");
    } catch (const InputError& e) {
        const std::string msg = e.what();
        CHECK(msg.find(":2:") != std::string::npos);
        CHECK(msg.find("A-1") != std::string::npos);
    }
    write_text(path, "id,breach_date,report_date\nA-1,2018-01-32,2018-02-11\n");
    CHECK_THROWS_AS(read_incidents_csv(path), InputError);
    write_text(path, "wrong,header,here\n");
    CHECK_THROWS_AS(read_incidents_csv(path), InputError);
}

TEST_CASE("posterior CSV round trip is bit-exact") {
    TempDir dir;
    PosteriorSamples samples;
    samples.config.n_chains = 2;
    samples.config.burn_in = 100;
    samples.config.thin = 5;
    Rng rng(17);
    for (int c = 0; c < 2; ++c) {
        std::vector<ModelParams> draws;
        for (int i = 0; i < 25; ++i) {
            std::array<double, 12> flat{};
            for (int j = 0; j < 6; ++j) flat[j] = rng.normal() * 1.7;
            for (int j = 6; j < 12; ++j) flat[j] = std::exp(rng.normal());
            draws.push_back(ModelParams::from_flat(flat));
        }
        samples.chains.push_back(std::move(draws));
    }
    const auto path = dir.file("draws.csv");
    write_posterior_csv(path, samples);
    const auto loaded = read_posterior_csv(path);
    REQUIRE(loaded.chains.size() == 2);
    for (int c = 0; c < 2; ++c) {
        REQUIRE(loaded.chains[c].size() == 25);
        for (int i = 0; i < 25; ++i) {
            const auto a = samples.chains[c][i].flat();
            const auto b = loaded.chains[c][i].flat();
            for (int j = 0; j < 12; ++j) REQUIRE(a[j] == b[j]); // exact
        }
    }
}

TEST_CASE("nowcast CSV round trip") {
    TempDir dir;
    NowcastResult result;
    NowcastRow r1{50, {2022, 2}, 75, 77.0, 75.0, 84.5, 77};
    NowcastRow r2{51, {2022, 3}, 99, 103.5, 99.0, 112.0, std::nullopt};
    result.push_back(r1);
    result.push_back(r2);
    const auto path = dir.file("nc.csv");
    write_nowcast_csv(path, result);
    const auto loaded = read_nowcast_csv(path);
    REQUIRE(loaded.size() == 2);
    CHECK(loaded[0].t == 50);
    CHECK(loaded[0].origin_month.str() == "2022-02");
    CHECK(loaded[0].observed_partial == 75);
    CHECK(loaded[0].point == 77.0);
    CHECK(loaded[0].realized == 77);
    CHECK(loaded[1].point == 103.5);
    CHECK(!loaded[1].realized.has_value());
}

TEST_CASE("truth sidecar round trip") {
    TempDir dir;
    SynthTruth truth{{-1.5, -0.01, 0.8}, {1.5, 0.01, -1.8}, 42, 72, 12};
    const auto path = dir.file("truth.json");
    write_truth_json(path, truth);
    const auto loaded = read_truth_json(path);
    CHECK(loaded.seed == 42);
    CHECK(loaded.t_rows == 72);
    CHECK(loaded.delays == 12);
    CHECK(loaded.alpha == truth.alpha);
    CHECK(loaded.beta == truth.beta);
}

TEST_CASE("comparison table formats to four decimals") {
    TempDir dir;
    const std::vector<ComparisonRow> rows{{"m0", 3.00629, 2.27267}, {"m1", 26.06459, 14.44141}};
    const auto path = dir.file("cmp.csv");
    write_comparison_csv(path, rows);
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    CHECK(line == "model,rmse,mae");
    std::getline(in, line);
    CHECK(line == "m0,3.0063,2.2727");
    std::getline(in, line);
    CHECK(line == "m1,26.0646,14.4414");

    const auto text = comparison_text_table(rows);
    CHECK(text.find("m0") != std::string::npos);
    CHECK(text.find("3.0063") != std::string::npos);
    CHECK(text.find("RMSE") != std::string::npos);
}
