#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "mklab/errors.hpp"
#include "mklab/experiments.hpp"

using namespace mklab;
namespace fs = std::filesystem;

namespace {

std::string write_config(const std::string& text) {
    static int counter = 0;
    const auto path = (fs::temp_directory_path() / ("mklab_cfg_" + std::to_string(counter++) +
                                                    ".json")).string();
    std::ofstream out(path);
    out << text;
    return path;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("config parsing rejects unknown keys and bad kinds") {
    const auto good = write_config(R"({"kind":"scaling","M_list":[1,10]})");
    auto cfg = ExperimentConfig::load(good);
    CHECK(cfg.kind == "scaling");
    fs::remove(good);

    const auto bad = write_config(R"({"kind":"scaling","M_list":[1],"bogus":3})");
    CHECK_THROWS_AS(ExperimentConfig::load(bad), ConfigError);
    fs::remove(bad);

    const auto badcurve =
        write_config(R"({"kind":"convergence","eps_list":[0.1],"curve":{"kind":"circle","Q":1}})");
    CHECK_THROWS_AS(ExperimentConfig::load(badcurve), ConfigError);
    fs::remove(badcurve);
}

TEST_CASE("convergence study on the circle") {
    ExperimentConfig cfg;
    cfg.kind = "convergence";
    cfg.curve.kind = "circle";
    cfg.curve.R = 1.0;
    cfg.samples = 4096;
    cfg.eps_list = {0.1, 0.05, 0.025};
    auto rows = run_convergence_study(cfg);
    REQUIRE(rows.size() == 3);
    const double W = rows[0].values[2].second;
    CHECK(W == doctest::Approx(std::numbers::pi).epsilon(1e-6));
    double prev_gap = 1e9;
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const auto& v = rows[k].values;
        CHECK(rows[k].status == "ok");
        const double gap = v[5].second;
        CHECK(gap > 0.0);
        CHECK(gap < prev_gap);
        prev_gap = gap;
        if (k > 0) {
            const double order = v[6].second;
            CHECK(order == doctest::Approx(2.0).epsilon(0.1));
        }
        // G = (F - 2M)/eps^2 recomputed from the row's own columns
        const double eps = v[0].second, mass = v[1].second, F = v[3].second, G = v[4].second;
        CHECK(G == (F - 2.0 * mass) / (eps * eps));
    }

    ExperimentConfig empty = cfg;
    empty.eps_list.clear();
    CHECK_THROWS_AS(run_convergence_study(empty), ConfigError);

    // inadmissible epsilon produces a per-row error entry, run continues
    ExperimentConfig mixed = cfg;
    mixed.eps_list = {0.5, 0.05};
    auto rows2 = run_convergence_study(mixed);
    CHECK(rows2[0].status == "inadmissible-eps");
    CHECK(rows2[1].status == "ok");
}

TEST_CASE("scaling study closed forms") {
    ExperimentConfig cfg;
    cfg.kind = "scaling";
    cfg.M_list = {100.0, 1000.0, 10000.0};
    auto rows = run_scaling_study(cfg);
    REQUIRE(rows.size() == 3);
    auto get = [&](const ResultRow& r, const std::string& key) {
        for (const auto& kv : r.values)
            if (kv.first == key) return kv.second;
        FAIL("missing key ", key);
        return 0.0;
    };
    CHECK(get(rows[0], "disc_d1_exponent") == doctest::Approx(1.5).epsilon(1e-6));
    CHECK(get(rows[0], "strip_exponent") == doctest::Approx(1.0).epsilon(0.01));
    CHECK(get(rows[0], "crossover_ladder_M") == 100.0); // strip already wins at M=100
    CHECK(get(rows[0], "strip_F") == 204.0);

    ExperimentConfig empty = cfg;
    empty.M_list.clear();
    CHECK_THROWS_AS(run_scaling_study(empty), ConfigError);
}

TEST_CASE("ring sweep columns") {
    ExperimentConfig cfg;
    cfg.kind = "ring";
    cfg.R_list = {10.0, 20.0, 40.0, 80.0};
    cfg.t_list = {1.6, 2.0, 2.4};
    auto rows = run_ring_sweep(cfg);
    REQUIRE(rows.size() == 12);
    auto get = [&](const ResultRow& r, const std::string& key) {
        for (const auto& kv : r.values)
            if (kv.first == key) return kv.second;
        FAIL("missing key ", key);
        return 0.0;
    };
    CHECK(get(rows[0], "fitted_C") <= 10.0);
    CHECK(get(rows[0], "slope_t2") == doctest::Approx(-3.0).epsilon(0.1));
    for (const auto& r : rows) {
        CHECK(get(r, "residual") <=
              get(r, "fitted_C") * (std::pow(std::abs(get(r, "t") - 2.0), 3) +
                                    1.0 / std::pow(get(r, "R"), 3)) +
                  1e-15);
    }
    // argmin at R=40 within 1e-3 of 2
    for (const auto& r : rows)
        if (get(r, "R") == 40.0) CHECK(std::abs(get(r, "argmin_t") - 2.0) < 1e-3);

    // invalid pair becomes a row-level error
    ExperimentConfig badpair = cfg;
    badpair.R_list = {1.0};
    badpair.t_list = {2.0};
    auto rows2 = run_ring_sweep(badpair);
    CHECK(rows2[0].status == "invalid-pair");
}

TEST_CASE("grid validation coarse run and determinism") {
    ExperimentConfig cfg;
    cfg.kind = "grid";
    cfg.ring_R = 3.0;
    cfg.ring_t = 0.75;
    cfg.h_list = {0.2};
    auto rows = run_grid_validation(cfg);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].status == "ok");
    auto get = [&](const ResultRow& r, const std::string& key) {
        for (const auto& kv : r.values)
            if (kv.first == key) return kv.second;
        return -1.0;
    };
    CHECK(get(rows[0], "d1_rel_err") < 0.1);
    CHECK(get(rows[0], "perim_rel_err") < 0.05);

    // capacity errors surface as row status
    ExperimentConfig capped = cfg;
    capped.capacity = 16;
    auto rows2 = run_grid_validation(capped);
    CHECK(rows2[0].status == "capacity-error");

    // identical configs give bit-identical CSV
    const auto out1 = (fs::temp_directory_path() / "mklab_grid1.csv").string();
    const auto out2 = (fs::temp_directory_path() / "mklab_grid2.csv").string();
    write_rows_csv(rows, out1);
    write_rows_csv(run_grid_validation(cfg), out2);
    CHECK(slurp(out1) == slurp(out2));
    fs::remove(out1);
    fs::remove(out2);
}

TEST_CASE("builtin oracle suite passes") { CHECK(run_builtin_checks() == 0); }
