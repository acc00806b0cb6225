// mklab command line: configuration-driven sweeps writing plot-ready CSV.
//   mklab convergence --config cfg.json --out rows.csv
//   mklab grid        --config cfg.json --out rows.csv
//   mklab scaling     --config cfg.json --out rows.csv
//   mklab ring        --config cfg.json --out rows.csv
//   mklab --check
// Exit codes: 0 success, 1 config error, 2 numerical-invariant failure.

#include <cmath>
#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "mklab/errors.hpp"
#include "mklab/experiments.hpp"

namespace {

int run_kind(const std::string& kind, const std::string& config_path,
             const std::string& out_path) {
    using namespace mklab;
    ExperimentConfig cfg = ExperimentConfig::load(config_path);
    if (cfg.kind != kind)
        throw ConfigError("config kind '" + cfg.kind + "' does not match subcommand '" + kind +
                          "'");
    std::vector<ResultRow> rows;
    if (kind == "convergence") rows = run_convergence_study(cfg);
    else if (kind == "grid") rows = run_grid_validation(cfg);
    else if (kind == "scaling") rows = run_scaling_study(cfg);
    else rows = run_ring_sweep(cfg);
    for (const auto& row : rows)
        for (const auto& kv : row.values)
            if (!std::isfinite(kv.second)) {
                std::fprintf(stderr, "non-finite value '%s' in row %s\n", kv.first.c_str(),
                             row.id.c_str());
                return 2;
            }
    write_rows_csv(rows, out_path);
    std::printf("%zu rows -> %s\n", rows.size(), out_path.c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"mklab: transport/bending energy laboratory"};
    bool check = false;
    app.add_flag("--check", check, "run the built-in oracle suite and exit");

    std::string config_path, out_path;
    for (const std::string kind : {"convergence", "grid", "scaling", "ring"}) {
        auto* sub = app.add_subcommand(kind, "run the " + kind + " experiment");
        sub->add_option("--config", config_path, "JSON config path")->required();
        sub->add_option("--out", out_path, "output CSV path")->required();
    }
    app.require_subcommand(0, 1);

    CLI11_PARSE(app, argc, argv);

    try {
        if (check) {
            const int failures = mklab::run_builtin_checks();
            if (failures) {
                std::fprintf(stderr, "%d check(s) failed\n", failures);
                return 2;
            }
            std::printf("all checks passed\n");
            return 0;
        }
        for (const auto* sub : app.get_subcommands())
            return run_kind(sub->get_name(), config_path, out_path);
        std::fprintf(stderr, "nothing to do; see --help\n");
        return 1;
    } catch (const mklab::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
