#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mklab/curves.hpp"
#include "mklab/density_field.hpp"
#include "mklab/ot.hpp"

namespace mklab {

struct CurveSpec {
    std::string kind; // circle | ellipse | rounded-rectangle | fourier-circle | file
    double R = 1.0;
    double a = 2.0, b = 1.0;
    double w = 1.0, h = 1.0, corner = 0.25;
    std::vector<double> coeffs;
    std::string path;

    ClosedCurve build(int samples) const;
};

struct ExperimentConfig {
    std::string kind; // convergence | grid | scaling | ring
    CurveSpec curve;
    int samples = 4096;
    std::vector<double> eps_list;
    std::vector<double> h_list;
    std::vector<double> R_list;
    std::vector<double> t_list;
    std::vector<double> M_list;
    double ring_R = 10.0;
    double ring_t = 2.0;
    std::size_t capacity = 1u << 17;
    bool timing = false; // wall-time column stays 0 unless set, keeping CSV bit-stable

    // Single JSON document; unknown keys rejected.
    static ExperimentConfig load(const std::string& path);
};

// One CSV line: fixed column order per experiment kind, header included.
struct ResultRow {
    std::string id;
    std::vector<std::pair<std::string, double>> values;
    std::string status = "ok";
};

std::vector<ResultRow> run_convergence_study(const ExperimentConfig& cfg);
std::vector<ResultRow> run_grid_validation(const ExperimentConfig& cfg);
std::vector<ResultRow> run_scaling_study(const ExperimentConfig& cfg);
std::vector<ResultRow> run_ring_sweep(const ExperimentConfig& cfg);

void write_rows_csv(const std::vector<ResultRow>& rows, const std::string& path);

// Rasterize radial band structures (rings, discs) into an exactly
// mass-balanced pair: v boundary cells are toggled, nearest the band edge
// first with row-major tie order, until the occupied counts match.
AdmissiblePair rasterize_balanced_radial_pair(Vec2 center,
                                              const std::vector<std::pair<double, double>>& u_bands,
                                              const std::vector<std::pair<double, double>>& v_bands,
                                              const GridGeometry& grid, double eps);

// Built-in oracle suite behind the CLI --check flag; returns the number of
// failed checks and prints one line per check.
int run_builtin_checks();

} // namespace mklab
