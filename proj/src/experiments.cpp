#include "mklab/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <set>

#include <nlohmann/json.hpp>

#include "mklab/closed_forms.hpp"
#include "mklab/energy.hpp"
#include "mklab/errors.hpp"
#include "mklab/ray_calculus.hpp"
#include "mklab/recovery.hpp"

namespace mklab {

namespace {

using nlohmann::json;
constexpr double kPi = std::numbers::pi;

double now_ms() {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw ConfigError("unknown key '" + it.key() + "' in " + where);
}

std::vector<double> get_list(const json& j, const std::string& key) {
    std::vector<double> out;
    if (!j.contains(key)) return out;
    for (const auto& v : j.at(key)) out.push_back(v.get<double>());
    return out;
}

// least-squares slope of log(y) against log(x)
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t n = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        if (!(x[k] > 0.0) || !(y[k] > 0.0)) continue;
        const double lx = std::log(x[k]), ly = std::log(y[k]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++n;
    }
    if (n < 2) return 0.0;
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

double golden_min(const std::function<double(double)>& f, double a, double b, double tol) {
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

} // namespace

ClosedCurve CurveSpec::build(int samples) const {
    if (kind == "circle") return make_circle({0.0, 0.0}, R, samples);
    if (kind == "ellipse") return make_ellipse({0.0, 0.0}, a, b, samples);
    if (kind == "rounded-rectangle")
        return make_rounded_rectangle({0.0, 0.0}, w, h, corner, samples);
    if (kind == "fourier-circle") return make_fourier_circle({0.0, 0.0}, R, coeffs, samples);
    if (kind == "file") return resample_arclength(load_curve_csv(path), samples);
    throw ConfigError("unknown curve kind '" + kind + "'");
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    reject_unknown(j,
                   {"kind", "curve", "samples", "eps_list", "h_list", "R_list", "t_list",
                    "M_list", "ring_R", "ring_t", "capacity", "timing"},
                   "config");
    ExperimentConfig cfg;
    cfg.kind = j.at("kind").get<std::string>();
    if (j.contains("curve")) {
        const auto& c = j.at("curve");
        reject_unknown(c, {"kind", "R", "a", "b", "w", "h", "corner", "coeffs", "path"},
                       "curve");
        cfg.curve.kind = c.at("kind").get<std::string>();
        if (c.contains("R")) cfg.curve.R = c.at("R").get<double>();
        if (c.contains("a")) cfg.curve.a = c.at("a").get<double>();
        if (c.contains("b")) cfg.curve.b = c.at("b").get<double>();
        if (c.contains("w")) cfg.curve.w = c.at("w").get<double>();
        if (c.contains("h")) cfg.curve.h = c.at("h").get<double>();
        if (c.contains("corner")) cfg.curve.corner = c.at("corner").get<double>();
        if (c.contains("coeffs")) cfg.curve.coeffs = get_list(c, "coeffs");
        if (c.contains("path")) cfg.curve.path = c.at("path").get<std::string>();
    }
    if (j.contains("samples")) cfg.samples = j.at("samples").get<int>();
    cfg.eps_list = get_list(j, "eps_list");
    cfg.h_list = get_list(j, "h_list");
    cfg.R_list = get_list(j, "R_list");
    cfg.t_list = get_list(j, "t_list");
    cfg.M_list = get_list(j, "M_list");
    if (j.contains("ring_R")) cfg.ring_R = j.at("ring_R").get<double>();
    if (j.contains("ring_t")) cfg.ring_t = j.at("ring_t").get<double>();
    if (j.contains("capacity")) cfg.capacity = j.at("capacity").get<std::size_t>();
    if (j.contains("timing")) cfg.timing = j.at("timing").get<bool>();
    return cfg;
}

std::vector<ResultRow> run_convergence_study(const ExperimentConfig& cfg) {
    if (cfg.eps_list.empty()) throw ConfigError("convergence: eps_list must not be empty");
    const ClosedCurve curve = cfg.curve.build(cfg.samples);
    CurveSystem sys;
    sys.curves.push_back(curve);
    const double W = elastica_energy(sys);

    std::vector<ResultRow> rows;
    double prev_eps = 0.0, prev_gap = 0.0;
    for (std::size_t k = 0; k < cfg.eps_list.size(); ++k) {
        const double eps = cfg.eps_list[k];
        ResultRow row;
        row.id = cfg.kind + "-" + std::to_string(k);
        const double t0 = now_ms();
        double F = 0, G = 0, mass = 0, gap = 0, order = 0;
        try {
            const auto e = recovery_energy_semianalytic(curve, eps);
            F = e.F;
            G = e.G;
            mass = e.mass;
            gap = G - W;
            if (k > 0 && prev_gap > 0.0 && gap > 0.0)
                order = std::log(prev_gap / gap) / std::log(prev_eps / eps);
            prev_eps = eps;
            prev_gap = gap;
        } catch (const InadmissibleEpsilonError&) {
            row.status = "inadmissible-eps";
        }
        const double wall = cfg.timing ? now_ms() - t0 : 0.0;
        row.values = {{"eps", eps},   {"mass", mass}, {"W", W},        {"F", F},
                      {"G", G},       {"gap", gap},   {"order", order}, {"wall_ms", wall}};
        rows.push_back(std::move(row));
    }
    return rows;
}

AdmissiblePair rasterize_balanced_radial_pair(Vec2 center,
                                              const std::vector<std::pair<double, double>>& u_bands,
                                              const std::vector<std::pair<double, double>>& v_bands,
                                              const GridGeometry& grid, double eps) {
    auto in_bands = [](const std::vector<std::pair<double, double>>& bands, double r) {
        for (const auto& b : bands)
            if (r >= b.first && r < b.second) return true;
        return false;
    };
    auto edge_distance = [](const std::vector<std::pair<double, double>>& bands, double r) {
        double d = std::numeric_limits<double>::max();
        for (const auto& b : bands) d = std::min({d, std::abs(r - b.first), std::abs(r - b.second)});
        return d;
    };

    const std::size_t ncell = static_cast<std::size_t>(grid.width) * grid.height;
    std::vector<std::uint8_t> occ_u(ncell, 0), occ_v(ncell, 0);
    struct Cell {
        double score;
        std::size_t id;
    };
    std::vector<Cell> v_in, v_out;
    std::size_t id = 0, cu = 0, cv = 0;
    for (int j = 0; j < grid.height; ++j)
        for (int i = 0; i < grid.width; ++i, ++id) {
            const double r = dist(grid.cell_center(i, j), center);
            if (in_bands(u_bands, r)) {
                occ_u[id] = 1;
                ++cu;
            } else if (in_bands(v_bands, r)) {
                occ_v[id] = 1;
                ++cv;
                v_in.push_back({edge_distance(v_bands, r), id});
            } else if (edge_distance(v_bands, r) < 2.0 * grid.h) {
                v_out.push_back({edge_distance(v_bands, r), id});
            }
        }
    auto by_score = [](const Cell& a, const Cell& b) {
        return a.score != b.score ? a.score < b.score : a.id < b.id;
    };
    if (cv > cu) {
        std::sort(v_in.begin(), v_in.end(), by_score);
        for (std::size_t k = 0; k < cv - cu; ++k) occ_v[v_in[k].id] = 0;
    } else if (cu > cv) {
        std::sort(v_out.begin(), v_out.end(), by_score);
        if (v_out.size() < cu - cv)
            throw GridTooCoarseError("rasterize_balanced_radial_pair: cannot balance masses");
        for (std::size_t k = 0; k < cu - cv; ++k) occ_v[v_out[k].id] = 1;
    }
    DensityField fu(grid, eps, std::move(occ_u));
    DensityField fv(grid, eps, std::move(occ_v));
    return AdmissiblePair::make(std::move(fu), std::move(fv));
}

std::vector<ResultRow> run_grid_validation(const ExperimentConfig& cfg) {
    if (cfg.h_list.empty()) throw ConfigError("grid: h_list must not be empty");
    const auto ring = ring_radii(cfg.ring_R, cfg.ring_t);
    const double d1_exact = ring_d1_exact(ring);
    const double perim_exact = ring_interface(ring);

    std::vector<ResultRow> rows;
    for (std::size_t k = 0; k < cfg.h_list.size(); ++k) {
        const double h = cfg.h_list[k];
        ResultRow row;
        row.id = cfg.kind + "-" + std::to_string(k);
        const double t0 = now_ms();
        double d1 = 0, perim = 0, d1_err = 0, d1_pm_err = 0, perim_err = 0;
        double atoms_u = 0, atoms_v = 0, mass = 0;
        try {
            const double span = 2.0 * (ring.r4 + 4.0 * h);
            GridGeometry grid;
            grid.h = h;
            grid.width = grid.height = static_cast<int>(std::ceil(span / h)) + 2;
            grid.origin = {-0.5 * grid.width * h, -0.5 * grid.height * h};
            auto pair = rasterize_balanced_radial_pair(
                {0, 0}, {{ring.r2, ring.r3}}, {{ring.r1, ring.r2}, {ring.r3, ring.r4}}, grid,
                1.0);
            atoms_u = static_cast<double>(pair.u.occupied_count());
            atoms_v = static_cast<double>(pair.v.occupied_count());
            SolverOptions opt;
            opt.capacity = cfg.capacity;
            const auto energy = evaluate_energy(pair.u, pair.v,
                                                PerimeterEstimator::ContourLength, opt);
            d1 = energy.d1;
            perim = energy.perimeter;
            d1_err = std::abs(d1 - d1_exact) / d1_exact;
            perim_err = std::abs(perim - perim_exact) / perim_exact;
        } catch (const CapacityError&) {
            row.status = "capacity-error";
        }
        const double wall = cfg.timing ? now_ms() - t0 : 0.0;
        row.values = {{"h", h},
                      {"R", cfg.ring_R},
                      {"t", cfg.ring_t},
                      {"atoms_u", atoms_u},
                      {"atoms_v", atoms_v},
                      {"d1_grid", d1},
                      {"d1_exact", d1_exact},
                      {"d1_rel_err", d1_err},
                      {"perim_grid", perim},
                      {"perim_exact", perim_exact},
                      {"perim_rel_err", perim_err},
                      {"wall_ms", wall}};
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<ResultRow> run_scaling_study(const ExperimentConfig& cfg) {
    if (cfg.M_list.empty()) throw ConfigError("scaling: M_list must not be empty");
    std::vector<double> Ms = cfg.M_list;
    std::vector<double> disc_d1s, strip_totals;
    for (double M : Ms) {
        disc_d1s.push_back(disc_energy(M).d1);
        strip_totals.push_back(strip_energy({2.0, M}));
    }
    const double disc_exponent = loglog_slope(Ms, disc_d1s);
    const double strip_exponent = loglog_slope(Ms, strip_totals);

    auto disc_total = [](double M) {
        const auto d = disc_energy(M);
        return d.d1 + d.interface;
    };
    // smallest ladder M where the strip wins, then the bracketed root
    double crossover_ladder = 0.0;
    for (double M : Ms)
        if (strip_energy({2.0, M}) < disc_total(M)) {
            crossover_ladder = M;
            break;
        }
    double crossover_root = 0.0;
    {
        double lo = 1e-6, hi = 0.0;
        for (double M : Ms) {
            if (strip_energy({2.0, M}) < disc_total(M)) {
                hi = M;
                break;
            }
            lo = M;
        }
        if (hi > lo && strip_energy({2.0, lo}) > disc_total(lo)) {
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (strip_energy({2.0, mid}) < disc_total(mid)) hi = mid;
                else lo = mid;
            }
            crossover_root = 0.5 * (lo + hi);
        }
    }

    std::vector<ResultRow> rows;
    for (std::size_t k = 0; k < Ms.size(); ++k) {
        ResultRow row;
        row.id = cfg.kind + "-" + std::to_string(k);
        const auto d = disc_energy(Ms[k]);
        row.values = {{"M", Ms[k]},
                      {"strip_F", strip_totals[k]},
                      {"disc_d1", d.d1},
                      {"disc_interface", d.interface},
                      {"disc_total", d.d1 + d.interface},
                      {"disc_d1_exponent", disc_exponent},
                      {"strip_exponent", strip_exponent},
                      {"crossover_ladder_M", crossover_ladder},
                      {"crossover_root_M", crossover_root},
                      {"wall_ms", 0.0}};
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<ResultRow> run_ring_sweep(const ExperimentConfig& cfg) {
    if (cfg.R_list.empty() || cfg.t_list.empty())
        throw ConfigError("ring: R_list and t_list must not be empty");
    // fitted C over the sweep and the R-decay of the absolute residual at t = 2
    double fitted_C = 0.0;
    std::vector<double> Rs_for_slope, abs_residuals;
    for (double R : cfg.R_list) {
        for (double t : cfg.t_list) {
            if (!(t < R)) continue;
            const auto ring = ring_radii(R, t);
            const double M = ring_mass(ring);
            const double res = std::abs(ring_energy_exact(ring) / M - ring_energy_asymptotic(R, t));
            const double denom = std::pow(std::abs(t - 2.0), 3.0) + 1.0 / (R * R * R);
            fitted_C = std::max(fitted_C, res / denom);
        }
        if (R > 2.0) {
            const auto ring2 = ring_radii(R, 2.0);
            Rs_for_slope.push_back(R);
            abs_residuals.push_back(std::abs(ring_energy_exact(ring2) -
                                             ring_mass(ring2) * ring_energy_asymptotic(R, 2.0)));
        }
    }
    const double slope = loglog_slope(Rs_for_slope, abs_residuals);

    std::vector<ResultRow> rows;
    std::size_t k = 0;
    for (double R : cfg.R_list) {
        const double argmin_t =
            R > 3.0 ? golden_min(
                          [&](double t) {
                              return ring_energy_exact(ring_radii(R, t)) /
                                     ring_mass(ring_radii(R, t));
                          },
                          1.0, 3.0, 1e-9)
                    : 0.0;
        for (double t : cfg.t_list) {
            ResultRow row;
            row.id = cfg.kind + "-" + std::to_string(k++);
            if (!(t < R)) {
                row.status = "invalid-pair";
                row.values = {{"R", R},         {"t", t},           {"FoverM", 0.0},
                              {"asym", 0.0},    {"residual", 0.0},  {"abs_residual", 0.0},
                              {"fitted_C", 0.0}, {"slope_t2", 0.0}, {"argmin_t", 0.0},
                              {"wall_ms", 0.0}};
                rows.push_back(std::move(row));
                continue;
            }
            const auto ring = ring_radii(R, t);
            const double M = ring_mass(ring);
            const double FoverM = ring_energy_exact(ring) / M;
            const double asym = ring_energy_asymptotic(R, t);
            row.values = {{"R", R},
                          {"t", t},
                          {"FoverM", FoverM},
                          {"asym", asym},
                          {"residual", std::abs(FoverM - asym)},
                          {"abs_residual", std::abs(FoverM - asym) * M},
                          {"fitted_C", fitted_C},
                          {"slope_t2", slope},
                          {"argmin_t", argmin_t},
                          {"wall_ms", 0.0}};
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

void write_rows_csv(const std::vector<ResultRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open output " + path);
    out.precision(17);
    if (rows.empty()) return;
    out << "id,status";
    for (const auto& kv : rows.front().values) out << "," << kv.first;
    out << "\n";
    for (const auto& row : rows) {
        out << row.id << "," << row.status;
        for (const auto& kv : row.values) out << "," << kv.second;
        out << "\n";
    }
}

int run_builtin_checks() {
    int failures = 0;
    auto check = [&](const char* name, bool ok, double detail) {
        std::printf("[%s] %s (%.3g)\n", ok ? "ok" : "FAIL", name, detail);
        if (!ok) ++failures;
    };

    // ray calculus inversion
    {
        double worst = 0.0;
        for (int k = 0; k < 200; ++k) {
            RayFrame fr{0.3 + 0.7 * ((k * 37) % 100) / 100.0, -2.0 + 4.0 * ((k * 53) % 97) / 97.0,
                        0.05 + 0.95 * ((k * 71) % 89) / 89.0, 0.01 + 0.2 * ((k * 13) % 83) / 83.0};
            if (std::abs(fr.xi()) >= 0.95) continue;
            const double t = length_of_mass(fr, fr.mass);
            worst = std::max(worst, std::abs(mass_of_length(fr, t) - fr.mass));
        }
        check("ray mass/length inversion", worst < 1e-12, worst);
    }
    // per-ray cost vs Simpson quadrature
    {
        double worst = 0.0;
        for (double ap : {0.5, -0.8, 1.5}) {
            RayFrame fr{0.9, ap, 0.8, 0.1};
            const int N = 20000;
            KahanSum q;
            for (int k = 0; k < N; ++k) {
                const double m = fr.mass * (k + 0.5) / N;
                q.add((length_of_mass(fr, m) - length_of_mass(fr, m - fr.mass)) * fr.mass / N);
            }
            worst = std::max(worst,
                             std::abs(q.value() - per_ray_cost_exact(fr)) / per_ray_cost_exact(fr));
        }
        check("per-ray cost vs quadrature", worst < 1e-8, worst);
    }
    // ring identities
    {
        const auto ring = ring_radii(10.0, 2.0);
        const double id1 = std::abs(ring.r2 * ring.r2 - 0.5 * (100.0 + ring.r1 * ring.r1));
        const double mass = std::abs(kPi * (ring.r3 * ring.r3 - ring.r2 * ring.r2) - ring_mass(ring));
        check("ring radii identities", id1 < 1e-12 && mass < 1e-9, id1 + mass);
    }
    // strip and disc closed forms
    {
        const double s = strip_energy({2.0, 10.0});
        const double d = disc_energy(kPi).d1;
        check("strip F(t=2,M=10) = 24", std::abs(s - 24.0) < 1e-12, s);
        check("disc d1 cubic scaling",
              std::abs(disc_energy(4.0 * kPi).d1 / d - 8.0) < 1e-9, d);
    }
    // small transport instance against the unique feasible plan
    {
        DiscreteMeasure mu, nu;
        mu.add({0, 0}, 1.0);
        mu.add({1, 0}, 1.0);
        nu.add({0, 1}, 2.0);
        const auto plan = solve_transport(mu, nu, 1.0);
        const double expect = 1.0 + std::sqrt(2.0);
        check("transport 2->1 cost", std::abs(plan.cost - expect) < 1e-12, plan.cost);
        const auto phi = recover_dual(plan, mu, nu);
        const double gap = duality_check(phi, mu, nu, plan.cost);
        check("duality gap", std::abs(gap) < 1e-9, gap);
    }
    // monotone rearrangement examples
    {
        Density1D f{0.0, 0.125, std::vector<double>(8, 1.0)};
        Density1D g{1.0, 0.125, std::vector<double>(8, 1.0)};
        const auto mt = monotone_transport_1d(f, g);
        check("1d shift cost", std::abs(mt.cost - 1.0) < 1e-12, mt.cost);
    }
    return failures;
}

} // namespace mklab
