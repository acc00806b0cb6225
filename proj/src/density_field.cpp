#include "mklab/density_field.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "mklab/errors.hpp"

namespace mklab {

DensityField::DensityField(GridGeometry geom, double epsilon,
                           std::vector<std::uint8_t> occupancy)
    : geom_(geom), eps_(epsilon), occ_(std::move(occupancy)) {
    if (geom_.width <= 0 || geom_.height <= 0)
        throw std::invalid_argument("DensityField: grid dimensions must be positive");
    if (!(geom_.h > 0.0))
        throw std::invalid_argument("DensityField: spacing h must be positive");
    if (!(eps_ > 0.0))
        throw std::invalid_argument("DensityField: epsilon must be positive");
    if (occ_.size() != static_cast<std::size_t>(geom_.width) * geom_.height)
        throw std::invalid_argument("DensityField: occupancy size mismatch");
    for (auto& c : occ_) {
        c = c ? 1 : 0;
        count_ += c;
    }
}

double DensityField::total_mass() const {
    return static_cast<double>(count_) * geom_.h * geom_.h / eps_;
}

bool DensityField::border_ring_empty() const {
    const int w = geom_.width, h = geom_.height;
    for (int i = 0; i < w; ++i)
        if (occupied(i, 0) || occupied(i, h - 1)) return false;
    for (int j = 0; j < h; ++j)
        if (occupied(0, j) || occupied(w - 1, j)) return false;
    return true;
}

DensityField rasterize_region(const std::function<bool(Vec2)>& predicate,
                              const GridGeometry& grid, double epsilon) {
    if (grid.width <= 0 || grid.height <= 0)
        throw std::invalid_argument("rasterize_region: grid dimensions must be positive");
    if (!(grid.h > 0.0))
        throw std::invalid_argument("rasterize_region: spacing must be positive");
    if (!(epsilon > 0.0))
        throw std::invalid_argument("rasterize_region: epsilon must be positive");
    std::vector<std::uint8_t> occ(static_cast<std::size_t>(grid.width) * grid.height, 0);
    std::size_t k = 0;
    for (int j = 0; j < grid.height; ++j)
        for (int i = 0; i < grid.width; ++i, ++k)
            occ[k] = predicate(grid.cell_center(i, j)) ? 1 : 0;
    return DensityField(grid, epsilon, std::move(occ));
}

double total_mass(const DensityField& f) { return f.total_mass(); }

namespace {

double edge_count_perimeter(const DensityField& f) {
    const auto& g = f.grid();
    std::size_t edges = 0;
    auto occ = [&](int i, int j) -> bool {
        if (i < 0 || j < 0 || i >= g.width || j >= g.height) return false;
        return f.occupied(i, j);
    };
    for (int j = 0; j < g.height; ++j)
        for (int i = 0; i <= g.width; ++i)
            if (occ(i - 1, j) != occ(i, j)) ++edges;
    for (int j = 0; j <= g.height; ++j)
        for (int i = 0; i < g.width; ++i)
            if (occ(i, j - 1) != occ(i, j)) ++edges;
    return static_cast<double>(edges) * g.h;
}

struct Seg {
    Vec2 a, b;
};

// Marching squares over the corner lattice of the occupancy indicator.
// Corner value = mean of the (up to) four adjacent cell values, level 1/2,
// ties counted inside, crossings by linear interpolation.
std::vector<Seg> marching_squares_segments(const DensityField& f) {
    const auto& g = f.grid();
    const int W = g.width, H = g.height;
    std::vector<double> corner(static_cast<std::size_t>(W + 1) * (H + 1), 0.0);
    auto cref = [&](int i, int j) -> double& {
        return corner[static_cast<std::size_t>(j) * (W + 1) + i];
    };
    for (int j = 0; j < H; ++j)
        for (int i = 0; i < W; ++i)
            if (f.occupied(i, j)) {
                cref(i, j) += 0.25;
                cref(i + 1, j) += 0.25;
                cref(i, j + 1) += 0.25;
                cref(i + 1, j + 1) += 0.25;
            }

    const double lvl = 0.5;
    auto inside = [&](double v) { return v >= lvl; };
    auto interp = [&](double v0, double v1) {
        return v0 == v1 ? 0.5 : (lvl - v0) / (v1 - v0);
    };

    std::vector<Seg> segs;
    for (int j = 0; j < H; ++j) {
        for (int i = 0; i < W; ++i) {
            const double a = cref(i, j), b = cref(i + 1, j);
            const double c = cref(i + 1, j + 1), d = cref(i, j + 1);
            const int code = (inside(a) ? 1 : 0) | (inside(b) ? 2 : 0) |
                             (inside(c) ? 4 : 0) | (inside(d) ? 8 : 0);
            if (code == 0 || code == 15) continue;

            Vec2 pB{i + interp(a, b), static_cast<double>(j)};
            Vec2 pR{static_cast<double>(i + 1), j + interp(b, c)};
            Vec2 pT{i + interp(d, c), static_cast<double>(j + 1)};
            Vec2 pL{static_cast<double>(i), j + interp(a, d)};

            auto emit = [&](const Vec2& p, const Vec2& q) { segs.push_back({p, q}); };
            switch (code) {
                case 1: emit(pL, pB); break;
                case 2: emit(pB, pR); break;
                case 3: emit(pL, pR); break;
                case 4: emit(pR, pT); break;
                case 6: emit(pB, pT); break;
                case 7: emit(pL, pT); break;
                case 8: emit(pT, pL); break;
                case 9: emit(pT, pB); break;
                case 11: emit(pT, pR); break;
                case 12: emit(pR, pL); break;
                case 13: emit(pR, pB); break;
                case 14: emit(pB, pL); break;
                case 5:
                case 10: {
                    // saddle: disambiguate with the cell-center average
                    const bool center_in = inside(0.25 * (a + b + c + d));
                    const bool diag_in = (code == 5);
                    if (diag_in == center_in) {
                        emit(pL, pB);
                        emit(pR, pT);
                    } else {
                        emit(pL, pT);
                        emit(pB, pR);
                    }
                    break;
                }
                default: break;
            }
        }
    }
    for (auto& s : segs) {
        s.a = g.origin + s.a * g.h + Vec2{0.5 * g.h, 0.5 * g.h};
        s.b = g.origin + s.b * g.h + Vec2{0.5 * g.h, 0.5 * g.h};
    }
    return segs;
}

double contour_length_perimeter(const DensityField& f) {
    const auto segs = marching_squares_segments(f);
    if (segs.empty()) return 0.0;
    const double h = f.grid().h;
    const Vec2 o = f.grid().origin;

    // chain segments into closed loops; endpoints are quantized exactly since
    // crossings land on multiples of h/2³ or coarser
    auto key = [&](const Vec2& p) {
        const long long kx = std::llround((p.x - o.x) / h * 1048576.0);
        const long long ky = std::llround((p.y - o.y) / h * 1048576.0);
        return std::pair<long long, long long>(kx, ky);
    };
    std::map<std::pair<long long, long long>, std::vector<std::size_t>> at;
    for (std::size_t s = 0; s < segs.size(); ++s) {
        at[key(segs[s].a)].push_back(s);
        at[key(segs[s].b)].push_back(s);
    }

    std::vector<bool> used(segs.size(), false);
    double total = 0.0;
    for (std::size_t s0 = 0; s0 < segs.size(); ++s0) {
        if (used[s0]) continue;
        std::vector<Vec2> loop;
        used[s0] = true;
        loop.push_back(segs[s0].a);
        loop.push_back(segs[s0].b);
        auto cur = key(segs[s0].b);
        const auto start = key(segs[s0].a);
        while (cur != start) {
            std::size_t next = segs.size();
            for (std::size_t cand : at[cur])
                if (!used[cand]) {
                    next = cand;
                    break;
                }
            if (next == segs.size()) break;
            used[next] = true;
            const bool fwd = key(segs[next].a) == cur;
            const Vec2 tip = fwd ? segs[next].b : segs[next].a;
            cur = key(tip);
            if (cur != start) loop.push_back(tip);
        }
        // one midpoint pass: keeps collinear runs exact, removes the
        // staircase zigzag that the raw polygon picks up on curved boundaries
        const std::size_t n = loop.size();
        KahanSum len;
        for (std::size_t k = 0; k < n; ++k) {
            const Vec2 m0 = 0.5 * (loop[k] + loop[(k + 1) % n]);
            const Vec2 m1 = 0.5 * (loop[(k + 1) % n] + loop[(k + 2) % n]);
            len.add(dist(m0, m1));
        }
        total += len.value();
    }
    return total;
}

} // namespace

double scaled_perimeter(const DensityField& f, PerimeterEstimator estimator) {
    if (!f.border_ring_empty())
        throw std::invalid_argument(
            "scaled_perimeter: support must keep one empty boundary ring of cells");
    if (f.occupied_count() == 0) return 0.0;
    return estimator == PerimeterEstimator::EdgeCount ? edge_count_perimeter(f)
                                                      : contour_length_perimeter(f);
}

AdmissibilityReport validate_pair(const DensityField& u, const DensityField& v) {
    if (!(u.grid() == v.grid()) || u.epsilon() != v.epsilon())
        throw GeometryMismatchError("validate_pair: fields must share grid geometry and epsilon");
    AdmissibilityReport rep;
    rep.mass_u = u.total_mass();
    rep.mass_v = v.total_mass();
    const auto& a = u.occupancy();
    const auto& b = v.occupancy();
    for (std::size_t k = 0; k < a.size(); ++k)
        if (a[k] && b[k]) ++rep.overlap_cells;
    // occupancy is normalized to {0,1} at construction, so two-valuedness
    // cannot be violated here; the counter is kept for report symmetry
    rep.value_violations = 0;
    rep.is_admissible =
        rep.overlap_cells == 0 && rep.value_violations == 0 && rep.mass_u == rep.mass_v;
    return rep;
}

AdmissiblePair AdmissiblePair::make(DensityField u, DensityField v) {
    const auto rep = validate_pair(u, v);
    if (!rep.is_admissible)
        throw std::invalid_argument("AdmissiblePair: fields are not admissible");
    const double m = rep.mass_u;
    return AdmissiblePair{std::move(u), std::move(v), m};
}

void save_field(const DensityField& f, const std::string& base_path) {
    const auto& g = f.grid();
    {
        std::ofstream pgm(base_path + ".pgm");
        if (!pgm) throw std::runtime_error("save_field: cannot open " + base_path + ".pgm");
        pgm << "P2\n" << g.width << " " << g.height << "\n1\n";
        for (int j = g.height - 1; j >= 0; --j) {
            for (int i = 0; i < g.width; ++i) {
                pgm << (f.occupied(i, j) ? 1 : 0);
                pgm << (i + 1 == g.width ? '\n' : ' ');
            }
        }
    }
    nlohmann::json hdr;
    hdr["origin"] = {g.origin.x, g.origin.y};
    hdr["h"] = g.h;
    hdr["epsilon"] = f.epsilon();
    std::ofstream js(base_path + ".json");
    if (!js) throw std::runtime_error("save_field: cannot open " + base_path + ".json");
    // 17 significant digits make the double round trip exact
    js << hdr.dump(2) << "\n";
}

DensityField load_field(const std::string& base_path) {
    std::ifstream js(base_path + ".json");
    if (!js) throw std::runtime_error("load_field: cannot open " + base_path + ".json");
    nlohmann::json hdr;
    js >> hdr;

    std::ifstream pgm(base_path + ".pgm");
    if (!pgm) throw std::runtime_error("load_field: cannot open " + base_path + ".pgm");
    std::string magic;
    pgm >> magic;
    if (magic != "P2") throw std::runtime_error("load_field: expected P2 PGM");
    int w = 0, h = 0, maxval = 0;
    pgm >> w >> h >> maxval;
    if (maxval != 1) throw std::runtime_error("load_field: expected maxval 1");

    GridGeometry g;
    g.origin = {hdr.at("origin").at(0).get<double>(), hdr.at("origin").at(1).get<double>()};
    g.h = hdr.at("h").get<double>();
    g.width = w;
    g.height = h;

    std::vector<std::uint8_t> occ(static_cast<std::size_t>(w) * h, 0);
    for (int j = h - 1; j >= 0; --j)
        for (int i = 0; i < w; ++i) {
            int v = 0;
            pgm >> v;
            occ[static_cast<std::size_t>(j) * w + i] = v ? 1 : 0;
        }
    return DensityField(g, hdr.at("epsilon").get<double>(), std::move(occ));
}

} // namespace mklab
