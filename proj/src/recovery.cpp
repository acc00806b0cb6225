#include "mklab/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mklab/errors.hpp"
#include "mklab/ray_calculus.hpp"

namespace mklab {

namespace {

// t(m) on an offset-curve ray with sin(beta) = 1 and alpha' = kappa_tilde,
// in the rationalized form that is stable as kappa_tilde -> 0.
double ray_length_at_mass(double kappa_tilde, double eps, double m) {
    const double disc = 1.0 - 2.0 * eps * kappa_tilde * m;
    if (!(disc > 0.0))
        throw DegenerateRayError("ray_length_at_mass: nonpositive discriminant");
    return 2.0 * eps * m / (1.0 + std::sqrt(disc));
}

} // namespace

double admissible_epsilon(const ClosedCurve& c) {
    const auto prof = curvature_profile(c);
    const std::size_t n = c.size();
    double max_kappa = 0.0;
    for (double k : prof.kappa) max_kappa = std::max(max_kappa, std::abs(k));

    // reach from point-normal chords; exact on circles, approaches the
    // smaller of the min curvature radius and half the bottleneck width
    double reach = max_kappa > 0.0 ? 1.0 / max_kappa : std::numeric_limits<double>::max();
    const std::size_t stride = std::max<std::size_t>(1, n / 2048);
    for (std::size_t i = 0; i < n; i += stride) {
        const Vec2 p = c.samples[i];
        const Vec2 nu = prof.normal[i];
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const Vec2 d = c.samples[j] - p;
            const double c2 = d.norm2();
            const double h = std::abs(d.dot(nu));
            if (h < 1e-14 * std::sqrt(c2)) continue; // chord along the tangent
            reach = std::min(reach, c2 / (2.0 * h));
        }
    }
    if (!(max_kappa > 0.0) && reach == std::numeric_limits<double>::max())
        throw DegenerateCurveError("admissible_epsilon: degenerate curve");
    const double curv_cap = max_kappa > 0.0 ? 1.0 / (4.0 * max_kappa)
                                            : std::numeric_limits<double>::max();
    return std::min(curv_cap, reach / 4.0);
}

std::pair<OffsetFrame, OffsetFrame> build_offset_frames(const ClosedCurve& c, double eps) {
    if (!(eps > 0.0) || eps >= admissible_epsilon(c))
        throw InadmissibleEpsilonError("build_offset_frames: eps must be below admissible_epsilon");
    const auto prof = curvature_profile(c);
    const std::size_t n = c.size();
    const double ds = c.length() / static_cast<double>(n);

    OffsetFrame outer, inner;
    outer.side = OffsetFrame::Side::Outer;
    inner.side = OffsetFrame::Side::Inner;
    outer.epsilon = inner.epsilon = eps;
    outer.r.resize(n);
    inner.r.resize(n);
    outer.kappa_tilde.resize(n);
    inner.kappa_tilde.resize(n);
    outer.ray_len.resize(n);
    inner.ray_len.resize(n);
    outer.v_len.resize(n);
    inner.v_len.resize(n);
    outer.weight.resize(n);
    inner.weight.resize(n);

    double rp = 0.0, rm = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double kap = prof.kappa[k];
        const double wp = (1.0 - eps * kap) * ds; // dr = (1 - eps kappa) ds
        const double wm = (1.0 + eps * kap) * ds;
        outer.r[k] = rp;
        inner.r[k] = rm;
        rp += wp;
        rm += wm;
        outer.weight[k] = wp;
        inner.weight[k] = wm;
        outer.kappa_tilde[k] = kap / (1.0 - eps * kap);
        inner.kappa_tilde[k] = kap / (1.0 + eps * kap);
        // u side: mass -1 on the outer frame, +1 on the inner frame
        outer.ray_len[k] = ray_length_at_mass(outer.kappa_tilde[k], eps, -1.0);
        inner.ray_len[k] = ray_length_at_mass(inner.kappa_tilde[k], eps, 1.0);
        // v side: the opposite unit of mass
        outer.v_len[k] = ray_length_at_mass(outer.kappa_tilde[k], eps, 1.0);
        inner.v_len[k] = ray_length_at_mass(inner.kappa_tilde[k], eps, -1.0);
    }
    outer.length = rp;
    inner.length = rm;
    return {outer, inner};
}

RecoveryEnergy recovery_energy_semianalytic(const ClosedCurve& c, double eps) {
    const auto [outer, inner] = build_offset_frames(c, eps);
    const std::size_t n = c.size();
    KahanSum d1;
    for (std::size_t k = 0; k < n; ++k) {
        RayFrame fp{1.0, outer.kappa_tilde[k], 1.0, eps};
        RayFrame fm{1.0, inner.kappa_tilde[k], 1.0, eps};
        d1.add(outer.weight[k] * per_ray_cost_exact(fp));
        d1.add(inner.weight[k] * per_ray_cost_exact(fm));
    }
    RecoveryEnergy out;
    out.d1 = d1.value();
    out.interface = outer.length + inner.length; // = 2L
    out.mass = out.interface;
    out.F = out.d1 / eps + out.interface;
    out.G = (out.F - 2.0 * out.mass) / (eps * eps);
    return out;
}

double recovery_upper_bound(const ClosedCurve& c, double eps) {
    const auto [outer, inner] = build_offset_frames(c, eps);
    const auto prof = curvature_profile(c);
    const std::size_t n = c.size();
    const double ds = c.length() / static_cast<double>(n);
    KahanSum sum;
    sum.add(outer.length + inner.length); // 2L
    double maxp = 0.0, maxm = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double kap = prof.kappa[k];
        const double k2 = kap * kap;
        sum.add(0.5 * eps * eps * k2 * ds);
        sum.add(0.5 * eps * eps * eps * eps * k2 * k2 / (1.0 - eps * eps * k2) * ds);
        maxp = std::max(maxp, std::abs(outer.kappa_tilde[k]));
        maxm = std::max(maxm, std::abs(inner.kappa_tilde[k]));
    }
    const double e4 = eps * eps * eps * eps;
    sum.add(e4 * (7.0 / 9.0) *
            (outer.length * maxp * maxp * maxp * maxp + inner.length * maxm * maxm * maxm * maxm));
    return sum.value();
}

RecoveryPair build_recovery_pair(const ClosedCurve& c, double eps, double h) {
    auto frames = build_offset_frames(c, eps);
    if (!(h > 0.0) || h > eps / 4.0)
        throw GridTooCoarseError("build_recovery_pair: need h <= eps/4");
    const auto prof = curvature_profile(c);
    const std::size_t n = c.size();

    Vec2 lo{std::numeric_limits<double>::max(), std::numeric_limits<double>::max()};
    Vec2 hi{-lo.x, -lo.y};
    for (const auto& p : c.samples) {
        lo.x = std::min(lo.x, p.x);
        lo.y = std::min(lo.y, p.y);
        hi.x = std::max(hi.x, p.x);
        hi.y = std::max(hi.y, p.y);
    }
    const double margin = 3.0 * eps + 3.0 * h;
    GridGeometry grid;
    grid.origin = {lo.x - margin, lo.y - margin};
    grid.h = h;
    grid.width = static_cast<int>(std::ceil((hi.x - lo.x + 2.0 * margin) / h)) + 1;
    grid.height = static_cast<int>(std::ceil((hi.y - lo.y + 2.0 * margin) / h)) + 1;

    const std::size_t ncell = static_cast<std::size_t>(grid.width) * grid.height;
    std::vector<std::uint8_t> occ_u(ncell, 0), occ_v(ncell, 0);

    // per-cell band classification in normal coordinates around the curve
    struct CellInfo {
        double depth;   // signed-side distance minus band start
        double band;    // v-band width on this cell's side
        std::size_t id; // row-major index
        int side;       // +1 outer (+nu), -1 inner
    };
    std::vector<CellInfo> v_cells, candidates;
    const double band_cap = 3.0 * eps;

    std::size_t id = 0;
    for (int j = 0; j < grid.height; ++j) {
        for (int i = 0; i < grid.width; ++i, ++id) {
            const Vec2 x = grid.cell_center(i, j);
            // nearest sample, then exact distance to the adjacent segments
            std::size_t kbest = 0;
            double dbest = std::numeric_limits<double>::max();
            for (std::size_t k = 0; k < n; ++k) {
                const double d2 = (x - c.samples[k]).norm2();
                if (d2 < dbest) {
                    dbest = d2;
                    kbest = k;
                }
            }
            double d = std::numeric_limits<double>::max();
            for (std::size_t off = 0; off < 2; ++off) {
                const std::size_t ka = (kbest + n - 1 + off) % n;
                const Vec2 a = c.samples[ka];
                const Vec2 b = c.samples[(ka + 1) % n];
                const Vec2 ab = b - a;
                const double t = std::clamp((x - a).dot(ab) / ab.norm2(), 0.0, 1.0);
                d = std::min(d, dist(x, a + ab * t));
            }
            if (d > band_cap + 2.0 * h) continue;
            const int side = (x - c.samples[kbest]).dot(prof.normal[kbest]) >= 0.0 ? +1 : -1;
            if (d < eps) {
                occ_u[id] = 1;
                continue;
            }
            const double band = side > 0 ? frames.first.v_len[kbest]
                                         : -frames.second.v_len[kbest];
            const double depth = d - eps; // distance beyond the offset curve
            if (depth <= band) {
                occ_v[id] = 1;
                v_cells.push_back({depth - band, band, id, side});
            } else if (d <= band_cap) {
                candidates.push_back({depth - band, band, id, side});
            }
        }
    }

    // mass equalization: toggle v boundary-layer cells, nearest the band edge
    // first, row-major on ties
    std::size_t nu = 0, nv = 0;
    for (auto b : occ_u) nu += b;
    for (auto b : occ_v) nv += b;
    std::size_t toggled = 0;
    if (nv > nu) {
        std::sort(v_cells.begin(), v_cells.end(), [](const CellInfo& a, const CellInfo& b) {
            return a.depth != b.depth ? a.depth > b.depth : a.id < b.id;
        });
        for (std::size_t k = 0; k < nv - nu; ++k) {
            occ_v[v_cells[k].id] = 0;
            ++toggled;
        }
    } else if (nu > nv) {
        if (candidates.size() < nu - nv)
            throw GridTooCoarseError("build_recovery_pair: not enough cells to balance mass");
        std::sort(candidates.begin(), candidates.end(),
                  [](const CellInfo& a, const CellInfo& b) {
                      return a.depth != b.depth ? a.depth < b.depth : a.id < b.id;
                  });
        for (std::size_t k = 0; k < nu - nv; ++k) {
            occ_v[candidates[k].id] = 1;
            ++toggled;
        }
    }

    DensityField fu(grid, eps, std::move(occ_u));
    DensityField fv(grid, eps, std::move(occ_v));
    RecoveryPair pair{c,
                      eps,
                      std::move(fu),
                      std::move(fv),
                      std::move(frames.first),
                      std::move(frames.second),
                      0.0,
                      0.0,
                      toggled};
    pair.mass_u = pair.u.total_mass();
    pair.mass_v = pair.v.total_mass();
    return pair;
}

} // namespace mklab
