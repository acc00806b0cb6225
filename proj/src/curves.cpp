#include "mklab/curves.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "mklab/errors.hpp"

namespace mklab {

namespace {
constexpr double kPi = std::numbers::pi;

void check_curve(const ClosedCurve& c) {
    if (c.samples.size() < 8)
        throw DegenerateCurveError("ClosedCurve: need at least 8 samples");
    const std::size_t n = c.samples.size();
    for (std::size_t k = 0; k < n; ++k)
        if (dist(c.samples[k], c.samples[(k + 1) % n]) == 0.0)
            throw DegenerateCurveError("ClosedCurve: consecutive samples coincide");
}
} // namespace

double ClosedCurve::length() const {
    const std::size_t n = samples.size();
    KahanSum s;
    for (std::size_t k = 0; k < n; ++k) s.add(dist(samples[k], samples[(k + 1) % n]));
    return s.value();
}

ClosedCurve resample_arclength(const ClosedCurve& c, int n) {
    if (n < 8) throw std::invalid_argument("resample_arclength: n must be at least 8");
    check_curve(c);
    const std::size_t m = c.samples.size();
    std::vector<double> cum(m + 1, 0.0);
    for (std::size_t k = 0; k < m; ++k)
        cum[k + 1] = cum[k] + dist(c.samples[k], c.samples[(k + 1) % m]);
    const double L = cum[m];
    if (!(L > 0.0)) throw DegenerateCurveError("resample_arclength: zero-length curve");

    ClosedCurve out;
    out.samples.resize(n);
    out.arclength = true;
    std::size_t seg = 0;
    for (int k = 0; k < n; ++k) {
        const double t = L * static_cast<double>(k) / n;
        while (seg + 1 < m && cum[seg + 1] <= t) ++seg;
        const double seg_len = cum[seg + 1] - cum[seg];
        const double u = seg_len > 0.0 ? (t - cum[seg]) / seg_len : 0.0;
        const Vec2 a = c.samples[seg];
        const Vec2 b = c.samples[(seg + 1) % m];
        out.samples[k] = a + (b - a) * u;
    }
    check_curve(out);
    return out;
}

CurvatureProfile curvature_profile(const ClosedCurve& c) {
    if (!c.arclength)
        throw std::invalid_argument("curvature_profile: curve must be arclength-resampled");
    check_curve(c);
    const std::size_t n = c.samples.size();
    CurvatureProfile prof;
    prof.kappa.resize(n);
    prof.normal.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        const Vec2& p0 = c.samples[(k + n - 1) % n];
        const Vec2& p1 = c.samples[k];
        const Vec2& p2 = c.samples[(k + 1) % n];
        const Vec2 e0 = p1 - p0;
        const Vec2 e1 = p2 - p1;
        const double cr = e0.cross(e1);
        const double denom = e0.norm() * e1.norm() * (p2 - p0).norm();
        prof.kappa[k] = denom > 0.0 && cr != 0.0 ? -2.0 * cr / denom : 0.0;
        prof.normal[k] = (p2 - p0).normalized().rot_cw();
    }
    return prof;
}

double CurveSystem::total_length() const {
    double s = 0.0;
    for (const auto& c : curves) s += c.length();
    return s;
}

double elastica_energy(const CurveSystem& system) {
    KahanSum w;
    for (const auto& c : system.curves) {
        const auto prof = curvature_profile(c);
        const double ds = c.length() / static_cast<double>(c.size());
        for (double kappa : prof.kappa) w.add(0.5 * kappa * kappa * ds);
    }
    return w.value();
}

ClosedCurve offset_curve(const ClosedCurve& c, double delta) {
    const auto prof = curvature_profile(c);
    double max_abs_kappa = 0.0;
    for (double k : prof.kappa) max_abs_kappa = std::max(max_abs_kappa, std::abs(k));
    if (std::abs(delta) * max_abs_kappa >= 0.25)
        throw OffsetTooLargeError("offset_curve: |delta| * max|kappa| must stay below 1/4");
    ClosedCurve shifted;
    shifted.samples.resize(c.size());
    for (std::size_t k = 0; k < c.size(); ++k)
        shifted.samples[k] = c.samples[k] + delta * prof.normal[k];
    return resample_arclength(shifted, static_cast<int>(c.size()));
}

ClosedCurve make_circle(Vec2 center, double radius, int n) {
    if (!(radius > 0.0)) throw std::invalid_argument("make_circle: radius must be positive");
    if (n < 8) throw std::invalid_argument("make_circle: n must be at least 8");
    ClosedCurve c;
    c.samples.resize(n);
    c.arclength = true;
    for (int k = 0; k < n; ++k) {
        const double th = -2.0 * kPi * k / n; // clockwise
        c.samples[k] = center + Vec2{radius * std::cos(th), radius * std::sin(th)};
    }
    return c;
}

ClosedCurve make_ellipse(Vec2 center, double a, double b, int n) {
    if (!(a > 0.0) || !(b > 0.0))
        throw std::invalid_argument("make_ellipse: semi-axes must be positive");
    if (n < 8) throw std::invalid_argument("make_ellipse: n must be at least 8");
    ClosedCurve dense;
    const int m = std::max(n * 8, 4096);
    dense.samples.resize(m);
    for (int k = 0; k < m; ++k) {
        const double th = -2.0 * kPi * k / m;
        dense.samples[k] = center + Vec2{a * std::cos(th), b * std::sin(th)};
    }
    return resample_arclength(dense, n);
}

ClosedCurve make_rounded_rectangle(Vec2 corner, double w, double h, double r, int n) {
    if (!(w > 0.0) || !(h > 0.0) || !(r > 0.0) || 2.0 * r >= std::min(w, h))
        throw std::invalid_argument("make_rounded_rectangle: need 0 < 2r < min(w,h)");
    if (n < 8) throw std::invalid_argument("make_rounded_rectangle: n must be at least 8");
    // dense counterclockwise outline, reversed at the end to traverse clockwise
    std::vector<Vec2> pts;
    const int arc_steps = 256;
    auto arc = [&](Vec2 ctr, double a0, double a1) {
        for (int k = 0; k <= arc_steps; ++k) {
            const double a = a0 + (a1 - a0) * k / arc_steps;
            pts.push_back(ctr + Vec2{r * std::cos(a), r * std::sin(a)});
        }
    };
    const double x0 = corner.x, y0 = corner.y;
    pts.push_back({x0 + r, y0});
    pts.push_back({x0 + w - r, y0});
    arc({x0 + w - r, y0 + r}, -kPi / 2, 0.0);
    pts.push_back({x0 + w, y0 + h - r});
    arc({x0 + w - r, y0 + h - r}, 0.0, kPi / 2);
    pts.push_back({x0 + r, y0 + h});
    arc({x0 + r, y0 + h - r}, kPi / 2, kPi);
    pts.push_back({x0, y0 + r});
    arc({x0 + r, y0 + r}, kPi, 1.5 * kPi);
    std::reverse(pts.begin(), pts.end());
    // drop consecutive duplicates introduced by arc endpoints
    std::vector<Vec2> clean;
    for (const auto& p : pts)
        if (clean.empty() || dist(clean.back(), p) > 1e-14) clean.push_back(p);
    while (clean.size() > 1 && dist(clean.front(), clean.back()) <= 1e-14) clean.pop_back();
    ClosedCurve c;
    c.samples = std::move(clean);
    return resample_arclength(c, n);
}

ClosedCurve make_fourier_circle(Vec2 center, double radius,
                                const std::vector<double>& coeffs, int n) {
    if (!(radius > 0.0))
        throw std::invalid_argument("make_fourier_circle: radius must be positive");
    if (n < 8) throw std::invalid_argument("make_fourier_circle: n must be at least 8");
    ClosedCurve dense;
    const int m = std::max(n * 8, 4096);
    dense.samples.resize(m);
    for (int k = 0; k < m; ++k) {
        const double th = -2.0 * kPi * k / m;
        double rho = 1.0;
        for (std::size_t j = 0; 2 * j + 1 < coeffs.size() + 1; ++j) {
            const double mode = static_cast<double>(j + 1);
            rho += coeffs[2 * j] * std::cos(mode * th);
            if (2 * j + 1 < coeffs.size()) rho += coeffs[2 * j + 1] * std::sin(mode * th);
        }
        if (!(rho > 0.05))
            throw DegenerateCurveError("make_fourier_circle: perturbation collapses the radius");
        dense.samples[k] = center + Vec2{radius * rho * std::cos(th), radius * rho * std::sin(th)};
    }
    return resample_arclength(dense, n);
}

void save_curve_csv(const ClosedCurve& c, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_curve_csv: cannot open " + path);
    out.precision(17);
    out << "x,y\n";
    for (const auto& p : c.samples) out << p.x << "," << p.y << "\n";
}

ClosedCurve load_curve_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_curve_csv: cannot open " + path);
    ClosedCurve c;
    std::string line;
    std::getline(in, line); // header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string sx, sy;
        std::getline(ss, sx, ',');
        std::getline(ss, sy, ',');
        c.samples.push_back({std::stod(sx), std::stod(sy)});
    }
    check_curve(c);
    return c;
}

void save_system_json(const CurveSystem& system, const std::string& json_path,
                      const std::string& csv_prefix) {
    nlohmann::json j;
    j["curves"] = nlohmann::json::array();
    for (std::size_t k = 0; k < system.curves.size(); ++k) {
        const std::string csv = csv_prefix + "_" + std::to_string(k) + ".csv";
        save_curve_csv(system.curves[k], csv);
        j["curves"].push_back(csv);
    }
    std::ofstream out(json_path);
    if (!out) throw std::runtime_error("save_system_json: cannot open " + json_path);
    out << j.dump(2) << "\n";
}

CurveSystem load_system_json(const std::string& json_path) {
    std::ifstream in(json_path);
    if (!in) throw std::runtime_error("load_system_json: cannot open " + json_path);
    nlohmann::json j;
    in >> j;
    CurveSystem sys;
    for (const auto& path : j.at("curves")) sys.curves.push_back(load_curve_csv(path.get<std::string>()));
    return sys;
}

} // namespace mklab
