#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include "mklab/curves.hpp"
#include "mklab/errors.hpp"
#include "oracles.hpp"

using namespace mklab;
namespace {
constexpr double kPi = std::numbers::pi;

ClosedCurve square(double side, int per_side) {
    ClosedCurve c;
    for (int k = 0; k < per_side; ++k) c.samples.push_back({side * k / per_side, 0.0});
    for (int k = 0; k < per_side; ++k) c.samples.push_back({side, side * k / per_side});
    for (int k = 0; k < per_side; ++k) c.samples.push_back({side * (1.0 - 1.0 * k / per_side), side});
    for (int k = 0; k < per_side; ++k) c.samples.push_back({0.0, side * (1.0 - 1.0 * k / per_side)});
    return c;
}
} // namespace

TEST_CASE("resample_arclength") {
    auto sq = square(1.0, 4);
    auto r = resample_arclength(sq, 16); // n = 4k keeps the corners
    CHECK(r.length() == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(r.arclength);

    auto circle = make_circle({0, 0}, 1.0, 1024);
    CHECK(circle.length() == doctest::Approx(2.0 * kPi).epsilon(1e-5));
    CHECK(circle.length() == doctest::Approx(2048.0 * std::sin(kPi / 1024.0)).epsilon(1e-14));

    auto twice = resample_arclength(resample_arclength(circle, 512), 512);
    auto once = resample_arclength(circle, 512);
    double worst = 0.0;
    for (std::size_t k = 0; k < once.size(); ++k)
        worst = std::max(worst, dist(once.samples[k], twice.samples[k]));
    CHECK(worst < 1e-9);

    CHECK_THROWS_AS(resample_arclength(sq, 4), std::invalid_argument);
}

TEST_CASE("curvature profile") {
    // Menger curvature is exact on co-circular samples; coordinate rounding
    // leaves ~n^2 ulp of noise at fine sampling
    for (int n : {8, 64, 1024}) {
        auto c = make_circle({0.4, -0.2}, 2.5, n);
        auto prof = curvature_profile(c);
        for (double k : prof.kappa) CHECK(k == doctest::Approx(1.0 / 2.5).epsilon(1e-9));
        for (const auto& nu : prof.normal) CHECK(nu.norm() == doctest::Approx(1.0).epsilon(1e-12));
    }
    // normals point inward for the clockwise circle (det(t,n) = -1 convention)
    auto c = make_circle({0, 0}, 1.0, 64);
    auto prof = curvature_profile(c);
    for (std::size_t k = 0; k < c.size(); ++k)
        CHECK(c.samples[k].dot(prof.normal[k]) == doctest::Approx(-1.0).epsilon(1e-3));

    // flats of a rounded rectangle are collinear triples
    auto rr = make_rounded_rectangle({0, 0}, 4.0, 2.0, 0.5, 512);
    auto rp = curvature_profile(rr);
    int flat = 0;
    for (double k : rp.kappa)
        if (k == 0.0) ++flat;
    CHECK(flat > 100);
    for (double k : rp.kappa) CHECK(k > -1e-6); // convex: no negative curvature

    // ellipse a=2, b=1: curvature at the major-axis ends approaches a/b^2 = 2
    double worst = 0.0;
    auto el = make_ellipse({0, 0}, 2.0, 1.0, 4096);
    auto ep = curvature_profile(el);
    double maxk = 0.0;
    for (double k : ep.kappa) maxk = std::max(maxk, k);
    CHECK(maxk == doctest::Approx(2.0).epsilon(1e-3));
    (void)worst;
}

TEST_CASE("elastica energy") {
    for (double R : {1.0, 2.0, 5.0}) {
        CurveSystem sys;
        sys.curves.push_back(make_circle({0, 0}, R, 256));
        CHECK(elastica_energy(sys) == doctest::Approx(kPi / R).epsilon(1e-4));
    }
    CurveSystem two;
    two.curves.push_back(make_circle({0, 0}, 1.0, 256));
    two.curves.push_back(make_circle({5, 0}, 1.0, 256));
    CurveSystem one;
    one.curves.push_back(make_circle({0, 0}, 1.0, 256));
    CHECK(elastica_energy(two) == doctest::Approx(2.0 * elastica_energy(one)).epsilon(1e-12));

    // ellipse against adaptive quadrature of the analytic curvature
    const double W_exact = oracle::ellipse_elastica(2.0, 1.0);
    CurveSystem esys;
    esys.curves.push_back(make_ellipse({0, 0}, 2.0, 1.0, 8192));
    CHECK(elastica_energy(esys) == doctest::Approx(W_exact).epsilon(5e-3));

    // second-order convergence of the circle energy in 1/n
    const double e1 = std::abs(elastica_energy(CurveSystem{{make_circle({0, 0}, 1.0, 128)}}) - kPi);
    const double e2 = std::abs(elastica_energy(CurveSystem{{make_circle({0, 0}, 1.0, 256)}}) - kPi);
    CHECK(e1 / e2 > 3.0);
    CHECK(e1 / e2 < 5.0);
}

TEST_CASE("elastica invariances") {
    auto base = make_ellipse({0, 0}, 2.0, 1.0, 2048);
    const double W = elastica_energy(CurveSystem{{base}});
    // rigid motion
    ClosedCurve moved = base;
    const double th = 0.7;
    for (auto& p : moved.samples) {
        const Vec2 q{p.x * std::cos(th) - p.y * std::sin(th) + 3.0,
                     p.x * std::sin(th) + p.y * std::cos(th) - 1.0};
        p = q;
    }
    CHECK(elastica_energy(CurveSystem{{moved}}) == doctest::Approx(W).epsilon(1e-6));
    // reparametrization: two independent discretizations of the same curve
    // agree to 1e-6; resampling through polyline interpolation adds chord
    // noise to the curvature estimate and is only accurate to ~1e-3
    const double Wa = elastica_energy(CurveSystem{{make_ellipse({0, 0}, 2.0, 1.0, 8192)}});
    const double Wb = elastica_energy(CurveSystem{{make_ellipse({0, 0}, 2.0, 1.0, 12288)}});
    CHECK(Wa == doctest::Approx(Wb).epsilon(1e-6));
    auto re = resample_arclength(make_ellipse({0, 0}, 2.0, 1.0, 8192), 1024);
    CHECK(elastica_energy(CurveSystem{{re}}) == doctest::Approx(Wa).epsilon(1e-2));
    // dilation: length scales by lambda, W by 1/lambda
    ClosedCurve big = base;
    for (auto& p : big.samples) p = p * 3.0;
    CHECK(big.length() == doctest::Approx(3.0 * base.length()).epsilon(1e-12));
    CHECK(elastica_energy(CurveSystem{{big}}) == doctest::Approx(W / 3.0).epsilon(1e-6));
    // total curvature of a convex curve
    auto prof = curvature_profile(base);
    double tot = 0.0;
    for (double k : prof.kappa) tot += k * base.length() / base.size();
    CHECK(tot == doctest::Approx(2.0 * kPi).epsilon(1e-6));
}

TEST_CASE("offset_curve") {
    // clockwise circle: +eps offset follows the inward normal
    auto c = make_circle({0, 0}, 2.0, 512);
    auto in = offset_curve(c, 0.25);
    CHECK(in.length() == doctest::Approx(2.0 * kPi * 1.75).epsilon(1e-4));
    auto same = offset_curve(c, 0.0);
    double worst = 0.0;
    for (std::size_t k = 0; k < c.size(); ++k)
        worst = std::max(worst, dist(c.samples[k], same.samples[k]));
    CHECK(worst < 1e-12);

    // counterclockwise circle has kappa < 0 and outward normal: +eps grows it
    ClosedCurve ccw = c;
    std::reverse(ccw.samples.begin(), ccw.samples.end());
    auto out = offset_curve(ccw, 0.25);
    CHECK(out.length() == doctest::Approx(2.0 * kPi * 2.25).epsilon(1e-4));

    CHECK_THROWS_AS(offset_curve(c, 1.9), OffsetTooLargeError); // delta * kappa >= 1/4

    // rounded square: L+ + L- = 2L (Gauss-Bonnet, total curvature 2 pi)
    auto rr = make_rounded_rectangle({0, 0}, 3.0, 3.0, 0.6, 8192);
    auto plus = offset_curve(rr, 0.05);
    auto minus = offset_curve(rr, -0.05);
    CHECK(plus.length() + minus.length() == doctest::Approx(2.0 * rr.length()).epsilon(1e-6));
}

TEST_CASE("curve csv round trip") {
    auto c = make_fourier_circle({0, 0}, 1.0, {0.05, -0.02, 0.01, 0.03}, 128);
    const auto path = (std::filesystem::temp_directory_path() / "mklab_curve.csv").string();
    save_curve_csv(c, path);
    auto c2 = load_curve_csv(path);
    REQUIRE(c2.size() == c.size());
    for (std::size_t k = 0; k < c.size(); ++k) CHECK(dist(c.samples[k], c2.samples[k]) == 0.0);
    std::filesystem::remove(path);
}
