#include <doctest.h>

#include <cmath>
#include <random>

#include "mklab/ray_calculus.hpp"
#include "oracles.hpp"

using namespace mklab;

namespace {
std::mt19937 rng(20240911);

RayFrame random_frame() {
    std::uniform_real_distribution<double> sb(0.25, 1.0), ap(-3.0, 3.0), ms(0.05, 1.0),
        ep(0.005, 0.25);
    for (;;) {
        RayFrame fr{sb(rng), ap(rng), ms(rng), ep(rng)};
        if (std::abs(fr.xi()) < 0.9) return fr;
    }
}
} // namespace

TEST_CASE("mass/length coordinate basics") {
    RayFrame straight{1.0, 0.0, 1.0, 0.1};
    CHECK(mass_of_length(straight, 0.0) == 0.0);
    CHECK(mass_of_length(straight, 0.05) == doctest::Approx(0.5).epsilon(1e-15)); // t/eps
    CHECK(length_of_mass(straight, 0.0) == 0.0);
    CHECK(length_of_mass(straight, 0.6) == doctest::Approx(0.06).epsilon(1e-15)); // eps m / sin

    RayFrame fr{1.0, 0.5, 1.0, 0.1};
    CHECK(mass_of_length(fr, 0.09) == doctest::Approx(0.879750).epsilon(1e-12));

    CHECK_THROWS_AS(mass_of_length(RayFrame{0.5, 2.0, 1.0, 0.1}, 0.3), RayRangeError);
    CHECK_THROWS_AS(length_of_mass(RayFrame{0.3, 3.0, 1.0, 0.5}, 1.0), DegenerateRayError);
    CHECK_THROWS_AS(mass_of_length(RayFrame{0.0, 0.0, 1.0, 0.1}, 0.0), DegenerateRayError);
}

TEST_CASE("inversion property on random admissible frames") {
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
        const RayFrame fr = random_frame();
        std::uniform_real_distribution<double> md(-fr.mass, fr.mass);
        const double m = md(rng);
        const double t = length_of_mass(fr, m);
        worst = std::max(worst, std::abs(mass_of_length(fr, t) - m));
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("per-ray exact cost") {
    // alpha' = 0 limit
    RayFrame straight{1.0, 0.0, 1.0, 0.05};
    CHECK(per_ray_cost_exact(straight) == doctest::Approx(0.05).epsilon(1e-15));

    // worked value: prefactor 13.3.., bracket at xi = 0.1
    RayFrame fr{1.0, 0.5, 1.0, 0.1};
    const double expect = (1.0 / (3.0 * 0.25 * 0.1)) *
                          (std::pow(1.1, 1.5) + std::pow(0.9, 1.5) - 2.0);
    CHECK(per_ray_cost_exact(fr) == doctest::Approx(expect).epsilon(1e-12));
    CHECK(per_ray_cost_exact(fr) == doctest::Approx(0.1000627).epsilon(1e-6));

    // even in alpha'
    RayFrame neg = fr;
    neg.alpha_prime = -fr.alpha_prime;
    CHECK(per_ray_cost_exact(neg) == doctest::Approx(per_ray_cost_exact(fr)).epsilon(1e-14));

    // on either side of the branch switch the values match the reference
    // series evaluated by hand at the same xi
    for (double s : {1.0, 0.7}) {
        for (double xi : {0.999e-2, 1.001e-2}) {
            RayFrame b{s, xi * s * s / (2.0 * 0.1 * 1.0), 1.0, 0.1};
            const double leading = b.epsilon / s;
            const double reference =
                leading * (1.0 + xi * xi / 16.0 + (7.0 / 384.0) * xi * xi * xi * xi);
            CHECK(per_ray_cost_exact(b) == doctest::Approx(reference).epsilon(1e-12));
        }
    }

    RayFrame bad{0.5, 4.0, 1.0, 0.5};
    CHECK_THROWS_AS(per_ray_cost_exact(bad), ExpansionDomainError);
}

TEST_CASE("per-ray cost equals the quadrature oracle on 1000 random frames") {
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
        const RayFrame fr = random_frame();
        const double q = oracle::integrate(
            [&](double m) {
                return length_of_mass(fr, m) - length_of_mass(fr, m - fr.mass);
            },
            0.0, fr.mass, 1e-14);
        const double e = per_ray_cost_exact(fr);
        worst = std::max(worst, std::abs(q - e) / e);
    }
    CHECK(worst < 1e-10);
}

TEST_CASE("series terms and remainder bound") {
    RayFrame straight{1.0, 0.0, 1.0, 0.05};
    auto s0 = per_ray_cost_series(straight);
    CHECK(s0.bending == 0.0);
    CHECK(s0.remainder_bound == 0.0);
    CHECK(per_ray_cost_exact(straight) == doctest::Approx(s0.leading).epsilon(1e-15));

    RayFrame fr{1.0, 0.5, 1.0, 0.1};
    auto s = per_ray_cost_series(fr);
    CHECK(s.leading == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(s.bending == doctest::Approx(6.25e-5).epsilon(1e-12));
    const double rem = per_ray_cost_exact(fr) - s.leading - s.bending;
    CHECK(rem >= 0.0);
    CHECK(rem <= s.remainder_bound);

    // eps^5 scaling of the bound under eps halving
    RayFrame half = fr;
    half.epsilon = 0.05;
    CHECK(per_ray_cost_series(fr).remainder_bound /
              per_ray_cost_series(half).remainder_bound ==
          doctest::Approx(32.0).epsilon(1e-9));
}

TEST_CASE("series bound holds on random frames") {
    // the 1e-12 leading-term slack absorbs the closed-form rounding noise
    for (int k = 0; k < 1000; ++k) {
        const RayFrame fr = random_frame();
        const auto s = per_ray_cost_series(fr);
        const double rem = per_ray_cost_exact(fr) - s.leading - s.bending;
        CHECK(rem >= -1e-12 * s.leading);
        CHECK(rem <= s.remainder_bound * (1.0 + 1e-12) + 1e-300);
    }
}

TEST_CASE("lower bound integrand") {
    auto opt = lower_bound_integrand(RayFrame{1.0, 0.7, 1.0, 0.1});
    CHECK(opt.thickness_penalty == 0.0);
    CHECK(opt.angle_penalty == 0.0);
    CHECK(opt.bending_term == doctest::Approx(0.49 / 4.0).epsilon(1e-15));

    auto th = lower_bound_integrand(RayFrame{1.0, 0.0, 0.9, 0.1});
    CHECK(th.thickness_penalty == doctest::Approx(1.0).epsilon(1e-12));

    auto an = lower_bound_integrand(RayFrame{0.8, 0.0, 1.0, 0.1});
    CHECK(an.angle_penalty == doctest::Approx(25.0).epsilon(1e-12));

    for (int k = 0; k < 100; ++k) {
        const auto v = lower_bound_integrand(random_frame());
        CHECK(v.thickness_penalty >= 0.0);
        CHECK(v.angle_penalty >= 0.0);
        CHECK(v.bending_term >= 0.0);
    }
}
