#pragma once

#include <cmath>

#include "mklab/errors.hpp"

namespace mklab {

// Per-ray transport data at one boundary point: the angle factor sin(beta)
// between ray and tangent, the ray-angle derivative alpha' along the curve,
// the mass M carried by the ray, and the density scale epsilon.
//
// Mass and length coordinates along a ray:
//   m(t) = (t sin(beta) - t^2 alpha'/2) / eps,
//   t(m) = its inverse on the monotone branch.
struct RayFrame {
    double sin_beta = 1.0;
    double alpha_prime = 0.0;
    double mass = 1.0;
    double epsilon = 1.0;

    // xi = 2 alpha' eps M / sin^2(beta), the expansion variable of the
    // per-ray cost; the calculus needs |xi| < 1.
    double xi() const { return 2.0 * alpha_prime * epsilon * mass / (sin_beta * sin_beta); }

    void require_valid() const {
        if (!(sin_beta > 0.0) || sin_beta > 1.0)
            throw DegenerateRayError("RayFrame: sin_beta must lie in (0,1]");
        if (!(epsilon > 0.0)) throw DegenerateRayError("RayFrame: epsilon must be positive");
        if (!(mass > 0.0) || mass > 1.0)
            throw DegenerateRayError("RayFrame: mass must lie in (0,1]");
    }
};

// m(t); requires t inside the monotone range sin(beta) - t alpha' > 0.
inline double mass_of_length(const RayFrame& fr, double t) {
    fr.require_valid();
    if (!(fr.sin_beta - t * fr.alpha_prime > 0.0))
        throw RayRangeError("mass_of_length: t outside the monotone range");
    return (t * fr.sin_beta - 0.5 * t * t * fr.alpha_prime) / fr.epsilon;
}

// t(m) through the rationalized form t = 2 eps m / (sin(beta) (1 + sqrt(disc)));
// algebraically equal to (sin(beta)/alpha')(1 - sqrt(disc)) and stable as
// alpha' -> 0.
inline double length_of_mass(const RayFrame& fr, double m) {
    fr.require_valid();
    const double s = fr.sin_beta;
    const double disc = 1.0 - 2.0 * fr.alpha_prime * fr.epsilon * m / (s * s);
    if (!(disc > 0.0))
        throw DegenerateRayError("length_of_mass: nonpositive discriminant");
    return 2.0 * fr.epsilon * m / (s * (1.0 + std::sqrt(disc)));
}

// Exact per-ray transport cost integral_0^M [t(m) - t(m-M)] dm, via the
// antiderivative closed form
//   sin^3(beta)/(3 alpha'^2 eps) [ (1+xi)^{3/2} + (1-xi)^{3/2} - 2 ].
// The bracket is evaluated through expm1/log1p so the quadratic cancellation
// at small xi keeps precision; below |xi| = 1e-2 a series branch avoids the
// 0/0 prefactor. At the switch both branches agree to better than 1e-12.
inline double per_ray_cost_exact(const RayFrame& fr) {
    fr.require_valid();
    const double xi = fr.xi();
    if (!(std::abs(xi) < 1.0))
        throw ExpansionDomainError("per_ray_cost_exact: |xi| must be below 1");
    const double s = fr.sin_beta;
    const double leading = fr.epsilon * fr.mass * fr.mass / s;
    const double xi2 = xi * xi;
    if (std::abs(xi) < 1e-2) {
        // bracket / ((3/4)xi^2) = 1 + xi^2/16 + (7/384) xi^4 + O(xi^6)
        return leading * (1.0 + xi2 / 16.0 + (7.0 / 384.0) * xi2 * xi2);
    }
    const double a2 = fr.alpha_prime * fr.alpha_prime;
    const double pref = s * s * s / (3.0 * a2 * fr.epsilon);
    const double bracket =
        std::expm1(1.5 * std::log1p(xi)) + std::expm1(1.5 * std::log1p(-xi));
    return pref * bracket;
}

struct PerRayCostSeries {
    double leading = 0.0;        // eps M^2 / sin(beta)
    double bending = 0.0;        // eps^3 alpha'^2 M^4 / (4 sin^5(beta))
    double remainder_bound = 0.0; // (7/9) eps^5 alpha'^4 M^6 / sin^9(beta)
};

// Two displayed expansion terms plus the eps^5 remainder bound; the exact
// cost satisfies  0 <= exact - leading - bending <= remainder_bound.
inline PerRayCostSeries per_ray_cost_series(const RayFrame& fr) {
    fr.require_valid();
    const double xi = fr.xi();
    if (!(std::abs(xi) < 1.0))
        throw ExpansionDomainError("per_ray_cost_series: |xi| must be below 1");
    const double s = fr.sin_beta;
    const double s2 = s * s;
    const double s4 = s2 * s2;
    const double M2 = fr.mass * fr.mass;
    const double a2 = fr.alpha_prime * fr.alpha_prime;
    const double e = fr.epsilon;
    PerRayCostSeries out;
    out.leading = e * M2 / s;
    out.bending = e * e * e * a2 * M2 * M2 / (4.0 * s4 * s);
    out.remainder_bound =
        (7.0 / 9.0) * e * e * e * e * e * a2 * a2 * M2 * M2 * M2 / (s4 * s4 * s);
    return out;
}

struct LowerBoundIntegrand {
    double thickness_penalty = 0.0; // (M-1)^2 / eps^2
    double angle_penalty = 0.0;     // (1/sin(beta) - 1) M^2 / eps^2
    double bending_term = 0.0;      // (1/(4 sin(beta))) (M/sin(beta))^4 alpha'^2
};

inline LowerBoundIntegrand lower_bound_integrand(const RayFrame& fr) {
    fr.require_valid();
    const double e2 = fr.epsilon * fr.epsilon;
    const double s = fr.sin_beta;
    const double M = fr.mass;
    const double q = M / s;
    LowerBoundIntegrand out;
    out.thickness_penalty = (M - 1.0) * (M - 1.0) / e2;
    out.angle_penalty = (1.0 / s - 1.0) * M * M / e2;
    out.bending_term = q * q * q * q * fr.alpha_prime * fr.alpha_prime / (4.0 * s);
    return out;
}

} // namespace mklab
