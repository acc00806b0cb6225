#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mklab {

// Analytic benchmark solutions at density scale eps = 1; other scales are
// reached through ScaleMap below.

// Concentric ring structure: u occupies the annulus (r2, r3), v the two
// flanking annuli (r1, r2) and (r3, r4), with the interior radii placed at
//   r2^2 = (R^2 + r1^2)/2,   r3^2 = (R^2 + r4^2)/2,
// around the mean radius R = (r1 + r4)/2 and half-thickness t = (r4 - r1)/2.
struct RingConfig {
    double R = 0.0;
    double t = 0.0;
    double r1 = 0.0, r2 = 0.0, r3 = 0.0, r4 = 0.0;
};

inline RingConfig ring_radii(double R, double t) {
    if (!(R > 0.0) || !(t > 0.0) || !(t < R))
        throw std::invalid_argument("ring_radii: need 0 < t < R");
    RingConfig c;
    c.R = R;
    c.t = t;
    c.r1 = R - t;
    c.r4 = R + t;
    c.r2 = std::sqrt(0.5 * (R * R + c.r1 * c.r1));
    c.r3 = std::sqrt(0.5 * (R * R + c.r4 * c.r4));
    return c;
}

inline double ring_mass(const RingConfig& c) { return 2.0 * std::numbers::pi * c.R * c.t; }

// Transport cost of the inner annulus (u mass between r2 and the area-split
// radius R moved to the band r1..r2), in the monotone radial map's closed form.
inline double ring_d1_inner_bracket(double R, double t) {
    const double q = 1.0 - t / R + 0.5 * t * t / (R * R);
    return (2.0 * std::numbers::pi / 3.0) *
           (R * R * R + (R - t) * (R - t) * (R - t) - 2.0 * R * R * R * std::pow(q, 1.5));
}

// Same for the outer annulus; the inner expression with t replaced by -t.
inline double ring_d1_outer_bracket(double R, double t) {
    return ring_d1_inner_bracket(R, -t);
}

inline double ring_d1_exact(const RingConfig& c) {
    return ring_d1_inner_bracket(c.R, c.t) + ring_d1_outer_bracket(c.R, c.t);
}

inline double ring_interface(const RingConfig& c) {
    return 2.0 * std::numbers::pi * (c.r2 + c.r3);
}

inline double ring_energy_exact(const RingConfig& c) {
    return ring_d1_exact(c) + ring_interface(c);
}

// F1/M expanded around R = infinity, t = 2; remainder O(|t-2|^3 + R^-3).
inline double ring_energy_asymptotic(double R, double t) {
    return 2.0 + 0.25 * (t - 2.0) * (t - 2.0) + 0.25 / (R * R);
}

struct StripConfig {
    double t = 2.0;
    double M = 1.0;
};

// F1 of a strip of thickness t and length M/t flanked by half-width strips
// of v: (t/2 + 2/t) M + 2t, minimized over t at t = 2 with value 2M + 4.
inline double strip_energy(const StripConfig& c) {
    if (!(c.t > 0.0) || !(c.M > 0.0))
        throw std::invalid_argument("strip_energy: t and M must be positive");
    return (0.5 * c.t + 2.0 / c.t) * c.M + 2.0 * c.t;
}

struct DiscEnergy {
    double d1 = 0.0;
    double interface = 0.0;
};

// u = indicator of the disc of radius a = sqrt(M/pi), v = the equal-mass
// annulus a..a*sqrt(2); monotone radial transport in squared-radius mass
// coordinates gives d1 = (2 pi / 3)(2^{3/2} - 2) a^3, interface = 2 pi a.
inline DiscEnergy disc_energy(double M) {
    if (!(M > 0.0)) throw std::invalid_argument("disc_energy: M must be positive");
    const double a = std::sqrt(M / std::numbers::pi);
    DiscEnergy out;
    out.d1 = (2.0 * std::numbers::pi / 3.0) * (std::pow(2.0, 1.5) - 2.0) * a * a * a;
    out.interface = 2.0 * std::numbers::pi * a;
    return out;
}

// Exact spatial dilation by lambda with density scale 1/lambda:
//   eps -> lambda eps, M -> lambda M, d1 -> lambda^2 d1, F -> lambda F,
//   G -> G / lambda.
// to_unit_epsilon maps an eps-experiment onto the eps = 1 closed forms.
struct ScaleMap {
    double lambda = 1.0;

    static ScaleMap to_unit_epsilon(double eps) { return {1.0 / eps}; }
    double map_epsilon(double eps) const { return lambda * eps; }
    double map_mass(double M) const { return lambda * M; }
    double map_d1(double d1) const { return lambda * lambda * d1; }
    double map_energy(double F) const { return lambda * F; }
    double map_rescaled_energy(double G) const { return G / lambda; }
};

// The eps = 1 ring configuration that a band of half-width 1 around the
// circle of radius a = rho/eps produces when its v mass is balanced side by
// side: u occupies a-1..a+1 and the v bands end where each side has carried
// exactly its share. The two annulus brackets then apply with an effective
// mean radius sqrt(a^2-1) and distinct inner/outer thicknesses.
struct CircleBandEnergy {
    double d1 = 0.0;
    double interface = 0.0;
    double energy = 0.0; // d1 + interface
    double mass = 0.0;   // 4 pi a
};

inline CircleBandEnergy circle_band_energy_exact(double rho, double eps) {
    const double a = rho / eps;
    if (!(a > 3.0))
        throw std::invalid_argument("circle_band_energy_exact: need rho/eps > 3");
    const double reff = std::sqrt(a * a - 1.0);
    const double t_in = reff - std::sqrt((a - 1.0) * (a - 3.0));
    const double t_out = std::sqrt((a + 1.0) * (a + 3.0)) - reff;
    CircleBandEnergy out;
    out.d1 = ring_d1_inner_bracket(reff, t_in) + ring_d1_outer_bracket(reff, t_out);
    out.interface = 2.0 * std::numbers::pi * ((a - 1.0) + (a + 1.0));
    out.energy = out.d1 + out.interface;
    out.mass = 4.0 * std::numbers::pi * a;
    return out;
}

} // namespace mklab
