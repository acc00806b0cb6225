#pragma once

#include <utility>
#include <vector>

#include "mklab/curves.hpp"
#include "mklab/density_field.hpp"

namespace mklab {

// Per-sample transport-ray data on one of the two offset curves of a tube
// construction. "Outer" is the +eps*normal offset, "inner" the -eps one
// (for a clockwise convex curve the outer offset is the geometrically inner
// boundary, since the normal points inward).
struct OffsetFrame {
    enum class Side { Outer, Inner };
    Side side = Side::Outer;
    double epsilon = 0.0;
    double length = 0.0;              // offset curve length L+ or L-
    std::vector<double> r;            // arclength position on the offset curve
    std::vector<double> kappa_tilde;  // offset curvature kappa/(1 -+ eps kappa)
    std::vector<double> ray_len;      // u-side ray end in length coordinates
    std::vector<double> v_len;        // v-side ray end in length coordinates
    std::vector<double> weight;       // dr element per center-curve sample
};

// Largest tube half-width the curve supports: min of the curvature bound
// 1/(4 max|kappa|) and a quarter of the discrete reach estimate
// min over sample pairs of |q-p|^2 / (2 |(q-p).n(p)|).
double admissible_epsilon(const ClosedCurve& c);

std::pair<OffsetFrame, OffsetFrame> build_offset_frames(const ClosedCurve& c, double eps);

struct RecoveryPair {
    ClosedCurve curve;
    double epsilon = 0.0;
    DensityField u;
    DensityField v;
    OffsetFrame outer;
    OffsetFrame inner;
    double mass_u = 0.0;
    double mass_v = 0.0;
    std::size_t equalized_cells = 0; // cells toggled to balance the masses
};

// u = eps-band around the curve, v = the two flanking bands bounded per
// sample by the ray lengths, rasterized on a grid of spacing h <= eps/4 and
// mass-balanced by toggling v boundary cells (deterministic order).
RecoveryPair build_recovery_pair(const ClosedCurve& c, double eps, double h);

struct RecoveryEnergy {
    double d1 = 0.0;        // transport part, per-ray closed forms integrated over r
    double interface = 0.0; // L+ + L- = 2L
    double F = 0.0;         // d1/eps + interface
    double G = 0.0;         // (F - 2 mass)/eps^2
    double mass = 0.0;      // 2L
};

RecoveryEnergy recovery_energy_semianalytic(const ClosedCurve& c, double eps);

// Closed-form upper bound for the transport part d1/eps:
//   2L + (eps^2/2) sum kappa^2 ds + (eps^4/2) sum kappa^4/(1-eps^2 kappa^2) ds
//      + eps^4 (7/9) (L+ max|ktilde+|^4 + L- max|ktilde-|^4),
// assembled from the per-ray remainder bounds; always >= the semianalytic value.
double recovery_upper_bound(const ClosedCurve& c, double eps);

} // namespace mklab
