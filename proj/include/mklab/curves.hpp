#pragma once

#include <string>
#include <vector>

#include "mklab/geometry.hpp"

namespace mklab {

// Closed polyline: cyclic sample list, implied linear interpolation, no
// duplicated endpoint. Sign conventions (see docs/orientation.md): the unit
// normal is det(tangent, normal) = -1, i.e. the tangent rotated clockwise,
// and kappa = normal . gamma''. A convex curve traversed clockwise has
// kappa > 0 with the normal pointing into the enclosed region.
struct ClosedCurve {
    std::vector<Vec2> samples;
    bool arclength = false;

    std::size_t size() const { return samples.size(); }
    double length() const;
};

// n >= 8 equally spaced samples along the polyline, starting at samples[0].
ClosedCurve resample_arclength(const ClosedCurve& c, int n);

struct CurvatureProfile {
    std::vector<double> kappa;
    std::vector<Vec2> normal;
};

// Menger (circumscribed-circle) curvature of consecutive sample triples,
// signed per the convention above; exact on co-circular samples.
// Requires the arclength flag.
CurvatureProfile curvature_profile(const ClosedCurve& c);

struct CurveSystem {
    std::vector<ClosedCurve> curves;
    double total_length() const;
};

// (1/2) sum_i integral kappa_i^2 over arclength, by the per-sample midpoint rule.
double elastica_energy(const CurveSystem& system);

// Pointwise offset along the normal field, then arclength-resampled to the
// same sample count. Requires |delta| * max|kappa| < 1/4.
ClosedCurve offset_curve(const ClosedCurve& c, double delta);

// Canonical constructors. Circles and ellipses are traversed clockwise so
// that curvature is positive and the normal points inward.
ClosedCurve make_circle(Vec2 center, double radius, int n);
ClosedCurve make_ellipse(Vec2 center, double a, double b, int n);
ClosedCurve make_rounded_rectangle(Vec2 corner, double w, double h, double r, int n);
// r(theta) = R * (1 + sum_k coeffs[2k] cos((k+1)theta) + coeffs[2k+1] sin((k+1)theta))
ClosedCurve make_fourier_circle(Vec2 center, double radius,
                                const std::vector<double>& coeffs, int n);

void save_curve_csv(const ClosedCurve& c, const std::string& path);
ClosedCurve load_curve_csv(const std::string& path);
void save_system_json(const CurveSystem& system, const std::string& json_path,
                      const std::string& csv_prefix);
CurveSystem load_system_json(const std::string& json_path);

} // namespace mklab
