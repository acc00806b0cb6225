#pragma once

#include "mklab/density_field.hpp"
#include "mklab/ot.hpp"

namespace mklab {

struct EnergyBreakdown {
    double d1 = 0.0;
    double perimeter = 0.0; // eps * int |grad u|
    double F = 0.0;         // perimeter + d1/eps
    double G = 0.0;         // (F - 2M)/eps^2
    double mass = 0.0;
};

// The full functional on an admissible rasterized pair: exact discrete
// transport plus the chosen perimeter estimator.
EnergyBreakdown evaluate_energy(const DensityField& u, const DensityField& v,
                                PerimeterEstimator estimator,
                                const SolverOptions& options = {});

} // namespace mklab
