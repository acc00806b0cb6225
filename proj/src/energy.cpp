#include "mklab/energy.hpp"

#include <stdexcept>

namespace mklab {

EnergyBreakdown evaluate_energy(const DensityField& u, const DensityField& v,
                                PerimeterEstimator estimator, const SolverOptions& options) {
    const auto rep = validate_pair(u, v);
    if (!rep.is_admissible)
        throw std::invalid_argument("evaluate_energy: pair is not admissible");
    EnergyBreakdown out;
    out.mass = rep.mass_u;
    out.perimeter = scaled_perimeter(u, estimator);
    const auto plan = solve_transport(field_to_measure(u), field_to_measure(v), 1.0, options);
    out.d1 = plan.cost;
    const double eps = u.epsilon();
    out.F = out.perimeter + out.d1 / eps;
    out.G = (out.F - 2.0 * out.mass) / (eps * eps);
    return out;
}

} // namespace mklab
