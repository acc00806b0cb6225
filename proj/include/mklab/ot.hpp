#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mklab/measure.hpp"

namespace mklab {

struct PlanEntry {
    std::int32_t i = 0; // source atom index
    std::int32_t j = 0; // target atom index
    double mass = 0.0;
};

struct TransportPlan {
    std::vector<PlanEntry> entries;
    double cost = 0.0; // sum mass * |x-y|^p
    double p = 1.0;

    double distance() const; // cost^(1/p)
};

struct SolverOptions {
    std::size_t capacity = 1u << 17;        // max atoms per side
    std::size_t dense_arc_limit = 1u << 22; // full bipartite arc set up to here
    int knn = 24;                            // candidate arcs per atom beyond that
};

// Exact optimal transport between equal-mass discrete measures with ground
// cost |x-y|^p. Solved by a transportation network simplex over the bipartite
// polytope; instances too large for the full arc set use nearest-neighbour
// candidate arcs with delayed column generation, so the returned plan is
// globally optimal either way.
TransportPlan solve_transport(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                              double p = 1.0, const SolverOptions& options = {});

// Kantorovich potential sampled on the atoms: phi_source[i] at mu's atoms,
// phi_target[j] at nu's atoms. Lipschitz-1 across the joint support.
struct DualPotential {
    std::vector<double> phi_source;
    std::vector<double> phi_target;
};

// Reconstructs a potential from an optimal p = 1 plan: phi is propagated
// along plan entries via phi(x) - phi(y) = |x-y|, component shifts are fixed
// by the cross-pair slack constraints, and the result is closed under the
// Lipschitz cone min_j(|z - y_j| + phi(y_j)).
DualPotential recover_dual(const TransportPlan& plan, const DiscreteMeasure& mu,
                           const DiscreteMeasure& nu);

// Returns cost - K(phi) where K(phi) = sum phi d(mu - nu). Throws
// InvalidPotentialError if phi is not Lipschitz-1 on the atoms.
double duality_check(const DualPotential& phi, const DiscreteMeasure& mu,
                     const DiscreteMeasure& nu, double cost);

void save_plan_csv(const TransportPlan& plan, const std::string& path);
TransportPlan load_plan_csv(const std::string& path);

// Piecewise-constant 1-D density on a uniform grid: cell k covers
// [origin + k dx, origin + (k+1) dx] with density values[k].
struct Density1D {
    double origin = 0.0;
    double dx = 1.0;
    std::vector<double> values;

    double total() const {
        KahanSum s;
        for (double v : values) s.add(v * dx);
        return s.value();
    }
};

struct MonotoneMap1D {
    std::vector<double> map_at_centers; // T evaluated at source cell centers
    double cost = 0.0;                  // integral |T(x) - x| f+(x) dx, exact
};

// Unique monotone (CDF-matching) rearrangement of f+ onto f-. With
// reverse_target set, source mass m is matched to target mass M - m, the
// orientation in which the matched coordinate decreases.
MonotoneMap1D monotone_transport_1d(const Density1D& fplus, const Density1D& fminus,
                                    bool reverse_target = false);

} // namespace mklab
