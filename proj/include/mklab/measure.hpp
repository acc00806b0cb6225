#pragma once

#include <string>
#include <vector>

#include "mklab/density_field.hpp"
#include "mklab/geometry.hpp"

namespace mklab {

struct Atom {
    Vec2 p;
    double w = 0.0;
};

struct DiscreteMeasure {
    std::vector<Atom> atoms;

    double total() const {
        KahanSum s;
        for (const auto& a : atoms) s.add(a.w);
        return s.value();
    }
    void add(Vec2 p, double w) { atoms.push_back({p, w}); }
};

// One atom per occupied cell at the cell center, weight h^2 / eps,
// in row-major cell order.
DiscreteMeasure field_to_measure(const DensityField& f);

void save_measure_csv(const DiscreteMeasure& m, const std::string& path);
DiscreteMeasure load_measure_csv(const std::string& path);

} // namespace mklab
