#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mklab/geometry.hpp"

namespace mklab {

// Uniform grid geometry. Cell (i,j) has its center at
// origin + ((i+1/2)h, (j+1/2)h), i in [0,width), j in [0,height).
struct GridGeometry {
    Vec2 origin;
    double h = 1.0;
    int width = 0;
    int height = 0;

    Vec2 cell_center(int i, int j) const {
        return {origin.x + (i + 0.5) * h, origin.y + (j + 0.5) * h};
    }
    bool operator==(const GridGeometry& o) const {
        return origin.x == o.origin.x && origin.y == o.origin.y && h == o.h &&
               width == o.width && height == o.height;
    }
};

// Two-valued density on a uniform grid: occupied cells carry 1/epsilon, the
// rest are 0. Immutable after construction.
class DensityField {
public:
    DensityField(GridGeometry geom, double epsilon, std::vector<std::uint8_t> occupancy);

    const GridGeometry& grid() const { return geom_; }
    double epsilon() const { return eps_; }
    bool occupied(int i, int j) const { return occ_[idx(i, j)] != 0; }
    const std::vector<std::uint8_t>& occupancy() const { return occ_; }

    std::size_t occupied_count() const { return count_; }
    double total_mass() const;
    bool border_ring_empty() const;

private:
    std::size_t idx(int i, int j) const {
        return static_cast<std::size_t>(j) * geom_.width + i;
    }
    GridGeometry geom_;
    double eps_;
    std::vector<std::uint8_t> occ_;
    std::size_t count_ = 0;
};

DensityField rasterize_region(const std::function<bool(Vec2)>& predicate,
                              const GridGeometry& grid, double epsilon);

double total_mass(const DensityField& f);

enum class PerimeterEstimator { EdgeCount, ContourLength };

// Perimeter of supp(f), which for two-valued fields equals eps * int |grad f|.
// EdgeCount is the discrete total variation in the Manhattan norm (exact for
// cell-aligned sets, anisotropic on smooth boundaries). ContourLength is the
// marching-squares polygonization of the occupancy indicator at level 1/2 on
// the corner lattice, followed by one midpoint-smoothing pass of each loop;
// it is the isotropic estimator used against analytic curved solutions.
double scaled_perimeter(const DensityField& f, PerimeterEstimator estimator);

struct AdmissibilityReport {
    bool is_admissible = false;
    double mass_u = 0.0;
    double mass_v = 0.0;
    std::size_t overlap_cells = 0;
    std::size_t value_violations = 0;
};

AdmissibilityReport validate_pair(const DensityField& u, const DensityField& v);

struct AdmissiblePair {
    DensityField u;
    DensityField v;
    double mass = 0.0;

    // Throws unless validate_pair(u,v).is_admissible.
    static AdmissiblePair make(DensityField u, DensityField v);
};

// Plain PGM (P2, maxval 1) plus a JSON sidecar {origin, h, epsilon}.
// save writes <base>.pgm and <base>.json; round trip is bit exact.
void save_field(const DensityField& f, const std::string& base_path);
DensityField load_field(const std::string& base_path);

} // namespace mklab
