#include "mklab/measure.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mklab {

DiscreteMeasure field_to_measure(const DensityField& f) {
    DiscreteMeasure m;
    const auto& g = f.grid();
    const double w = g.h * g.h / f.epsilon();
    m.atoms.reserve(f.occupied_count());
    for (int j = 0; j < g.height; ++j)
        for (int i = 0; i < g.width; ++i)
            if (f.occupied(i, j)) m.add(g.cell_center(i, j), w);
    return m;
}

void save_measure_csv(const DiscreteMeasure& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_measure_csv: cannot open " + path);
    out.precision(17);
    out << "x,y,w\n";
    for (const auto& a : m.atoms) out << a.p.x << "," << a.p.y << "," << a.w << "\n";
}

DiscreteMeasure load_measure_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_measure_csv: cannot open " + path);
    DiscreteMeasure m;
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string sx, sy, sw;
        std::getline(ss, sx, ',');
        std::getline(ss, sy, ',');
        std::getline(ss, sw, ',');
        m.add({std::stod(sx), std::stod(sy)}, std::stod(sw));
    }
    return m;
}

} // namespace mklab
