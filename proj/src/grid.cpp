#include "speckle/grid.hpp"

#include <cmath>
#include <stdexcept>

#include "speckle/distributions.hpp"

namespace speckle {

IntensityGrid IntensityGrid::with_bins(int bins) {
    if (bins < 1) throw std::invalid_argument("IntensityGrid: bins must be >= 1");
    const double width = 255.0 / bins;
    return IntensityGrid{0.5 + 0.5 * width, width, bins};
}

void validate_grid(const IntensityGrid& g) {
    if (g.bins < 1) throw std::invalid_argument("IntensityGrid: bins must be >= 1");
    if (!(g.width > 0.0) || !std::isfinite(g.width))
        throw std::invalid_argument("IntensityGrid: width must be positive");
    if (!std::isfinite(g.first_center)) throw std::invalid_argument("IntensityGrid: bad first center");
}

std::vector<double> model_masses(const DistributionParams& p, const IntensityGrid& g) {
    validate_grid(g);
    std::vector<double> mass(g.bins);
    double total = 0.0;
    for (int i = 0; i < g.bins; ++i) {
        const double c = g.center(i);
        const double f = c >= 0.0 ? pdf(p, c) : 0.0;
        mass[i] = std::isfinite(f) ? f * g.width : 0.0;
        total += mass[i];
    }
    if (total <= 0.0) {
        // model has no mass on the grid; fall back to uniform so ratios stay defined
        const double u = 1.0 / g.bins;
        for (double& m : mass) m = u;
        return mass;
    }
    for (double& m : mass) m /= total;
    return mass;
}

}
