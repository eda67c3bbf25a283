#pragma once

#include <vector>

#include "speckle/families.hpp"

namespace speckle {

/// Uniform evaluation grid over the intensity axis. The default covers the
/// 8-bit levels as integer bin centers 1..255 with unit width.
struct IntensityGrid {
    double first_center = 1.0;
    double width = 1.0;
    int bins = 255;

    double center(int i) const { return first_center + i * width; }
    double last_center() const { return center(bins - 1); }

    /// Same covered interval at double the resolution.
    IntensityGrid refined() const {
        return IntensityGrid{first_center - 0.25 * width, 0.5 * width, 2 * bins};
    }

    /// Grid with the given bin count over the default 8-bit range (0.5, 255.5).
    static IntensityGrid with_bins(int bins);
};

void validate_grid(const IntensityGrid& g);

/// Probability mass per bin from pdf(center) * width, renormalized over the grid.
std::vector<double> model_masses(const DistributionParams& p, const IntensityGrid& g);

}
