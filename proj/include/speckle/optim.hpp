#pragma once

#include <functional>
#include <vector>

namespace speckle {

struct SimplexResult {
    std::vector<double> x;
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Derivative-free Nelder-Mead minimization. Stops when the simplex diameter
/// (max vertex distance, inf-norm) falls below diameter_tol.
SimplexResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                          std::vector<double> start, double initial_step, double diameter_tol,
                          int max_iterations);

}
