#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "speckle/families.hpp"

namespace speckle::kernels {

/// Sufficient statistics shared by the moment and likelihood estimators.
struct Moments {
    std::size_t n = 0;
    double sum = 0.0;
    double sum_sq = 0.0;
    double sum_quad = 0.0;
    double sum_log = 0.0;
    double min = 0.0;
    double max = 0.0;

    double mean() const { return sum / static_cast<double>(n); }
    double mean_sq() const { return sum_sq / static_cast<double>(n); }
    double mean_quad() const { return sum_quad / static_cast<double>(n); }
    double mean_log() const { return sum_log / static_cast<double>(n); }
};

/// Samples in weighted form. 8-bit pixel data collapses onto at most 255
/// distinct values, which turns every likelihood sweep into a 255-term sum;
/// continuous data keeps weight 1 per value. log(value) is precomputed once.
struct WeightedSamples {
    std::vector<double> values;
    std::vector<double> log_values;
    std::vector<double> weights;
    double total_weight = 0.0;
    std::size_t n_raw = 0;

    static WeightedSamples from(std::span<const double> xs);
};

/// Density evaluator with the parameter-only terms hoisted out of the loop.
class PreparedLogPdf {
public:
    explicit PreparedLogPdf(const DistributionParams& params);
    /// log density at x > 0 given precomputed log(x); -inf outside support.
    double operator()(double x, double log_x) const;

private:
    Family family_;
    double c0_ = 0.0, c1_ = 0.0, c2_ = 0.0, c3_ = 0.0;
};

// Reductions. The parallel versions accumulate fixed-size blocks and combine
// the partials in block order, so the result is identical for every thread
// count (including 1) and matches the serial reference to rounding.
Moments moments_serial(std::span<const double> xs);
Moments moments(std::span<const double> xs);
Moments moments(const WeightedSamples& ws);

double log_likelihood_serial(const DistributionParams& params, std::span<const double> xs);
double log_likelihood(const DistributionParams& params, std::span<const double> xs);
double log_likelihood(const DistributionParams& params, const WeightedSamples& ws);

std::vector<std::size_t> bin_counts_serial(std::span<const double> xs, double first_center,
                                           double width, std::size_t bins);
std::vector<std::size_t> bin_counts(std::span<const double> xs, double first_center, double width,
                                    std::size_t bins);

}
