#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace speckle {

class StatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct TTestResult {
    double t = 0.0;
    double p = 1.0;
    double df = 0.0;
};

/// Two-sided two-sample Student's t-test. Pooled variance by default;
/// welch switches to the unequal-variance form.
TTestResult two_sample_t_test(std::span<const double> a, std::span<const double> b,
                              bool welch = false);

/// Bonferroni-corrected significance threshold alpha / n.
double bonferroni_alpha(double alpha, std::size_t n_comparisons);

/// Family-wise type-I error probability 1 - (1 - alpha)^n.
double family_wise_error(double alpha, std::size_t n_comparisons);

struct AnovaResult {
    double f = 0.0;
    double p = 1.0;
    double df_between = 0.0;
    double df_within = 0.0;
};

AnovaResult one_way_anova(std::span<const std::vector<double>> groups);

struct TukeyPair {
    std::size_t i = 0;
    std::size_t j = 0;
    double q = 0.0;
    double p_adjusted = 1.0;
};

/// Tukey HSD adjusted p-values for every group pair (Tukey-Kramer for
/// unequal sizes).
std::vector<TukeyPair> tukey_posthoc(std::span<const std::vector<double>> groups);

struct PearsonResult {
    double rho = 0.0;
    double p = 1.0;
    std::size_t n = 0;
};

/// Two-tailed Pearson correlation.
PearsonResult pearson_correlation(std::span<const double> x, std::span<const double> y);

double sample_mean(std::span<const double> xs);
double sample_variance(std::span<const double> xs);  // unbiased
double sample_skewness(std::span<const double> xs);
double sample_excess_kurtosis(std::span<const double> xs);

}
