#include "speckle/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "speckle/special_functions.hpp"

namespace speckle {

double sample_mean(std::span<const double> xs) {
    if (xs.empty()) throw StatError("sample_mean: empty input");
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

double sample_variance(std::span<const double> xs) {
    if (xs.size() < 2) throw StatError("sample_variance: needs at least 2 values");
    const double m = sample_mean(xs);
    double s = 0.0;
    for (double x : xs) s += (x - m) * (x - m);
    return s / static_cast<double>(xs.size() - 1);
}

double sample_skewness(std::span<const double> xs) {
    if (xs.size() < 3) throw StatError("sample_skewness: needs at least 3 values");
    const double m = sample_mean(xs);
    double m2 = 0.0, m3 = 0.0;
    for (double x : xs) {
        const double d = x - m;
        m2 += d * d;
        m3 += d * d * d;
    }
    const double n = static_cast<double>(xs.size());
    m2 /= n;
    m3 /= n;
    if (m2 <= 0.0) throw StatError("sample_skewness: zero variance");
    return m3 / std::pow(m2, 1.5);
}

double sample_excess_kurtosis(std::span<const double> xs) {
    if (xs.size() < 4) throw StatError("sample_excess_kurtosis: needs at least 4 values");
    const double m = sample_mean(xs);
    double m2 = 0.0, m4 = 0.0;
    for (double x : xs) {
        const double d = x - m;
        m2 += d * d;
        m4 += d * d * d * d;
    }
    const double n = static_cast<double>(xs.size());
    m2 /= n;
    m4 /= n;
    if (m2 <= 0.0) throw StatError("sample_excess_kurtosis: zero variance");
    return m4 / (m2 * m2) - 3.0;
}

TTestResult two_sample_t_test(std::span<const double> a, std::span<const double> b, bool welch) {
    if (a.size() < 2 || b.size() < 2)
        throw StatError("two_sample_t_test: each group needs at least 2 values");
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    const double ma = sample_mean(a), mb = sample_mean(b);
    const double va = sample_variance(a), vb = sample_variance(b);
    if (!std::isfinite(va) || !std::isfinite(vb))
        throw StatError("two_sample_t_test: non-finite variance");

    TTestResult r;
    if (welch) {
        const double se2 = va / na + vb / nb;
        if (se2 <= 0.0) throw StatError("two_sample_t_test: zero variance in both groups");
        r.t = (ma - mb) / std::sqrt(se2);
        r.df = se2 * se2 /
               (va * va / (na * na * (na - 1.0)) + vb * vb / (nb * nb * (nb - 1.0)));
    } else {
        const double pooled = ((na - 1.0) * va + (nb - 1.0) * vb) / (na + nb - 2.0);
        if (pooled <= 0.0) throw StatError("two_sample_t_test: zero pooled variance");
        r.t = (ma - mb) / std::sqrt(pooled * (1.0 / na + 1.0 / nb));
        r.df = na + nb - 2.0;
    }
    r.p = (ma == mb) ? 1.0 : student_t_two_sided_p(r.t, r.df);
    return r;
}

double bonferroni_alpha(double alpha, std::size_t n_comparisons) {
    if (!(alpha > 0.0) || !(alpha < 1.0)) throw StatError("bonferroni_alpha: alpha must be in (0,1)");
    if (n_comparisons < 1) throw StatError("bonferroni_alpha: n must be >= 1");
    return alpha / static_cast<double>(n_comparisons);
}

double family_wise_error(double alpha, std::size_t n_comparisons) {
    if (!(alpha > 0.0) || !(alpha < 1.0)) throw StatError("family_wise_error: alpha must be in (0,1)");
    return 1.0 - std::pow(1.0 - alpha, static_cast<double>(n_comparisons));
}

AnovaResult one_way_anova(std::span<const std::vector<double>> groups) {
    if (groups.size() < 2) throw StatError("one_way_anova: needs at least 2 groups");
    double n_total = 0.0, grand_sum = 0.0;
    for (const auto& g : groups) {
        if (g.size() < 2) throw StatError("one_way_anova: each group needs at least 2 values");
        for (double x : g) {
            grand_sum += x;
            n_total += 1.0;
        }
    }
    const double grand_mean = grand_sum / n_total;
    double ss_between = 0.0, ss_within = 0.0;
    for (const auto& g : groups) {
        const double m = sample_mean(g);
        ss_between += static_cast<double>(g.size()) * (m - grand_mean) * (m - grand_mean);
        for (double x : g) ss_within += (x - m) * (x - m);
    }
    if (ss_between + ss_within <= 0.0) throw StatError("one_way_anova: total variance is zero");

    AnovaResult r;
    r.df_between = static_cast<double>(groups.size()) - 1.0;
    r.df_within = n_total - static_cast<double>(groups.size());
    if (r.df_within <= 0.0) throw StatError("one_way_anova: no residual degrees of freedom");
    const double ms_between = ss_between / r.df_between;
    const double ms_within = ss_within / r.df_within;
    if (ms_within <= 0.0) {
        // all within-group variation vanished but groups differ
        r.f = std::numeric_limits<double>::infinity();
        r.p = 0.0;
        return r;
    }
    r.f = ms_between / ms_within;
    r.p = ss_between == 0.0 ? 1.0 : f_sf(r.f, r.df_between, r.df_within);
    return r;
}

std::vector<TukeyPair> tukey_posthoc(std::span<const std::vector<double>> groups) {
    if (groups.size() < 2) throw StatError("tukey_posthoc: needs at least 2 groups");
    double n_total = 0.0;
    for (const auto& g : groups) {
        if (g.size() < 2) throw StatError("tukey_posthoc: each group needs at least 2 values");
        n_total += static_cast<double>(g.size());
    }
    const int k = static_cast<int>(groups.size());
    const double df = n_total - k;
    double ss_within = 0.0;
    for (const auto& g : groups) {
        const double m = sample_mean(g);
        for (double x : g) ss_within += (x - m) * (x - m);
    }
    const double ms_within = ss_within / df;

    std::vector<TukeyPair> out;
    for (std::size_t i = 0; i < groups.size(); ++i) {
        for (std::size_t j = i + 1; j < groups.size(); ++j) {
            TukeyPair pair;
            pair.i = i;
            pair.j = j;
            const double ni = static_cast<double>(groups[i].size());
            const double nj = static_cast<double>(groups[j].size());
            const double diff = std::abs(sample_mean(groups[i]) - sample_mean(groups[j]));
            if (ms_within <= 0.0) {
                pair.q = diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
                pair.p_adjusted = diff == 0.0 ? 1.0 : 0.0;
            } else {
                // Tukey-Kramer standard error
                pair.q = diff / std::sqrt(0.5 * ms_within * (1.0 / ni + 1.0 / nj));
                pair.p_adjusted =
                    diff == 0.0 ? 1.0 : 1.0 - studentized_range_cdf(pair.q, k, df);
            }
            out.push_back(pair);
        }
    }
    return out;
}

PearsonResult pearson_correlation(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw StatError("pearson_correlation: length mismatch");
    if (x.size() < 3) throw StatError("pearson_correlation: needs at least 3 pairs");
    const double n = static_cast<double>(x.size());
    const double mx = sample_mean(x), my = sample_mean(y);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx <= 0.0 || syy <= 0.0) throw StatError("pearson_correlation: constant input");

    PearsonResult r;
    r.n = x.size();
    r.rho = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
    const double df = n - 2.0;
    if (std::abs(r.rho) >= 1.0) {
        r.p = 0.0;
    } else {
        const double t = r.rho * std::sqrt(df / (1.0 - r.rho * r.rho));
        r.p = student_t_two_sided_p(t, df);
    }
    return r;
}

}
