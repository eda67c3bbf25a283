// Test-side oracles, kept independent of the library's evaluation paths:
// adaptive quadrature over the raw pdf, direct-summation divergence and SSE,
// and the Kolmogorov-Smirnov statistic.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

namespace oracle {

namespace detail {

inline double simpson_rec(const std::function<double(double)>& f, double a, double b, double fa,
                          double fm, double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) < 15.0 * tol) return left + right + delta / 15.0;
    return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-10, int depth = 30) {
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return detail::simpson_rec(f, a, b, fa, fm, fb, whole, tol, depth);
}

/// Integral of f over [lo, infinity) through x = shift + scale * t / (1 - t).
/// Suits heavy-tailed densities whose direct upper limit is impractical.
inline double integrate_to_infinity(const std::function<double(double)>& f, double lo,
                                    double scale, double tol = 1e-10) {
    auto g = [&](double t) {
        if (t >= 1.0 - 1e-12) return 0.0;
        const double x = lo + scale * t / (1.0 - t);
        const double jac = scale / ((1.0 - t) * (1.0 - t));
        const double v = f(x) * jac;
        return std::isfinite(v) ? v : 0.0;
    };
    return integrate(g, 0.0, 1.0 - 1e-12, tol);
}

/// Kolmogorov-Smirnov statistic of samples against a model CDF.
inline double ks_statistic(std::span<const double> samples,
                           const std::function<double(double)>& cdf) {
    std::vector<double> xs(samples.begin(), samples.end());
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double F = cdf(xs[i]);
        d = std::max(d, std::abs((static_cast<double>(i) + 1.0) / n - F));
        d = std::max(d, std::abs(static_cast<double>(i) / n - F));
    }
    return d;
}

/// Direct-summation discrete KL with the same 1e-12 floor the contract states.
inline double kl_direct(std::span<const double> p, std::span<const double> q) {
    double kl = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] <= 0.0) continue;
        kl += p[i] * std::log(std::max(p[i], 1e-12) / std::max(q[i], 1e-12));
    }
    return kl;
}

inline double sse_direct(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return s;
}

inline double total_variation(std::span<const double> a, std::span<const double> b) {
    double tv = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) tv += std::abs(a[i] - b[i]);
    return 0.5 * tv;
}

}  // namespace oracle
