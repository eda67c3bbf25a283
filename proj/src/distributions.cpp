#include "speckle/distributions.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "speckle/special_functions.hpp"

namespace speckle {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double log_pdf_unchecked(const DistributionParams& p, double x);

double pdf_at_zero(const DistributionParams& p) {
    return std::visit(
        [](const auto& v) -> double {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, NakagamiParams>) {
                // x^(2m-1) tends to 1 exactly at the domain edge m = 1/2.
                return v.m == 0.5 ? std::sqrt(2.0 / (M_PI * v.omega)) : 0.0;
            } else if constexpr (std::is_same_v<T, GammaParams>) {
                if (v.shape < 1.0) return kInf;
                return v.shape == 1.0 ? 1.0 / v.scale : 0.0;
            } else if constexpr (std::is_same_v<T, BurrParams>) {
                if (v.c < 1.0) return kInf;
                return v.c == 1.0 ? v.k / v.lambda : 0.0;
            } else if constexpr (std::is_same_v<T, LomaxParams>) {
                return v.alpha_l / v.lambda_l;
            } else {
                return 0.0;
            }
        },
        p);
}

double log_pdf_unchecked(const DistributionParams& p, double x) {
    return std::visit(
        [x](const auto& v) -> double {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, RayleighParams>) {
                const double s2 = v.sigma * v.sigma;
                return std::log(x) - std::log(s2) - 0.5 * x * x / s2;
            } else if constexpr (std::is_same_v<T, NakagamiParams>) {
                return std::log(2.0) + v.m * std::log(v.m) - log_gamma(v.m) - v.m * std::log(v.omega) +
                       (2.0 * v.m - 1.0) * std::log(x) - v.m * x * x / v.omega;
            } else if constexpr (std::is_same_v<T, GammaParams>) {
                return (v.shape - 1.0) * std::log(x) - x / v.scale - log_gamma(v.shape) -
                       v.shape * std::log(v.scale);
            } else if constexpr (std::is_same_v<T, RicianParams>) {
                const double s2 = v.s * v.s;
                return std::log(x) - std::log(s2) - 0.5 * (x * x + v.nu * v.nu) / s2 +
                       log_bessel_i0(x * v.nu / s2);
            } else if constexpr (std::is_same_v<T, BurrParams>) {
                const double t = v.c * (std::log(x) - std::log(v.lambda));
                const double log1p_term = t > 700.0 ? t : std::log1p(std::exp(t));
                return std::log(v.c) + std::log(v.k) - std::log(v.lambda) +
                       (v.c - 1.0) * (std::log(x) - std::log(v.lambda)) - (v.k + 1.0) * log1p_term;
            } else if constexpr (std::is_same_v<T, ParetoParams>) {
                if (x < v.x_min) return -kInf;
                return std::log(v.a) + v.a * std::log(v.x_min) - (v.a + 1.0) * std::log(x);
            } else {
                return std::log(v.alpha_l) - std::log(v.lambda_l) -
                       (v.alpha_l + 1.0) * std::log1p(x / v.lambda_l);
            }
        },
        p);
}

}  // namespace

double pdf(const DistributionParams& p, double x) {
    validate_params(p);
    if (!(x >= 0.0)) throw std::domain_error("pdf: x must be >= 0");
    if (x == 0.0) return pdf_at_zero(p);
    const double lp = log_pdf_unchecked(p, x);
    return lp == -kInf ? 0.0 : std::exp(lp);
}

double log_pdf(const DistributionParams& p, double x) {
    validate_params(p);
    if (!(x > 0.0)) {
        if (x == 0.0) {
            const double f0 = pdf_at_zero(p);
            if (std::isfinite(f0) && f0 > 0.0) return std::log(f0);
        }
        throw std::domain_error("log_pdf: density vanishes or is undefined at x <= 0");
    }
    return log_pdf_unchecked(p, x);
}

double cdf(const DistributionParams& p, double x) {
    validate_params(p);
    if (x <= 0.0) return 0.0;
    return std::visit(
        [x](const auto& v) -> double {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, RayleighParams>) {
                return -std::expm1(-0.5 * x * x / (v.sigma * v.sigma));
            } else if constexpr (std::is_same_v<T, NakagamiParams>) {
                return reg_lower_gamma(v.m, v.m * x * x / v.omega);
            } else if constexpr (std::is_same_v<T, GammaParams>) {
                return reg_lower_gamma(v.shape, x / v.scale);
            } else if constexpr (std::is_same_v<T, RicianParams>) {
                if (v.nu == 0.0) return -std::expm1(-0.5 * x * x / (v.s * v.s));
                // 1 - MarcumQ1(nu/s, x/s), as a Poisson mixture of gamma CDFs.
                const double a2 = 0.5 * v.nu * v.nu / (v.s * v.s);
                const double b2 = 0.5 * x * x / (v.s * v.s);
                double w = std::exp(-a2);          // Poisson(a2) weight at k = 0
                double g = -std::expm1(-b2);       // P(1, b2)
                double d = std::exp(-b2);          // b2^k e^-b2 / k! at k = 0
                double acc = w * g;
                double wsum = w;
                for (int k = 1; k < 4000; ++k) {
                    w *= a2 / k;
                    d *= b2 / k;
                    g -= d;                        // P(k+1, b2) from P(k, b2)
                    if (g < 0.0) g = 0.0;
                    acc += w * g;
                    wsum += w;
                    if (1.0 - wsum < 1e-16 && k > a2) break;
                }
                return std::min(1.0, acc);
            } else if constexpr (std::is_same_v<T, BurrParams>) {
                const double t = v.c * (std::log(x) - std::log(v.lambda));
                const double log1p_term = t > 700.0 ? t : std::log1p(std::exp(t));
                return -std::expm1(-v.k * log1p_term);
            } else if constexpr (std::is_same_v<T, ParetoParams>) {
                if (x <= v.x_min) return 0.0;
                return -std::expm1(v.a * std::log(v.x_min / x));
            } else {
                return -std::expm1(-v.alpha_l * std::log1p(x / v.lambda_l));
            }
        },
        p);
}

double tail_mass_above(const DistributionParams& p, double x) {
    return 1.0 - cdf(p, x);
}

double sample_one(const DistributionParams& p, Rng& rng) {
    return std::visit(
        [&rng](const auto& v) -> double {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, RayleighParams>) {
                return v.sigma * std::sqrt(-2.0 * std::log(rng.uniform01()));
            } else if constexpr (std::is_same_v<T, NakagamiParams>) {
                return std::sqrt(rng.gamma(v.m, v.omega / v.m));
            } else if constexpr (std::is_same_v<T, GammaParams>) {
                return rng.gamma(v.shape, v.scale);
            } else if constexpr (std::is_same_v<T, RicianParams>) {
                const double a = v.nu + v.s * rng.normal();
                const double b = v.s * rng.normal();
                return std::sqrt(a * a + b * b);
            } else if constexpr (std::is_same_v<T, BurrParams>) {
                const double u = rng.uniform01();
                return v.lambda * std::pow(std::pow(u, -1.0 / v.k) - 1.0, 1.0 / v.c);
            } else if constexpr (std::is_same_v<T, ParetoParams>) {
                return v.x_min * std::pow(rng.uniform01(), -1.0 / v.a);
            } else {
                return v.lambda_l * (std::pow(rng.uniform01(), -1.0 / v.alpha_l) - 1.0);
            }
        },
        p);
}

std::vector<double> sample(const DistributionParams& p, std::size_t n, std::uint64_t seed) {
    validate_params(p);
    if (n < 1) throw std::invalid_argument("sample: n must be >= 1");
    Rng rng(seed);
    std::vector<double> xs(n);
    for (auto& x : xs) x = sample_one(p, rng);
    return xs;
}

GammaParams nakagami_to_gamma(const NakagamiParams& p) {
    validate_params(DistributionParams{p});
    return GammaParams{p.m, p.omega / p.m};
}

NakagamiParams rayleigh_as_nakagami(double sigma) {
    validate_params(DistributionParams{RayleighParams{sigma}});
    return NakagamiParams{1.0, 2.0 * sigma * sigma};
}

}
