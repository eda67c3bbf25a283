#include "speckle/kernels.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "speckle/special_functions.hpp"

namespace speckle::kernels {

namespace {

constexpr std::size_t kBlock = 4096;
constexpr double kInf = std::numeric_limits<double>::infinity();

std::size_t block_count(std::size_t n) {
    return (n + kBlock - 1) / kBlock;
}

}  // namespace

WeightedSamples WeightedSamples::from(std::span<const double> xs) {
    WeightedSamples ws;
    ws.n_raw = xs.size();

    bool eight_bit = !xs.empty();
    for (double x : xs) {
        if (!(x > 0.0) || x > 255.0 || x != std::floor(x)) {
            eight_bit = false;
            break;
        }
    }

    if (eight_bit) {
        std::array<double, 256> counts{};
        for (double x : xs) counts[static_cast<int>(x)] += 1.0;
        for (int v = 1; v <= 255; ++v) {
            if (counts[v] == 0.0) continue;
            ws.values.push_back(static_cast<double>(v));
            ws.log_values.push_back(std::log(static_cast<double>(v)));
            ws.weights.push_back(counts[v]);
            ws.total_weight += counts[v];
        }
        return ws;
    }

    ws.values.assign(xs.begin(), xs.end());
    ws.log_values.resize(xs.size());
    ws.weights.assign(xs.size(), 1.0);
    ws.total_weight = static_cast<double>(xs.size());
    const std::size_t n = xs.size();
#pragma omp parallel for schedule(static)
    for (std::size_t b = 0; b < block_count(n); ++b) {
        const std::size_t end = std::min(n, (b + 1) * kBlock);
        for (std::size_t i = b * kBlock; i < end; ++i) ws.log_values[i] = std::log(ws.values[i]);
    }
    return ws;
}

PreparedLogPdf::PreparedLogPdf(const DistributionParams& params) : family_(family_of(params)) {
    validate_params(params);
    switch (family_) {
        case Family::rayleigh: {
            const auto& v = std::get<RayleighParams>(params);
            c0_ = -std::log(v.sigma * v.sigma);
            c1_ = -0.5 / (v.sigma * v.sigma);
            break;
        }
        case Family::nakagami: {
            const auto& v = std::get<NakagamiParams>(params);
            c0_ = std::log(2.0) + v.m * std::log(v.m) - log_gamma(v.m) - v.m * std::log(v.omega);
            c1_ = 2.0 * v.m - 1.0;
            c2_ = -v.m / v.omega;
            break;
        }
        case Family::gamma_family: {
            const auto& v = std::get<GammaParams>(params);
            c0_ = -log_gamma(v.shape) - v.shape * std::log(v.scale);
            c1_ = v.shape - 1.0;
            c2_ = -1.0 / v.scale;
            break;
        }
        case Family::rician: {
            const auto& v = std::get<RicianParams>(params);
            const double s2 = v.s * v.s;
            c0_ = -std::log(s2) - 0.5 * v.nu * v.nu / s2;
            c1_ = -0.5 / s2;
            c2_ = v.nu / s2;
            break;
        }
        case Family::burr: {
            const auto& v = std::get<BurrParams>(params);
            c0_ = std::log(v.c) + std::log(v.k) - std::log(v.lambda);
            c1_ = v.c - 1.0;
            c2_ = std::log(v.lambda);
            c3_ = v.k + 1.0;  // c stored via c1_ + 1
            break;
        }
        case Family::pareto: {
            const auto& v = std::get<ParetoParams>(params);
            c0_ = std::log(v.a) + v.a * std::log(v.x_min);
            c1_ = -(v.a + 1.0);
            c2_ = v.x_min;
            break;
        }
        case Family::lomax: {
            const auto& v = std::get<LomaxParams>(params);
            c0_ = std::log(v.alpha_l) - std::log(v.lambda_l);
            c1_ = -(v.alpha_l + 1.0);
            c2_ = 1.0 / v.lambda_l;
            break;
        }
    }
}

double PreparedLogPdf::operator()(double x, double log_x) const {
    switch (family_) {
        case Family::rayleigh:
            return log_x + c0_ + c1_ * x * x;
        case Family::nakagami:
            return c0_ + c1_ * log_x + c2_ * x * x;
        case Family::gamma_family:
            return c0_ + c1_ * log_x + c2_ * x;
        case Family::rician:
            return log_x + c0_ + c1_ * x * x + log_bessel_i0(c2_ * x);
        case Family::burr: {
            const double t = (c1_ + 1.0) * (log_x - c2_);
            const double tail = t > 700.0 ? t : std::log1p(std::exp(t));
            return c0_ + c1_ * (log_x - c2_) - c3_ * tail;
        }
        case Family::pareto:
            return x < c2_ ? -kInf : c0_ + c1_ * log_x;
        case Family::lomax:
            return c0_ + c1_ * std::log1p(c2_ * x);
    }
    return -kInf;
}

Moments moments_serial(std::span<const double> xs) {
    Moments m;
    m.n = xs.size();
    if (xs.empty()) return m;
    m.min = kInf;
    m.max = -kInf;
    for (double x : xs) {
        const double x2 = x * x;
        m.sum += x;
        m.sum_sq += x2;
        m.sum_quad += x2 * x2;
        m.sum_log += std::log(x);
        m.min = std::min(m.min, x);
        m.max = std::max(m.max, x);
    }
    return m;
}

Moments moments(std::span<const double> xs) {
    Moments total;
    total.n = xs.size();
    if (xs.empty()) return total;
    const std::size_t nb = block_count(xs.size());
    std::vector<Moments> partial(nb);
#pragma omp parallel for schedule(static)
    for (std::size_t b = 0; b < nb; ++b) {
        const std::size_t end = std::min(xs.size(), (b + 1) * kBlock);
        partial[b] = moments_serial(xs.subspan(b * kBlock, end - b * kBlock));
    }
    total.min = kInf;
    total.max = -kInf;
    for (const Moments& p : partial) {
        total.sum += p.sum;
        total.sum_sq += p.sum_sq;
        total.sum_quad += p.sum_quad;
        total.sum_log += p.sum_log;
        total.min = std::min(total.min, p.min);
        total.max = std::max(total.max, p.max);
    }
    return total;
}

Moments moments(const WeightedSamples& ws) {
    Moments m;
    m.n = static_cast<std::size_t>(ws.total_weight);
    if (ws.values.empty()) return m;
    m.min = kInf;
    m.max = -kInf;
    for (std::size_t i = 0; i < ws.values.size(); ++i) {
        const double x = ws.values[i], w = ws.weights[i];
        const double x2 = x * x;
        m.sum += w * x;
        m.sum_sq += w * x2;
        m.sum_quad += w * x2 * x2;
        m.sum_log += w * ws.log_values[i];
        m.min = std::min(m.min, x);
        m.max = std::max(m.max, x);
    }
    return m;
}

double log_likelihood_serial(const DistributionParams& params, std::span<const double> xs) {
    const PreparedLogPdf lp(params);
    double acc = 0.0;
    for (double x : xs) acc += lp(x, std::log(x));
    return acc;
}

double log_likelihood(const DistributionParams& params, std::span<const double> xs) {
    if (xs.empty()) return 0.0;
    const PreparedLogPdf lp(params);
    const std::size_t nb = block_count(xs.size());
    std::vector<double> partial(nb, 0.0);
#pragma omp parallel for schedule(static)
    for (std::size_t b = 0; b < nb; ++b) {
        const std::size_t end = std::min(xs.size(), (b + 1) * kBlock);
        double acc = 0.0;
        for (std::size_t i = b * kBlock; i < end; ++i) acc += lp(xs[i], std::log(xs[i]));
        partial[b] = acc;
    }
    double total = 0.0;
    for (double p : partial) total += p;
    return total;
}

double log_likelihood(const DistributionParams& params, const WeightedSamples& ws) {
    const PreparedLogPdf lp(params);
    const std::size_t n = ws.values.size();
    const std::size_t nb = block_count(n);
    if (nb <= 1) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += ws.weights[i] * lp(ws.values[i], ws.log_values[i]);
        return acc;
    }
    std::vector<double> partial(nb, 0.0);
#pragma omp parallel for schedule(static)
    for (std::size_t b = 0; b < nb; ++b) {
        const std::size_t end = std::min(n, (b + 1) * kBlock);
        double acc = 0.0;
        for (std::size_t i = b * kBlock; i < end; ++i)
            acc += ws.weights[i] * lp(ws.values[i], ws.log_values[i]);
        partial[b] = acc;
    }
    double total = 0.0;
    for (double p : partial) total += p;
    return total;
}

std::vector<std::size_t> bin_counts_serial(std::span<const double> xs, double first_center,
                                           double width, std::size_t bins) {
    std::vector<std::size_t> counts(bins, 0);
    for (double x : xs) {
        long idx = std::lround((x - first_center) / width);
        idx = std::clamp(idx, 0L, static_cast<long>(bins) - 1);
        ++counts[static_cast<std::size_t>(idx)];
    }
    return counts;
}

std::vector<std::size_t> bin_counts(std::span<const double> xs, double first_center, double width,
                                    std::size_t bins) {
    const std::size_t nb = block_count(xs.size());
    if (nb <= 1) return bin_counts_serial(xs, first_center, width, bins);
    std::vector<std::vector<std::size_t>> partial(nb);
#pragma omp parallel for schedule(static)
    for (std::size_t b = 0; b < nb; ++b) {
        const std::size_t end = std::min(xs.size(), (b + 1) * kBlock);
        partial[b] = bin_counts_serial(xs.subspan(b * kBlock, end - b * kBlock), first_center, width, bins);
    }
    std::vector<std::size_t> counts(bins, 0);
    for (const auto& p : partial)
        for (std::size_t i = 0; i < bins; ++i) counts[i] += p[i];
    return counts;
}

}
