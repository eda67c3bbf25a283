#include "speckle/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "speckle/optim.hpp"
#include "speckle/special_functions.hpp"

namespace speckle {

namespace {

using kernels::Moments;
using kernels::WeightedSamples;

struct Cleaned {
    WeightedSamples ws;
    Moments mom;
};

Cleaned clean_samples(std::span<const double> samples) {
    std::vector<double> kept;
    kept.reserve(samples.size());
    for (double x : samples)
        if (std::isfinite(x) && x > 0.0) kept.push_back(x);
    Cleaned c;
    c.ws = WeightedSamples::from(kept);
    c.mom = kernels::moments(c.ws);
    return c;
}

void require_n(const Cleaned& c, std::size_t min_n, const char* who) {
    if (c.mom.n < min_n)
        throw FitError(FitErrorCode::insufficient_data,
                       std::string(who) + ": needs at least " + std::to_string(min_n) +
                           " positive samples, got " + std::to_string(c.mom.n));
}

double weighted_quantile(const WeightedSamples& ws, double q) {
    // values are already sorted in the 8-bit path; sort indices otherwise
    std::vector<std::size_t> idx(ws.values.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return ws.values[a] < ws.values[b]; });
    const double target = q * ws.total_weight;
    double cum = 0.0;
    for (std::size_t i : idx) {
        cum += ws.weights[i];
        if (cum >= target) return ws.values[i];
    }
    return ws.values[idx.back()];
}

double neg_mean_loglik(const DistributionParams& p, const WeightedSamples& ws) {
    const double ll = kernels::log_likelihood(p, ws);
    if (!std::isfinite(ll)) return std::numeric_limits<double>::max();
    return -ll / ws.total_weight;
}

struct MultiStartOutcome {
    std::vector<double> x;
    double value = std::numeric_limits<double>::max();
    int iterations = 0;
    bool converged = false;
};

MultiStartOutcome multi_start_nm(const std::function<double(const std::vector<double>&)>& f,
                                 const std::vector<std::vector<double>>& starts, double step,
                                 double tol, int max_iter) {
    MultiStartOutcome out;
    for (const auto& s : starts) {
        SimplexResult r = nelder_mead(f, s, step, tol, max_iter);
        out.iterations += r.iterations;
        out.converged = out.converged || r.converged;
        if (r.value < out.value) {
            out.value = r.value;
            out.x = r.x;
        }
    }
    return out;
}

}  // namespace

const char* fit_method_name(FitMethod m) {
    switch (m) {
        case FitMethod::closed_form: return "closed_form";
        case FitMethod::moments: return "moments";
        case FitMethod::newton_mle: return "newton_mle";
        case FitMethod::nelder_mead_mle: return "nelder_mead_mle";
    }
    return "unknown";
}

const char* fit_error_name(FitErrorCode c) {
    switch (c) {
        case FitErrorCode::insufficient_data: return "insufficient_data";
        case FitErrorCode::degenerate_sample: return "degenerate_sample";
    }
    return "unknown";
}

NakagamiMomentEstimate nakagami_inv_estimate(double mean_sq, double mean_quad) {
    const double var_sq = mean_quad - mean_sq * mean_sq;
    return NakagamiMomentEstimate{mean_sq * mean_sq / var_sq, mean_sq};
}

FitResult fit_rayleigh(std::span<const double> samples) {
    const Cleaned c = clean_samples(samples);
    require_n(c, 2, "fit_rayleigh");
    const double sigma = std::sqrt(c.mom.sum_sq / (2.0 * static_cast<double>(c.mom.n)));
    FitResult r;
    r.params = RayleighParams{sigma};
    r.log_likelihood = kernels::log_likelihood(r.params, c.ws);
    r.n_used = c.mom.n;
    r.converged = true;
    r.method = FitMethod::closed_form;
    return r;
}

FitResult fit_nakagami_inv(std::span<const double> samples) {
    const Cleaned c = clean_samples(samples);
    require_n(c, 3, "fit_nakagami_inv");
    const double mean_sq = c.mom.mean_sq();
    const double mean_quad = c.mom.mean_quad();
    const double var_sq = mean_quad - mean_sq * mean_sq;
    if (!(var_sq > 1e-12 * mean_quad))
        throw FitError(FitErrorCode::degenerate_sample, "fit_nakagami_inv: variance of x^2 is zero");
    const NakagamiMomentEstimate est = nakagami_inv_estimate(mean_sq, mean_quad);
    FitResult r;
    r.clamped = est.m < 0.5;
    r.params = NakagamiParams{std::max(est.m, 0.5), est.omega};
    r.log_likelihood = kernels::log_likelihood(r.params, c.ws);
    r.n_used = c.mom.n;
    r.converged = true;
    r.method = FitMethod::moments;
    return r;
}

FitResult fit_gamma_mle(std::span<const double> samples) {
    const Cleaned c = clean_samples(samples);
    require_n(c, 3, "fit_gamma_mle");
    const double mean = c.mom.mean();
    const double s = std::log(mean) - c.mom.mean_log();
    if (!(s > 1e-14))
        throw FitError(FitErrorCode::degenerate_sample, "fit_gamma_mle: samples are constant");

    // moment-flavoured starting point, then Newton on ln k - psi(k) = s
    double k = (3.0 - s + std::sqrt((s - 3.0) * (s - 3.0) + 24.0 * s)) / (12.0 * s);
    bool converged = false;
    int iter = 0;
    for (; iter < 100; ++iter) {
        const double g = std::log(k) - digamma(k) - s;
        const double dg = 1.0 / k - trigamma(k);
        double step = g / dg;
        while (k - step <= 0.0) step *= 0.5;
        k -= step;
        if (std::abs(step) < 1e-10) {
            converged = true;
            ++iter;
            break;
        }
    }
    FitResult r;
    r.params = GammaParams{k, mean / k};
    r.log_likelihood = kernels::log_likelihood(r.params, c.ws);
    r.n_used = c.mom.n;
    r.converged = converged;
    r.iterations = iter;
    r.method = FitMethod::newton_mle;
    return r;
}

FitResult fit_rician(std::span<const double> samples) {
    const Cleaned c = clean_samples(samples);
    require_n(c, 3, "fit_rician");
    const double mean = c.mom.mean();
    const double mu2 = c.mom.mean_sq();
    const double mu4 = c.mom.mean_quad();
    if (!(mu2 - mean * mean > 1e-12 * mu2))
        throw FitError(FitErrorCode::degenerate_sample, "fit_rician: samples are constant");

    // E[X^2] = nu^2 + 2 s^2 and E[X^4] = nu^4 + 8 nu^2 s^2 + 8 s^4
    // invert to nu^4 = 2 E[X^2]^2 - E[X^4].
    const double nu4 = 2.0 * mu2 * mu2 - mu4;
    const bool floored_init = !(nu4 > 0.0);
    const double nu0 = floored_init ? 0.0 : std::pow(nu4, 0.25);
    double s20 = 0.5 * (mu2 - nu0 * nu0);
    if (!(s20 > 0.0)) s20 = 0.25 * mu2;
    const double s0 = std::sqrt(s20);

    auto objective = [&](const std::vector<double>& t) {
        const double nu = std::abs(t[0]) * s0;
        const double s = s0 * std::exp(t[1]);
        if (!std::isfinite(nu) || !std::isfinite(s) || s <= 0.0)
            return std::numeric_limits<double>::max();
        return neg_mean_loglik(RicianParams{nu, s}, c.ws);
    };
    SimplexResult nm = nelder_mead(objective, {nu0 / s0, 0.0}, 0.2, 1e-7, 600);

    double nu_hat = std::abs(nm.x[0]) * s0;
    double s_hat = s0 * std::exp(nm.x[1]);
    double loglik = kernels::log_likelihood(RicianParams{nu_hat, s_hat}, c.ws);

    // The nu direction is statistically flat near the Rayleigh limit: collapse
    // onto the nested nu = 0 model unless the likelihood-ratio gain clears the
    // chi-square(1) 99% point.
    const double sigma_limit = std::sqrt(0.5 * mu2);
    const double loglik_limit =
        kernels::log_likelihood(RicianParams{0.0, sigma_limit}, c.ws);
    bool floored = floored_init;
    if (2.0 * (loglik - loglik_limit) < 6.635) {
        nu_hat = 0.0;
        s_hat = sigma_limit;
        loglik = loglik_limit;
        floored = true;
    }

    FitResult r;
    r.clamped = floored || nu_hat < 1e-6 * s_hat;
    r.params = RicianParams{nu_hat, s_hat};
    r.log_likelihood = loglik;
    r.n_used = c.mom.n;
    r.converged = nm.converged;
    r.iterations = nm.iterations;
    r.method = FitMethod::nelder_mead_mle;
    return r;
}

FitResult fit_heavy_tail_mle(Family family, std::span<const double> samples) {
    const Cleaned c = clean_samples(samples);
    require_n(c, 10, "fit_heavy_tail_mle");
    FitResult r;
    r.n_used = c.mom.n;

    if (family == Family::pareto) {
        const double x_min = c.mom.min;
        const double tail_sum = c.mom.sum_log - static_cast<double>(c.mom.n) * std::log(x_min);
        if (!(tail_sum > 0.0))
            throw FitError(FitErrorCode::degenerate_sample, "fit_heavy_tail_mle: samples are constant");
        r.params = ParetoParams{static_cast<double>(c.mom.n) / tail_sum, x_min};
        r.log_likelihood = kernels::log_likelihood(r.params, c.ws);
        r.converged = true;
        r.method = FitMethod::closed_form;
        return r;
    }

    const double var = c.mom.mean_sq() - c.mom.mean() * c.mom.mean();
    if (!(var > 1e-12 * c.mom.mean_sq()))
        throw FitError(FitErrorCode::degenerate_sample, "fit_heavy_tail_mle: samples are constant");

    if (family == Family::lomax) {
        const double mean = c.mom.mean();
        const double ratio = c.mom.mean_sq() / (mean * mean);
        double alpha0 = ratio > 2.1 ? (2.0 * ratio - 2.0) / (ratio - 2.0) : 12.0;
        alpha0 = std::clamp(alpha0, 1.2, 30.0);
        const double lambda0 = mean * (alpha0 - 1.0);

        auto objective = [&](const std::vector<double>& t) {
            // box the log-parameters: light-tailed data drives the Lomax
            // toward its exponential limit (alpha -> inf) along a flat ridge
            if (std::abs(t[0]) > 30.0 || std::abs(t[1]) > 30.0)
                return std::numeric_limits<double>::max();
            return neg_mean_loglik(LomaxParams{std::exp(t[0]), std::exp(t[1])}, c.ws);
        };
        const std::vector<double> base = {std::log(alpha0), std::log(lambda0)};
        const MultiStartOutcome nm = multi_start_nm(
            objective,
            {base, {base[0] + 0.7, base[1] - 0.7}, {base[0] - 0.7, base[1] + 0.7}}, 0.5, 1e-8, 500);
        r.params = LomaxParams{std::exp(nm.x[0]), std::exp(nm.x[1])};
        r.log_likelihood = kernels::log_likelihood(r.params, c.ws);
        r.converged = nm.converged;
        r.iterations = nm.iterations;
        r.method = FitMethod::nelder_mead_mle;
        return r;
    }

    if (family != Family::burr) throw std::invalid_argument("fit_heavy_tail_mle: family must be heavy-tailed");

    const double median = weighted_quantile(c.ws, 0.5);
    const double q75 = weighted_quantile(c.ws, 0.75);
    double c0 = 2.0;
    if (q75 > median) c0 = std::clamp(std::log(3.0) / std::log(q75 / median), 0.3, 20.0);

    auto objective = [&](const std::vector<double>& t) {
        // boxed like the Lomax: k -> inf is the Burr's Weibull limit
        if (std::abs(t[0]) > 30.0 || std::abs(t[1]) > 30.0 || std::abs(t[2]) > 30.0)
            return std::numeric_limits<double>::max();
        return neg_mean_loglik(BurrParams{std::exp(t[0]), std::exp(t[1]), std::exp(t[2])}, c.ws);
    };
    const std::vector<double> base = {std::log(c0), 0.0, std::log(median)};
    const MultiStartOutcome nm = multi_start_nm(
        objective,
        {base,
         {base[0] + 0.5, base[1] + 0.7, base[2] - 0.5},
         {base[0] - 0.5, base[1] - 0.7, base[2] + 0.5}},
        0.5, 1e-8, 700);
    r.params = BurrParams{std::exp(nm.x[0]), std::exp(nm.x[1]), std::exp(nm.x[2])};
    r.log_likelihood = kernels::log_likelihood(r.params, c.ws);
    r.converged = nm.converged;
    r.iterations = nm.iterations;
    r.method = FitMethod::nelder_mead_mle;
    return r;
}

FitResult fit_family(Family family, std::span<const double> samples) {
    switch (family) {
        case Family::rayleigh: return fit_rayleigh(samples);
        case Family::nakagami: return fit_nakagami_inv(samples);
        case Family::gamma_family: return fit_gamma_mle(samples);
        case Family::rician: return fit_rician(samples);
        default: return fit_heavy_tail_mle(family, samples);
    }
}

std::vector<FamilyFit> fit_all(std::span<const double> samples) {
    return fit_all(samples, kAllFamilies);
}

std::vector<FamilyFit> fit_all(std::span<const double> samples, std::span<const Family> families) {
    std::vector<FamilyFit> out;
    out.reserve(families.size());
    for (Family f : families) {
        FamilyFit entry;
        entry.family = f;
        try {
            entry.fit = fit_family(f, samples);
        } catch (const FitError& e) {
            entry.error = e.code();
        }
        out.push_back(std::move(entry));
    }
    return out;
}

nlohmann::ordered_json fit_result_to_json(const FitResult& r) {
    nlohmann::ordered_json j = params_to_json(r.params);
    j["log_likelihood"] = r.log_likelihood;
    j["n_used"] = r.n_used;
    j["converged"] = r.converged;
    j["iterations"] = r.iterations;
    j["method"] = fit_method_name(r.method);
    j["clamped"] = r.clamped;
    return j;
}

}
