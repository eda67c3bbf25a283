#include <doctest.h>

#include <cmath>
#include <limits>

#include "speckle/distributions.hpp"
#include "speckle/estimators.hpp"
#include "speckle/special_functions.hpp"

using namespace speckle;

namespace {

double rel_err(double got, double want) {
    return std::abs(got - want) / std::abs(want);
}

}  // namespace

TEST_CASE("fit_rayleigh closed form") {
    const std::vector<double> ones = {1.0, 1.0, 1.0, 1.0};
    const FitResult r = fit_rayleigh(ones);
    CHECK(std::get<RayleighParams>(r.params).sigma == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
    CHECK(r.converged);
    CHECK(r.method == FitMethod::closed_form);
    CHECK(r.n_used == 4);

    CHECK_THROWS_AS(fit_rayleigh(std::vector<double>{2.0}), FitError);
    CHECK_THROWS_AS(fit_rayleigh(std::vector<double>{}), FitError);
    CHECK_THROWS_AS(fit_rayleigh(std::vector<double>{0.0, 0.0, 0.0}), FitError);

    const auto xs = sample(RayleighParams{2.0}, 100000, 7);
    const FitResult big = fit_rayleigh(xs);
    CHECK(std::get<RayleighParams>(big.params).sigma == doctest::Approx(2.0).epsilon(0.005));
}

TEST_CASE("nakagami inverse normalized variance arithmetic") {
    // moment arithmetic on {1,2}: E[x^2] = 2.5, E[x^4] = 8.5
    const NakagamiMomentEstimate est = nakagami_inv_estimate(2.5, 8.5);
    CHECK(est.omega == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(est.m == doctest::Approx(6.25 / 2.25).epsilon(1e-12));
}

TEST_CASE("fit_nakagami_inv") {
    CHECK_THROWS_AS(fit_nakagami_inv(std::vector<double>{3.0, 3.0, 3.0}), FitError);
    try {
        fit_nakagami_inv(std::vector<double>{3.0, 3.0, 3.0});
    } catch (const FitError& e) {
        CHECK(e.code() == FitErrorCode::degenerate_sample);
    }
    CHECK_THROWS_AS(fit_nakagami_inv(std::vector<double>{1.0, 2.0}), FitError);

    const auto xs = sample(NakagamiParams{1.5, 2.0}, 100000, 11);
    const FitResult r = fit_nakagami_inv(xs);
    const auto& p = std::get<NakagamiParams>(r.params);
    CHECK(p.m == doctest::Approx(1.5).epsilon(0.02));        // +-0.03
    CHECK(p.omega == doctest::Approx(2.0).epsilon(0.01));    // +-0.02
    CHECK(r.method == FitMethod::moments);
    CHECK_FALSE(r.clamped);
}

TEST_CASE("nakagami m below the domain edge is clamped with a flag") {
    // heavy-tailed data pushes the moment estimate of m below 1/2
    const auto xs = sample(LomaxParams{1.6, 20.0}, 20000, 3);
    const FitResult r = fit_nakagami_inv(xs);
    CHECK(std::get<NakagamiParams>(r.params).m == 0.5);
    CHECK(r.clamped);
}

TEST_CASE("fit_gamma_mle recovers parameters and honours preconditions") {
    CHECK_THROWS_AS(fit_gamma_mle(std::vector<double>{1.0, 1.0, 1.0}), FitError);

    const auto xs = sample(GammaParams{2.0, 3.0}, 100000, 5);
    const FitResult r = fit_gamma_mle(xs);
    const auto& p = std::get<GammaParams>(r.params);
    CHECK(p.shape == doctest::Approx(2.0).epsilon(0.02));   // +-0.04
    CHECK(p.scale == doctest::Approx(3.0).epsilon(0.02));   // +-0.06
    CHECK(r.converged);
    CHECK(r.method == FitMethod::newton_mle);
    CHECK(r.iterations <= 100);

    // MLE ascent: the fitted point beats the moment-matching start
    const double mean = 6.0, s = std::log(mean) - kernels::moments(std::span<const double>(xs)).mean_log();
    const double k0 = (3.0 - s + std::sqrt((s - 3.0) * (s - 3.0) + 24.0 * s)) / (12.0 * s);
    const double ll0 = kernels::log_likelihood(GammaParams{k0, mean / k0}, xs);
    CHECK(r.log_likelihood >= ll0 - 1e-9 * std::abs(ll0));
}

TEST_CASE("fit_rician at the Rayleigh limit and at high SNR") {
    const auto rayleigh_like = sample(RicianParams{0.0, 1.0}, 100000, 19);
    const FitResult r0 = fit_rician(rayleigh_like);
    const auto& p0 = std::get<RicianParams>(r0.params);
    CHECK(p0.nu <= 0.05);
    CHECK(p0.s == doctest::Approx(1.0).epsilon(0.01));

    const auto xs = sample(RicianParams{3.0, 1.0}, 100000, 13);
    const FitResult r = fit_rician(xs);
    const auto& p = std::get<RicianParams>(r.params);
    CHECK(std::abs(p.nu - 3.0) < 0.03);
    CHECK(std::abs(p.s - 1.0) < 0.02);
    CHECK(r.method == FitMethod::nelder_mead_mle);

    CHECK_THROWS_AS(fit_rician(std::vector<double>{4.0, 4.0, 4.0}), FitError);
}

TEST_CASE("pareto closed-form MLE") {
    const auto xs = sample(ParetoParams{2.0, 1.0}, 100000, 23);
    const FitResult r = fit_heavy_tail_mle(Family::pareto, xs);
    const auto& p = std::get<ParetoParams>(r.params);
    CHECK(std::abs(p.a - 2.0) < 0.02);
    CHECK(p.x_min >= 1.0);
    CHECK(p.x_min < 1.0001);
    CHECK(r.method == FitMethod::closed_form);

    CHECK_THROWS_AS(fit_heavy_tail_mle(Family::pareto, std::vector<double>(20, 2.0)), FitError);
    CHECK_THROWS_AS(fit_heavy_tail_mle(Family::pareto, std::vector<double>{1, 2, 3}), FitError);
}

TEST_CASE("lomax simplex MLE") {
    const auto xs = sample(LomaxParams{2.5, 10.0}, 100000, 3);
    const FitResult r = fit_heavy_tail_mle(Family::lomax, xs);
    const auto& p = std::get<LomaxParams>(r.params);
    CHECK(rel_err(p.alpha_l, 2.5) < 0.05);
    CHECK(rel_err(p.lambda_l, 10.0) < 0.05);
    CHECK(r.converged);

    // the optimum cannot be worse than the generator parameters
    const double ll_truth = kernels::log_likelihood(LomaxParams{2.5, 10.0}, xs);
    CHECK(r.log_likelihood >= ll_truth - 1e-6 * std::abs(ll_truth));
}

TEST_CASE("burr simplex MLE") {
    const auto xs = sample(BurrParams{2.0, 1.5, 50.0}, 100000, 9);
    const FitResult r = fit_heavy_tail_mle(Family::burr, xs);
    const auto& p = std::get<BurrParams>(r.params);
    CHECK(rel_err(p.c, 2.0) < 0.10);
    CHECK(rel_err(p.k, 1.5) < 0.10);
    CHECK(rel_err(p.lambda, 50.0) < 0.10);
    CHECK(r.converged);

    const double ll_truth = kernels::log_likelihood(BurrParams{2.0, 1.5, 50.0}, xs);
    CHECK(r.log_likelihood >= ll_truth - 1e-6 * std::abs(ll_truth));
}

TEST_CASE("scale equivariance of the closed-form estimators") {
    const auto xs = sample(NakagamiParams{1.3, 2.5}, 5000, 77);
    std::vector<double> scaled(xs.size());
    const double lambda = 37.5;
    for (std::size_t i = 0; i < xs.size(); ++i) scaled[i] = lambda * xs[i];

    const auto ray1 = std::get<RayleighParams>(fit_rayleigh(xs).params);
    const auto ray2 = std::get<RayleighParams>(fit_rayleigh(scaled).params);
    CHECK(ray2.sigma == doctest::Approx(lambda * ray1.sigma).epsilon(1e-9));

    const auto nak1 = std::get<NakagamiParams>(fit_nakagami_inv(xs).params);
    const auto nak2 = std::get<NakagamiParams>(fit_nakagami_inv(scaled).params);
    CHECK(nak2.m == doctest::Approx(nak1.m).epsilon(1e-9));
    CHECK(nak2.omega == doctest::Approx(lambda * lambda * nak1.omega).epsilon(1e-9));
}

TEST_CASE("fit_all yields one entry per family in canonical order") {
    const auto xs = sample(NakagamiParams{1.0, 2.0}, 10000, 41);
    const auto fits = fit_all(xs);
    REQUIRE(fits.size() == 7);
    for (std::size_t i = 0; i < 7; ++i) CHECK(fits[i].family == kAllFamilies[i]);
    for (const auto& ff : fits) {
        INFO(family_name(ff.family));
        CHECK(ff.fit.has_value());
    }

    // the true model (Rayleigh == Nakagami at m = 1) outranks the wrong
    // families; the Rician contains the Rayleigh exactly at nu = 0, so it is
    // allowed to tie within optimizer noise
    auto loglik = [&](Family f) { return fits[static_cast<std::size_t>(f)].fit->log_likelihood; };
    const double top = std::max(loglik(Family::rayleigh), loglik(Family::nakagami));
    const double tie_slack = 1e-4 * std::abs(top);
    CHECK(loglik(Family::rayleigh) >= loglik(Family::gamma_family) - tie_slack);
    CHECK(loglik(Family::nakagami) >= loglik(Family::gamma_family) - tie_slack);
    CHECK(loglik(Family::rayleigh) > loglik(Family::pareto));
    CHECK(loglik(Family::rayleigh) > loglik(Family::lomax));
    CHECK(loglik(Family::rician) <= top + tie_slack);
}

TEST_CASE("fit_all structured failures") {
    const auto empty = fit_all(std::vector<double>{});
    REQUIRE(empty.size() == 7);
    for (const auto& ff : empty) {
        CHECK_FALSE(ff.fit.has_value());
        CHECK(ff.error == FitErrorCode::insufficient_data);
    }

    const std::vector<double> constant(20, 5.0);
    const auto fits = fit_all(constant);
    CHECK(fits[static_cast<std::size_t>(Family::rayleigh)].fit.has_value());
    CHECK(fits[static_cast<std::size_t>(Family::nakagami)].error == FitErrorCode::degenerate_sample);
    CHECK(fits[static_cast<std::size_t>(Family::gamma_family)].error ==
          FitErrorCode::degenerate_sample);
    CHECK(fits[static_cast<std::size_t>(Family::pareto)].error == FitErrorCode::degenerate_sample);
}

TEST_CASE("fit_all never aborts on dirty input") {
    std::vector<double> dirty = {0.0, 12.0, 55.0, 0.0, 200.0, 13.0, 99.0, 150.0, 22.0, 18.0,
                                 44.0, 91.0, 7.0,  63.0, 28.0, 77.0, 120.0, 36.0, 54.0, 81.0};
    dirty.push_back(std::numeric_limits<double>::quiet_NaN());
    const auto fits = fit_all(dirty);
    REQUIRE(fits.size() == 7);
    const auto& ray = fits[static_cast<std::size_t>(Family::rayleigh)];
    REQUIRE(ray.fit.has_value());
    CHECK(ray.fit->n_used == 18);  // zeros and the NaN dropped
}

TEST_CASE("fit result serialization carries the failure reason") {
    const auto xs = sample(RayleighParams{40.0}, 500, 4);
    const auto j = fit_result_to_json(fit_rayleigh(xs));
    CHECK(j["family"] == "rayleigh");
    CHECK(j["converged"] == true);
    CHECK(j["method"] == "closed_form");
    CHECK(j.contains("log_likelihood"));
    CHECK(std::string(fit_error_name(FitErrorCode::degenerate_sample)) == "degenerate_sample");
}
