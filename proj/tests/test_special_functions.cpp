#include <doctest.h>

#include <cmath>

#include "speckle/special_functions.hpp"

#include "oracles.hpp"

using namespace speckle;

namespace {

// high-precision reference values (30-digit arithmetic)
struct Ref {
    double x;
    double value;
};

}  // namespace

TEST_CASE("digamma matches high-precision references") {
    const Ref refs[] = {
        {0.001, -1000.575571931810300471},
        {0.5, -1.963510026021423479441},
        {1.0, -0.5772156649015328606065},
        {2.0, 0.4227843350984671393935},
        {10.0, 2.251752589066721107647},
        {1000.0, 6.90725519564881205205},
    };
    for (const auto& r : refs)
        CHECK(digamma(r.x) == doctest::Approx(r.value).epsilon(1e-13));
    CHECK_THROWS_AS(digamma(0.0), std::domain_error);
    CHECK_THROWS_AS(digamma(-1.0), std::domain_error);
}

TEST_CASE("digamma is the log-gamma derivative (finite differences)") {
    for (double x : {0.02, 0.7, 3.3, 41.0, 900.0}) {
        const double h = 1e-6 * std::max(1.0, x);
        const double fd = (log_gamma(x + h) - log_gamma(x - h)) / (2.0 * h);
        CHECK(digamma(x) == doctest::Approx(fd).epsilon(1e-7));
    }
}

TEST_CASE("trigamma matches references and digamma finite differences") {
    const Ref refs[] = {
        {0.5, 4.934802200544679309417},
        {1.0, 1.644934066848226436472},
        {3.7, 0.3100378576700383191039},
        {50.0, 0.02020133322669712580597},
    };
    for (const auto& r : refs)
        CHECK(trigamma(r.x) == doctest::Approx(r.value).epsilon(1e-13));
    for (double x : {0.2, 1.9, 12.0}) {
        const double h = 1e-5 * std::max(1.0, x);
        const double fd = (digamma(x + h) - digamma(x - h)) / (2.0 * h);
        CHECK(trigamma(x) == doctest::Approx(fd).epsilon(1e-8));
    }
}

TEST_CASE("modified Bessel I0/I1 match references across both regimes") {
    const Ref i0_refs[] = {
        {0.001, 1.000000250000015625}, {0.1, 1.0025015629340956014},
        {1.0, 1.266065877752008335598}, {2.0, 2.279585302336067267437},
        {5.0, 27.23987182360444689454},  {20.0, 43558282.55955353327211},
        {100.0, 1.07375170713107382352e+42}, {700.0, 1.529593347671873736316e+302},
    };
    for (const auto& r : i0_refs)
        CHECK(bessel_i0(r.x) == doctest::Approx(r.value).epsilon(1e-13));

    const Ref i1_refs[] = {
        {0.001, 0.0005000000625000026041667}, {0.5, 0.2578943053908963163625},
        {1.0, 0.5651591039924850272077},      {5.0, 24.33564214245052719914},
        {20.0, 42454973.38512777018141},      {100.0, 1.068369390338162481206e+42},
    };
    for (const auto& r : i1_refs)
        CHECK(bessel_i1(r.x) == doctest::Approx(r.value).epsilon(1e-13));

    CHECK(bessel_i1(-5.0) == doctest::Approx(-24.33564214245052719914).epsilon(1e-13));
}

TEST_CASE("bessel I0 agrees with its integral representation") {
    // I0(x) = (1/pi) * integral of exp(x cos t) over [0, pi]
    for (double x : {0.3, 2.5, 11.0, 40.0}) {
        const double quad =
            oracle::integrate([&](double t) { return std::exp(x * std::cos(t)); }, 0.0, M_PI,
                              1e-12 * std::exp(x)) /
            M_PI;
        CHECK(bessel_i0(x) == doctest::Approx(quad).epsilon(1e-11));
    }
}

TEST_CASE("log_bessel_i0 stays finite and consistent") {
    const Ref refs[] = {
        {0.5, 0.06154971918548130394128},
        {5.0, 3.304681775822533433846},
        {50.0, 47.12757550187180458416},
        {500.0, 495.974007668106696461},
    };
    for (const auto& r : refs)
        CHECK(log_bessel_i0(r.x) == doctest::Approx(r.value).epsilon(1e-13));
    CHECK(std::isfinite(log_bessel_i0(5000.0)));
    CHECK(log_bessel_i0(3.0) == doctest::Approx(std::log(bessel_i0(3.0))).epsilon(1e-14));
}

TEST_CASE("regularized incomplete gamma") {
    CHECK(reg_lower_gamma(0.5, 0.5) == doctest::Approx(0.68268949213708589717).epsilon(1e-13));
    CHECK(reg_lower_gamma(1.0, 1.0) == doctest::Approx(0.6321205588285576784).epsilon(1e-13));
    CHECK(reg_lower_gamma(2.5, 3.0) == doctest::Approx(0.69378108158672159912).epsilon(1e-13));
    CHECK(reg_lower_gamma(10.0, 9.5) == doctest::Approx(0.47817397776279258911).epsilon(1e-13));
    CHECK(reg_lower_gamma(100.0, 110.0) == doctest::Approx(0.8417213299399129062).epsilon(1e-13));
    CHECK(reg_lower_gamma(3.0, 0.0) == 0.0);
    CHECK_THROWS_AS(reg_lower_gamma(-1.0, 1.0), std::domain_error);
}

TEST_CASE("regularized incomplete beta") {
    CHECK(reg_inc_beta(0.5, 0.5, 0.3) == doctest::Approx(0.36901011956554537504).epsilon(1e-13));
    CHECK(reg_inc_beta(2.0, 3.0, 0.4) == doctest::Approx(0.5248).epsilon(1e-13));
    CHECK(reg_inc_beta(5.0, 1.5, 0.8) == doctest::Approx(0.50556064881524661244).epsilon(1e-13));
    CHECK(reg_inc_beta(100.0, 200.0, 0.33) == doctest::Approx(0.45661816333399739653).epsilon(1e-12));
    // symmetry I_x(a,b) = 1 - I_{1-x}(b,a)
    for (double x : {0.1, 0.45, 0.9})
        CHECK(reg_inc_beta(2.3, 4.1, x) ==
              doctest::Approx(1.0 - reg_inc_beta(4.1, 2.3, 1.0 - x)).epsilon(1e-13));
    CHECK(reg_inc_beta(1.0, 1.0, 0.25) == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("student t two-sided p against reference and quadrature") {
    CHECK(student_t_two_sided_p(-4.3817804600413289, 6.0) ==
          doctest::Approx(0.0046592149439939344).epsilon(1e-11));
    CHECK(student_t_two_sided_p(0.0, 10.0) == doctest::Approx(1.0));
    // symmetric in t
    CHECK(student_t_two_sided_p(2.2, 7.0) == doctest::Approx(student_t_two_sided_p(-2.2, 7.0)));

    // two-sided p = 2 * upper tail of the t density, by quadrature
    const double df = 5.0;
    const double t = 1.7;
    const double coef = std::exp(log_gamma(0.5 * (df + 1.0)) - log_gamma(0.5 * df)) /
                        std::sqrt(df * M_PI);
    auto density = [&](double u) {
        return coef * std::pow(1.0 + u * u / df, -0.5 * (df + 1.0));
    };
    const double tail = oracle::integrate_to_infinity(density, t, 5.0, 1e-12);
    CHECK(student_t_two_sided_p(t, df) == doctest::Approx(2.0 * tail).epsilon(1e-9));
}

TEST_CASE("F upper tail") {
    CHECK(f_sf(3.0, 2.0, 12.0) == doctest::Approx(0.087791495198902606).epsilon(1e-12));
    CHECK(f_sf(0.0, 3.0, 9.0) == doctest::Approx(1.0));
    // with d1 = 2 the survival function has the closed form (1 + 2f/d2)^(-d2/2)
    CHECK(f_sf(43.0, 2.0, 6.0) == doctest::Approx(std::pow(1.0 + 86.0 / 6.0, -3.0)).epsilon(1e-12));
}

TEST_CASE("studentized range CDF matches quadrature references") {
    CHECK(studentized_range_cdf(3.877, 3, 10.0) == doctest::Approx(0.950012911246746).epsilon(5e-8));
    CHECK(studentized_range_cdf(2.0, 2, 6.0) == doctest::Approx(0.79296875).epsilon(5e-8));
    CHECK(studentized_range_cdf(4.339, 4, 20.0) == doctest::Approx(0.971493590959322).epsilon(5e-8));
    CHECK(studentized_range_cdf(3.0, 3, 60.0) == doctest::Approx(0.9059635984609).epsilon(5e-8));
    CHECK(studentized_range_cdf(5.218, 7, 10.0) == doctest::Approx(0.954722693404194).epsilon(5e-8));
    CHECK(studentized_range_cdf(0.0, 3, 10.0) == 0.0);
    CHECK(studentized_range_cdf(60.0, 3, 10.0) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("studentized range two-group identity q = sqrt(2)|t|") {
    for (double t : {0.5, 1.3, 2.3, 4.0}) {
        for (double df : {4.0, 8.0, 30.0, 200.0}) {
            const double p_range = 1.0 - studentized_range_cdf(std::sqrt(2.0) * t, 2, df);
            const double p_t = student_t_two_sided_p(t, df);
            CHECK(p_range == doctest::Approx(p_t).epsilon(2e-7));
        }
    }
}

TEST_CASE("normal cdf sanity") {
    CHECK(normal_cdf(0.0) == doctest::Approx(0.5));
    CHECK(normal_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-12));
    CHECK(normal_cdf(-8.0) == doctest::Approx(6.22096057427178e-16).epsilon(1e-10));
}
