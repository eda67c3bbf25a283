#pragma once

namespace speckle {

// Log-gamma, digamma and trigamma on (0, inf).
double log_gamma(double x);
double digamma(double x);
double trigamma(double x);

// Modified Bessel functions of the first kind, order 0 and 1.
// log_bessel_i0 stays finite where bessel_i0 itself would overflow.
double bessel_i0(double x);
double bessel_i1(double x);
double log_bessel_i0(double x);

// Regularized incomplete gamma P(a,x) and incomplete beta I_x(a,b).
double reg_lower_gamma(double a, double x);
double reg_inc_beta(double a, double b, double x);

// Standard normal CDF.
double normal_cdf(double z);

// Two-sided p-value for Student's t with df degrees of freedom.
double student_t_two_sided_p(double t, double df);

// Upper tail P(F > f) for the F distribution with (d1, d2) degrees of freedom.
double f_sf(double f, double d1, double d2);

// CDF of the studentized range with k groups and nu error degrees of freedom.
double studentized_range_cdf(double q, int k, double nu);

}
