#pragma once

#include <cstdint>
#include <vector>

#include "speckle/families.hpp"
#include "speckle/rng.hpp"

namespace speckle {

/// Density at x >= 0; zero outside the family's support. Validates params.
double pdf(const DistributionParams& p, double x);

/// Natural log of the density. Throws std::domain_error for x < 0 and for
/// x == 0 where the density vanishes or is undefined; returns -inf inside
/// the domain but outside the support (e.g. Pareto x < x_min).
double log_pdf(const DistributionParams& p, double x);

/// Cumulative distribution function on [0, inf).
double cdf(const DistributionParams& p, double x);

/// Upper tail mass P(X > x).
double tail_mass_above(const DistributionParams& p, double x);

/// One draw from the family using the supplied stream.
double sample_one(const DistributionParams& p, Rng& rng);

/// n i.i.d. draws, deterministic for a fixed seed.
std::vector<double> sample(const DistributionParams& p, std::size_t n, std::uint64_t seed);

/// Squared Nakagami variates are Gamma(m, omega/m).
GammaParams nakagami_to_gamma(const NakagamiParams& p);

/// Rayleigh(sigma) is the m = 1 slice of the Nakagami family with omega = 2 sigma^2.
NakagamiParams rayleigh_as_nakagami(double sigma);

}
