#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "speckle/families.hpp"
#include "speckle/kernels.hpp"

namespace speckle {

enum class FitMethod { closed_form, moments, newton_mle, nelder_mead_mle };
const char* fit_method_name(FitMethod m);

enum class FitErrorCode { insufficient_data, degenerate_sample };
const char* fit_error_name(FitErrorCode c);

class FitError : public std::runtime_error {
public:
    FitError(FitErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    FitErrorCode code() const { return code_; }

private:
    FitErrorCode code_;
};

struct FitResult {
    DistributionParams params;
    double log_likelihood = 0.0;
    std::size_t n_used = 0;
    bool converged = false;
    int iterations = 0;
    FitMethod method = FitMethod::closed_form;
    bool clamped = false;  // m pinned to 0.5, or nu pinned to the Rayleigh limit
};

/// Inverse normalized variance arithmetic: m = E[x^2]^2 / Var(x^2), omega = E[x^2].
struct NakagamiMomentEstimate {
    double m;
    double omega;
};
NakagamiMomentEstimate nakagami_inv_estimate(double mean_sq, double mean_quad);

// Per-family fits. Inputs are raw sample values; non-finite and non-positive
// entries are dropped first and n_used reports what remained. All throw
// FitError when their preconditions fail.
FitResult fit_rayleigh(std::span<const double> samples);
FitResult fit_nakagami_inv(std::span<const double> samples);
FitResult fit_gamma_mle(std::span<const double> samples);
FitResult fit_rician(std::span<const double> samples);
FitResult fit_heavy_tail_mle(Family family, std::span<const double> samples);

/// One entry per requested family: either a fit or the error that stopped it.
struct FamilyFit {
    Family family;
    std::optional<FitResult> fit;
    std::optional<FitErrorCode> error;
};

std::vector<FamilyFit> fit_all(std::span<const double> samples);
std::vector<FamilyFit> fit_all(std::span<const double> samples, std::span<const Family> families);

/// Dispatch a single family through its estimator.
FitResult fit_family(Family family, std::span<const double> samples);

nlohmann::ordered_json fit_result_to_json(const FitResult& r);

}
