#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "speckle/cohort.hpp"
#include "speckle/families.hpp"
#include "speckle/region.hpp"

namespace speckle {

class PhantomError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class PhantomGeometry { concentric_ellipses, mask_file };

/// Synthetic kidney-like image: cortex ring outside medulla ring outside the
/// central echogenic complex, each filled with i.i.d. draws from its
/// distribution, quantized to the 8-bit grid.
struct PhantomSpec {
    int width = 256;
    int height = 256;
    // indexed cortex, medulla, cec
    std::array<DistributionParams, 3> region_params = default_region_params();
    PhantomGeometry geometry = PhantomGeometry::concentric_ellipses;
    std::vector<std::uint8_t> external_mask;  // used by mask_file geometry
    std::uint64_t seed = 0;

    static std::array<DistributionParams, 3> default_region_params();
};

struct PhantomResult {
    LabeledImage image;
    std::vector<std::string> warnings;
};

PhantomResult generate_phantom(const PhantomSpec& spec);

/// Builds the concentric-ellipse label mask alone.
std::vector<std::uint8_t> ellipse_mask(int width, int height);

/// Linear drift of one generator parameter with a synthetic covariate:
/// value = base * (1 + slope * covariate) + Normal(0, noise_sd).
struct CovariateModel {
    Region region = Region::cortex;
    std::string parameter = "omega";
    enum class Covariate { age, bmi } covariate = Covariate::age;
    double slope = 0.0;
    double noise_sd = 0.0;
};

struct CohortSpec {
    std::size_t n_patients = 2;
    PhantomSpec base;
    std::optional<CovariateModel> covariate;
    std::uint64_t seed = 0;
};

struct SyntheticCohort {
    std::vector<LabeledImage> images;              // image id == patient id
    std::vector<PatientRecord> patients;
    std::vector<std::array<DistributionParams, 3>> truth;
    std::vector<std::string> warnings;
};

/// Per-patient phantoms plus a characteristics table; patient streams are
/// derived from the master seed, so the result is identical regardless of
/// how the loop is scheduled.
SyntheticCohort generate_cohort(const CohortSpec& spec);

}
