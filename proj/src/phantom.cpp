#include "speckle/phantom.hpp"

#include <cmath>
#include <cstdio>
#include <span>

#include "speckle/distributions.hpp"
#include "speckle/rng.hpp"

namespace speckle {

namespace {

constexpr double kTailBudget = 1e-4;  // acceptable clipped mass above 255

// Seed-stream tags so the per-patient sub-streams never collide.
constexpr std::uint64_t kStreamRegionBase = 101;
constexpr std::uint64_t kStreamCharacteristics = 11;
constexpr std::uint64_t kStreamNoise = 12;

std::uint8_t quantize(double v) {
    const double r = std::round(v);
    if (r <= 0.0) return 0;
    if (r >= 255.0) return 255;
    return static_cast<std::uint8_t>(r);
}

const std::array<const char*, 4> kEthnicities = {"european", "east_asian", "south_asian",
                                                 "indigenous"};
// Includes rare diagnoses so the frequency filter has work to do on
// realistic inputs.
const std::array<const char*, 8> kDiagnoses = {
    "diabetic_nephropathy", "hypertensive_nephrosclerosis", "iga_nephropathy",
    "polycystic_kidney_disease", "glomerulonephritis", "reflux_nephropathy",
    "amyloidosis", "fabry_disease"};
// Sampling weights; the last two are deliberately rare.
const std::array<double, 8> kDiagnosisWeights = {0.28, 0.22, 0.16, 0.14, 0.10, 0.07, 0.02, 0.01};

std::string pick_weighted(Rng& rng, std::span<const char* const> values,
                          std::span<const double> weights) {
    const double u = rng.uniform01();
    double cum = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        cum += weights[i];
        if (u <= cum) return values[i];
    }
    return values.back();
}

DistributionParams with_parameter(const DistributionParams& base, const std::string& name,
                                  double value) {
    DistributionParams out = base;
    bool found = false;
    std::visit(
        [&](auto& v) {
            using T = std::decay_t<decltype(v)>;
            auto set = [&](double& field, const char* n) {
                if (name == n) {
                    field = value;
                    found = true;
                }
            };
            if constexpr (std::is_same_v<T, RayleighParams>) {
                set(v.sigma, "sigma");
            } else if constexpr (std::is_same_v<T, NakagamiParams>) {
                set(v.m, "m");
                set(v.omega, "omega");
            } else if constexpr (std::is_same_v<T, GammaParams>) {
                set(v.shape, "shape");
                set(v.scale, "scale");
            } else if constexpr (std::is_same_v<T, RicianParams>) {
                set(v.nu, "nu");
                set(v.s, "s");
            } else if constexpr (std::is_same_v<T, BurrParams>) {
                set(v.c, "c");
                set(v.k, "k");
                set(v.lambda, "lambda");
            } else if constexpr (std::is_same_v<T, ParetoParams>) {
                set(v.a, "a");
                set(v.x_min, "x_min");
            } else {
                set(v.alpha_l, "alpha_l");
                set(v.lambda_l, "lambda_l");
            }
        },
        out);
    if (!found)
        throw PhantomError("covariate model: parameter '" + name + "' not in family " +
                           family_name(family_of(base)));
    return out;
}

double get_parameter(const DistributionParams& p, const std::string& name) {
    for (const auto& [n, v] : named_values(p))
        if (n == name) return v;
    throw PhantomError("covariate model: parameter '" + name + "' not in family " +
                       family_name(family_of(p)));
}

}  // namespace

std::array<DistributionParams, 3> PhantomSpec::default_region_params() {
    // Nakagami speckle with distinct shape and brightness per compartment;
    // scales keep the clipped tail mass below the warning budget.
    return {DistributionParams{NakagamiParams{1.0, 4500.0}},
            DistributionParams{NakagamiParams{0.8, 3200.0}},
            DistributionParams{NakagamiParams{1.3, 8000.0}}};
}

std::vector<std::uint8_t> ellipse_mask(int width, int height) {
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(width) * height, 0);
    const double cx = 0.5 * (width - 1);
    const double cy = 0.5 * (height - 1);
    const double ax = 0.46 * width;
    const double by = 0.44 * height;
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const double dx = (x - cx) / ax;
            const double dy = (y - cy) / by;
            const double rho = std::sqrt(dx * dx + dy * dy);
            std::uint8_t label = 0;
            if (rho <= 0.40) label = static_cast<std::uint8_t>(Region::cec);
            else if (rho <= 0.72) label = static_cast<std::uint8_t>(Region::medulla);
            else if (rho <= 1.0) label = static_cast<std::uint8_t>(Region::cortex);
            mask[static_cast<std::size_t>(y) * width + x] = label;
        }
    }
    return mask;
}

PhantomResult generate_phantom(const PhantomSpec& spec) {
    if (spec.width < 1 || spec.height < 1) throw PhantomError("phantom: empty dimensions");
    for (const auto& p : spec.region_params) validate_params(p);

    PhantomResult out;
    LabeledImage& img = out.image;
    img.width = spec.width;
    img.height = spec.height;
    if (spec.geometry == PhantomGeometry::concentric_ellipses) {
        img.mask = ellipse_mask(spec.width, spec.height);
    } else {
        if (spec.external_mask.size() != static_cast<std::size_t>(spec.width) * spec.height)
            throw PhantomError("phantom: external mask does not match dimensions");
        img.mask = spec.external_mask;
    }
    img.pixels.assign(img.mask.size(), 0);

    for (Region r : kAllRegions) {
        const int ri = region_index(r);
        const DistributionParams& params = spec.region_params[static_cast<std::size_t>(ri)];

        std::size_t area = 0;
        for (std::uint8_t label : img.mask) area += label == static_cast<std::uint8_t>(r);
        if (area == 0)
            throw PhantomError(std::string("phantom: region '") + region_name(r) +
                               "' has zero area under the requested geometry");

        const double clipped = tail_mass_above(params, 255.0);
        if (clipped > kTailBudget)
            out.warnings.push_back(std::string("region '") + region_name(r) +
                                   "': clipped tail mass above 255 is " + std::to_string(clipped));

        // One stream per region, filled in row-major order.
        Rng rng(mix_seed(spec.seed, kStreamRegionBase + static_cast<std::uint64_t>(ri)));
        for (std::size_t i = 0; i < img.mask.size(); ++i) {
            if (img.mask[i] != static_cast<std::uint8_t>(r)) continue;
            img.pixels[i] = quantize(sample_one(params, rng));
        }
    }
    return out;
}

SyntheticCohort generate_cohort(const CohortSpec& spec) {
    if (spec.n_patients < 2) throw PhantomError("generate_cohort: needs at least 2 patients");
    if (spec.covariate)
        get_parameter(spec.base.region_params[static_cast<std::size_t>(
                          region_index(spec.covariate->region))],
                      spec.covariate->parameter);  // validate the address early

    SyntheticCohort cohort;
    cohort.images.resize(spec.n_patients);
    cohort.patients.resize(spec.n_patients);
    cohort.truth.resize(spec.n_patients);

    std::vector<std::vector<std::string>> warnings(spec.n_patients);

    // exceptions may not cross the parallel region; capture and rethrow
    std::exception_ptr failure;
    const auto n = static_cast<long>(spec.n_patients);
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < n; ++i) {
        try {
        const std::uint64_t patient_seed = mix_seed(spec.seed, static_cast<std::uint64_t>(i));

        char buf[16];
        std::snprintf(buf, sizeof buf, "p%04ld", i);
        PatientRecord rec;
        rec.patient_id = buf;

        Rng chars(mix_seed(patient_seed, kStreamCharacteristics));
        rec.age = std::floor(25.0 + 50.0 * chars.uniform01());
        rec.sex = chars.uniform01() < 0.5 ? "female" : "male";
        rec.bmi = 19.0 + 19.0 * chars.uniform01();
        rec.ethnicity = kEthnicities[static_cast<std::size_t>(chars.uniform01() * kEthnicities.size()) %
                                     kEthnicities.size()];
        rec.primary_diagnosis = pick_weighted(chars, kDiagnoses, kDiagnosisWeights);
        rec.donor_type = chars.uniform01() < 0.4 ? "living" : "deceased";
        rec.donor_age = std::floor(20.0 + 45.0 * chars.uniform01());
        // sprinkle missing cells so per-analysis exclusion stays exercised
        if (chars.uniform01() < 0.02) rec.bmi.reset();
        if (chars.uniform01() < 0.02) rec.donor_age.reset();

        std::array<DistributionParams, 3> params = spec.base.region_params;
        if (spec.covariate) {
            const CovariateModel& cm = *spec.covariate;
            const double cov = cm.covariate == CovariateModel::Covariate::age ? *rec.age : *rec.bmi;
            const int ri = region_index(cm.region);
            const double base = get_parameter(params[static_cast<std::size_t>(ri)], cm.parameter);
            Rng noise(mix_seed(patient_seed, kStreamNoise));
            double value = base * (1.0 + cm.slope * cov) + cm.noise_sd * noise.normal();
            if (!(value > 0.0)) value = base * 0.05;  // keep the generator valid
            params[static_cast<std::size_t>(ri)] =
                with_parameter(params[static_cast<std::size_t>(ri)], cm.parameter, value);
        }

        PhantomSpec ps = spec.base;
        ps.region_params = params;
        ps.seed = patient_seed;
        PhantomResult phantom = generate_phantom(ps);
        phantom.image.id = rec.patient_id;

        cohort.images[i] = std::move(phantom.image);
        cohort.patients[i] = std::move(rec);
        cohort.truth[i] = params;
        warnings[i] = std::move(phantom.warnings);
        } catch (...) {
#pragma omp critical
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);

    for (std::size_t i = 0; i < warnings.size(); ++i)
        for (auto& w : warnings[i])
            cohort.warnings.push_back(cohort.patients[i].patient_id + ": " + w);
    return cohort;
}

}
