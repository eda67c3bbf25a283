#include <doctest.h>

#include <cmath>

#include "speckle/estimators.hpp"
#include "speckle/phantom.hpp"
#include "speckle/stats.hpp"

using namespace speckle;

TEST_CASE("concentric-ellipse phantom has three nested nonzero regions") {
    PhantomSpec spec;
    spec.seed = 12;
    const PhantomResult r = generate_phantom(spec);
    const LabeledImage& img = r.image;
    CHECK(img.width == 256);
    CHECK(img.height == 256);

    std::array<std::size_t, 4> areas{};
    for (std::uint8_t label : img.mask) ++areas[label];
    CHECK(areas[1] > 0);
    CHECK(areas[2] > 0);
    CHECK(areas[3] > 0);
    CHECK(areas[0] > 0);

    // scanning the middle row inward: background, cortex, medulla, cec
    const int y = img.height / 2;
    std::vector<std::uint8_t> sequence;
    for (int x = 0; x < img.width / 2; ++x) {
        const std::uint8_t label = img.mask[static_cast<std::size_t>(y) * img.width + x];
        if (sequence.empty() || sequence.back() != label) sequence.push_back(label);
    }
    CHECK(sequence == std::vector<std::uint8_t>{0, 1, 2, 3});

    // extraction bookkeeping matches the generator's pixel budget
    for (Region region : kAllRegions) {
        const RegionSamples s = extract_region(img, region);
        CHECK(s.values.size() + s.n_zero_dropped == areas[static_cast<std::size_t>(region)]);
    }
}

TEST_CASE("phantom generation is bit-deterministic per seed") {
    PhantomSpec spec;
    spec.seed = 987;
    const PhantomResult a = generate_phantom(spec);
    const PhantomResult b = generate_phantom(spec);
    CHECK(a.image.pixels == b.image.pixels);
    CHECK(a.image.mask == b.image.mask);

    spec.seed = 988;
    const PhantomResult c = generate_phantom(spec);
    CHECK(a.image.pixels != c.image.pixels);
}

TEST_CASE("fitted shape ordering follows the generator ordering") {
    PhantomSpec spec;
    spec.seed = 5;
    spec.width = 256;
    spec.height = 256;
    spec.region_params = {DistributionParams{NakagamiParams{0.8, 5000.0}},
                          DistributionParams{NakagamiParams{1.0, 5000.0}},
                          DistributionParams{NakagamiParams{1.3, 5000.0}}};
    const PhantomResult r = generate_phantom(spec);

    std::array<double, 3> m_hat{};
    for (Region region : kAllRegions) {
        const RegionSamples s = extract_region(r.image, region);
        m_hat[static_cast<std::size_t>(region_index(region))] =
            std::get<NakagamiParams>(fit_nakagami_inv(s.values).params).m;
    }
    CHECK(m_hat[0] < m_hat[1]);
    CHECK(m_hat[1] < m_hat[2]);
}

TEST_CASE("tiny geometry with empty rings is rejected") {
    PhantomSpec spec;
    spec.width = 2;
    spec.height = 2;
    CHECK_THROWS_AS(generate_phantom(spec), PhantomError);
}

TEST_CASE("external masks are honoured and validated") {
    PhantomSpec spec;
    spec.width = 30;
    spec.height = 3;
    spec.geometry = PhantomGeometry::mask_file;
    spec.external_mask.assign(90, 0);
    for (int i = 0; i < 30; ++i) {
        spec.external_mask[static_cast<std::size_t>(i)] = 1;
        spec.external_mask[static_cast<std::size_t>(30 + i)] = 2;
        spec.external_mask[static_cast<std::size_t>(60 + i)] = 3;
    }
    const PhantomResult r = generate_phantom(spec);
    CHECK(r.image.mask == spec.external_mask);

    spec.external_mask.pop_back();
    CHECK_THROWS_AS(generate_phantom(spec), PhantomError);
}

TEST_CASE("tail clipping beyond the 8-bit range raises a warning") {
    PhantomSpec spec;
    spec.seed = 3;
    spec.region_params = {DistributionParams{NakagamiParams{1.0, 40000.0}},  // heavy clipping
                          DistributionParams{NakagamiParams{1.0, 4000.0}},
                          DistributionParams{NakagamiParams{1.0, 4000.0}}};
    const PhantomResult r = generate_phantom(spec);
    REQUIRE_FALSE(r.warnings.empty());
    CHECK(r.warnings[0].find("cortex") != std::string::npos);

    PhantomSpec ok;
    ok.seed = 3;
    CHECK(generate_phantom(ok).warnings.empty());
}

TEST_CASE("quantization bias stays below 3% for in-range scales") {
    // 512x512 keeps estimator noise well under the bias budget
    PhantomSpec spec;
    spec.seed = 44;
    spec.width = 512;
    spec.height = 512;
    const PhantomResult r = generate_phantom(spec);
    for (Region region : kAllRegions) {
        const auto& truth =
            std::get<NakagamiParams>(spec.region_params[static_cast<std::size_t>(region_index(region))]);
        const RegionSamples s = extract_region(r.image, region);
        const auto fitted = std::get<NakagamiParams>(fit_nakagami_inv(s.values).params);
        INFO(region_name(region));
        CHECK(std::abs(fitted.m - truth.m) / truth.m < 0.03);
        CHECK(std::abs(fitted.omega - truth.omega) / truth.omega < 0.03);
    }
}

TEST_CASE("generate_cohort: determinism, minimal size, and planted covariate") {
    CohortSpec tiny;
    tiny.n_patients = 2;
    tiny.base.width = 64;
    tiny.base.height = 64;
    tiny.seed = 77;
    const SyntheticCohort a = generate_cohort(tiny);
    const SyntheticCohort b = generate_cohort(tiny);
    REQUIRE(a.images.size() == 2);
    CHECK(a.images[0].pixels == b.images[0].pixels);
    CHECK(a.patients[0].patient_id == "p0000");
    CHECK(a.patients[1].patient_id == "p0001");

    CHECK_THROWS_AS(generate_cohort(CohortSpec{1, {}, {}, 0}), PhantomError);

    CohortSpec planted;
    planted.n_patients = 120;
    planted.base.width = 64;
    planted.base.height = 64;
    planted.seed = 31;
    CovariateModel cm;
    cm.region = Region::cortex;
    cm.parameter = "omega";
    cm.covariate = CovariateModel::Covariate::age;
    cm.slope = 0.004;
    cm.noise_sd = 150.0;
    planted.covariate = cm;
    const SyntheticCohort cohort = generate_cohort(planted);

    std::vector<double> ages, omegas;
    for (std::size_t i = 0; i < cohort.patients.size(); ++i) {
        ages.push_back(*cohort.patients[i].age);
        omegas.push_back(std::get<NakagamiParams>(cohort.truth[i][0]).omega);
    }
    const PearsonResult corr = pearson_correlation(ages, omegas);
    CHECK(corr.rho > 0.3);
    CHECK(corr.p < 0.01);

    // untouched regions keep the base parameters
    for (const auto& truth : cohort.truth)
        CHECK(std::get<NakagamiParams>(truth[2]).omega ==
              std::get<NakagamiParams>(PhantomSpec::default_region_params()[2]).omega);
}

TEST_CASE("covariate model addressing an absent parameter is rejected") {
    CohortSpec spec;
    spec.n_patients = 2;
    spec.seed = 1;
    CovariateModel cm;
    cm.region = Region::cortex;
    cm.parameter = "sigma";  // cortex generator is Nakagami
    spec.covariate = cm;
    CHECK_THROWS_AS(generate_cohort(spec), PhantomError);
}
