#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "speckle/cohort.hpp"
#include "speckle/families.hpp"
#include "speckle/region.hpp"

namespace speckle {

enum ExitCode : int {
    exit_ok = 0,
    exit_config_error = 2,
    exit_empty_input = 3,
    exit_internal_error = 4,
};

/// Everything a run needs; the manifest serializes this so a run can be
/// reproduced byte for byte.
struct RunConfig {
    std::string subcommand;

    std::filesystem::path images_dir;
    std::filesystem::path masks_dir;
    std::filesystem::path cohort_csv;
    std::filesystem::path fits_csv;    // cohort input; defaults to <out>/fits.csv
    std::filesystem::path frames_list; // optional multi-frame selection table
    std::filesystem::path out_dir;

    std::vector<Family> families{kAllFamilies.begin(), kAllFamilies.end()};
    Family strat_family = Family::nakagami;
    int grid_bins = 255;
    double alpha = 0.05;
    std::uint64_t seed = 0;
    int jobs = 0;  // 0 keeps the OpenMP default
    bool kl_from_histograms = false;
    bool welch = false;

    // simulate
    std::size_t n_patients = 10;
    int phantom_width = 256;
    int phantom_height = 256;
    std::filesystem::path phantom_params_json;  // optional per-region generator override
    std::string covariate_spec;                 // region:param:covariate:slope:noise_sd
};

int run_fit(const RunConfig& config);
int run_divergence(const RunConfig& config);
int run_cohort(const RunConfig& config);
int run_simulate(const RunConfig& config);

/// Dispatches on config.subcommand and maps exceptions onto exit codes.
int run(const RunConfig& config);

// Pieces the commands above are assembled from; exposed for tests.
std::vector<LabeledImage> load_image_pairs(const RunConfig& config,
                                           std::vector<std::string>* skip_log);
std::vector<RegionReport> analyze_batch(const RunConfig& config,
                                        std::span<const LabeledImage> images);
void write_fits_csv(const std::filesystem::path& path, std::span<const RegionReport> reports);
std::vector<CohortRow> read_fits_csv(const std::filesystem::path& path);
std::uint64_t fnv1a64_file(const std::filesystem::path& path);
void write_run_manifest(const RunConfig& config, std::span<const std::filesystem::path> inputs);

}
