#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "speckle/estimators.hpp"
#include "speckle/families.hpp"
#include "speckle/grid.hpp"

namespace speckle {

enum class Region : std::uint8_t { cortex = 1, medulla = 2, cec = 3 };
inline constexpr std::array<Region, 3> kAllRegions = {Region::cortex, Region::medulla, Region::cec};

const char* region_name(Region r);
std::optional<Region> region_from_name(std::string_view name);

/// 8-bit grayscale image with a same-sized label mask.
/// Mask labels: 0 background, 1 cortex, 2 medulla, 3 central echogenic complex.
struct LabeledImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;
    std::vector<std::uint8_t> mask;
    std::string id;

    std::size_t size() const { return pixels.size(); }
};

void validate_image(const LabeledImage& img);

/// Intensities extracted from one labelled region; zero pixels are dropped
/// and counted so extracted + dropped equals the mask pixel count.
struct RegionSamples {
    Region region = Region::cortex;
    std::vector<double> values;
    std::size_t n_zero_dropped = 0;
};

class RegionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct FrameSelection {
    std::size_t index = 0;
    std::size_t area = 0;  // 0 signals the all-background warning case
};

/// Picks the frame with the largest non-background mask area; ties keep the
/// lowest index.
FrameSelection select_frame(std::span<const LabeledImage> frames);

RegionSamples extract_region(const LabeledImage& img, Region label);

/// Normalized histogram of samples on the grid (nearest-center binning).
std::vector<double> empirical_histogram(std::span<const double> values, const IntensityGrid& grid);

/// Sum of squared differences between histogram masses and the model's grid masses.
double goodness_of_fit_sse(std::span<const double> hist, const DistributionParams& params,
                           const IntensityGrid& grid);

/// Directed Kullback-Leibler divergence between two normalized mass vectors,
/// with masses floored at 1e-12 inside the log.
double kl_divergence_masses(std::span<const double> p, std::span<const double> q);

/// D_KL(P || Q) between two fitted models discretized on the grid.
double kl_divergence(const DistributionParams& p, const DistributionParams& q,
                     const IntensityGrid& grid);

struct RegionFitEntry {
    Family family;
    std::optional<FitResult> fit;
    std::optional<FitErrorCode> error;
    std::optional<double> sse;
};

struct RegionReport {
    struct PerRegion {
        Region region;
        std::size_t n_pixels = 0;        // mask pixel count for the label
        std::size_t n_used = 0;          // positive intensities kept
        std::size_t n_zero_dropped = 0;
        std::vector<RegionFitEntry> fits;
    };
    struct Gap {
        Region region;
        std::string reason;
    };
    struct Divergence {
        std::optional<Family> family;  // empty = histogram-vs-histogram
        Region from;
        Region to;
        double kl;
    };

    std::string image_id;
    std::vector<PerRegion> regions;
    std::vector<Gap> gaps;
    std::vector<Divergence> divergences;
};

struct AnalyzeOptions {
    IntensityGrid grid;
    std::vector<Family> families{kAllFamilies.begin(), kAllFamilies.end()};
    std::vector<Family> divergence_families{kAllFamilies.begin(), kAllFamilies.end()};
    /// Compare empirical region histograms instead of fitted models.
    bool kl_from_histograms = false;
};

/// Fits every requested family to every present region, scores goodness of
/// fit, and fills the directed divergence table for all ordered region pairs.
RegionReport analyze_image(const LabeledImage& img, const AnalyzeOptions& opts = {});

nlohmann::ordered_json region_report_to_json(const RegionReport& report);

}
