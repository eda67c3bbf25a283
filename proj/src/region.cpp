#include "speckle/region.hpp"

#include <algorithm>
#include <cmath>

#include "speckle/distributions.hpp"
#include "speckle/kernels.hpp"

namespace speckle {

namespace {

constexpr double kMassFloor = 1e-12;

}

const char* region_name(Region r) {
    switch (r) {
        case Region::cortex: return "cortex";
        case Region::medulla: return "medulla";
        case Region::cec: return "cec";
    }
    return "unknown";
}

std::optional<Region> region_from_name(std::string_view name) {
    for (Region r : kAllRegions)
        if (name == region_name(r)) return r;
    return std::nullopt;
}

void validate_image(const LabeledImage& img) {
    if (img.width <= 0 || img.height <= 0) throw RegionError("image has empty dimensions");
    const std::size_t expect = static_cast<std::size_t>(img.width) * img.height;
    if (img.pixels.size() != expect || img.mask.size() != expect)
        throw RegionError("image and mask dimensions do not match");
    for (std::uint8_t label : img.mask)
        if (label > 3) throw RegionError("mask labels must be in {0,1,2,3}");
}

FrameSelection select_frame(std::span<const LabeledImage> frames) {
    if (frames.empty()) throw RegionError("select_frame: no frames supplied");
    FrameSelection best{0, 0};
    for (std::size_t i = 0; i < frames.size(); ++i) {
        validate_image(frames[i]);
        std::size_t area = 0;
        for (std::uint8_t label : frames[i].mask) area += label != 0;
        if (area > best.area) best = FrameSelection{i, area};
    }
    return best;
}

RegionSamples extract_region(const LabeledImage& img, Region label) {
    validate_image(img);
    RegionSamples out;
    out.region = label;
    const auto want = static_cast<std::uint8_t>(label);
    std::size_t present = 0;
    for (std::size_t i = 0; i < img.mask.size(); ++i) {
        if (img.mask[i] != want) continue;
        ++present;
        if (img.pixels[i] == 0) {
            ++out.n_zero_dropped;
        } else {
            out.values.push_back(static_cast<double>(img.pixels[i]));
        }
    }
    if (present == 0)
        throw RegionError(std::string("extract_region: label '") + region_name(label) +
                          "' absent from mask");
    return out;
}

std::vector<double> empirical_histogram(std::span<const double> values, const IntensityGrid& grid) {
    validate_grid(grid);
    if (values.empty()) throw RegionError("empirical_histogram: no samples");
    const auto counts = kernels::bin_counts(values, grid.first_center, grid.width,
                                            static_cast<std::size_t>(grid.bins));
    std::vector<double> hist(grid.bins);
    const double n = static_cast<double>(values.size());
    for (int i = 0; i < grid.bins; ++i) hist[i] = static_cast<double>(counts[i]) / n;
    return hist;
}

double goodness_of_fit_sse(std::span<const double> hist, const DistributionParams& params,
                           const IntensityGrid& grid) {
    const std::vector<double> model = model_masses(params, grid);
    if (hist.size() != model.size())
        throw std::invalid_argument("goodness_of_fit_sse: histogram does not match grid");
    double sse = 0.0;
    for (std::size_t i = 0; i < model.size(); ++i) {
        const double d = hist[i] - model[i];
        sse += d * d;
    }
    return sse;
}

double kl_divergence_masses(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) throw std::invalid_argument("kl_divergence: size mismatch");
    double kl = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] <= 0.0) continue;
        const double pi = std::max(p[i], kMassFloor);
        const double qi = std::max(q[i], kMassFloor);
        kl += p[i] * std::log(pi / qi);
    }
    return kl;
}

double kl_divergence(const DistributionParams& p, const DistributionParams& q,
                     const IntensityGrid& grid) {
    return kl_divergence_masses(model_masses(p, grid), model_masses(q, grid));
}

RegionReport analyze_image(const LabeledImage& img, const AnalyzeOptions& opts) {
    validate_image(img);
    RegionReport report;
    report.image_id = img.id;

    struct Extracted {
        Region region;
        RegionSamples samples;
        std::vector<double> hist;
    };
    std::vector<Extracted> present;

    for (Region r : kAllRegions) {
        RegionSamples samples;
        try {
            samples = extract_region(img, r);
        } catch (const RegionError& e) {
            report.gaps.push_back({r, e.what()});
            continue;
        }

        RegionReport::PerRegion per;
        per.region = r;
        per.n_pixels = samples.values.size() + samples.n_zero_dropped;
        per.n_used = samples.values.size();
        per.n_zero_dropped = samples.n_zero_dropped;

        std::vector<double> hist;
        if (!samples.values.empty()) hist = empirical_histogram(samples.values, opts.grid);

        const auto fits = fit_all(samples.values, opts.families);
        for (const FamilyFit& ff : fits) {
            RegionFitEntry entry;
            entry.family = ff.family;
            entry.error = ff.error;
            entry.fit = ff.fit;
            if (ff.fit && !hist.empty())
                entry.sse = goodness_of_fit_sse(hist, ff.fit->params, opts.grid);
            per.fits.push_back(std::move(entry));
        }
        report.regions.push_back(std::move(per));
        present.push_back(Extracted{r, std::move(samples), std::move(hist)});
    }

    auto fitted_params = [&](Region r, Family f) -> const DistributionParams* {
        for (const auto& per : report.regions) {
            if (per.region != r) continue;
            for (const auto& entry : per.fits)
                if (entry.family == f && entry.fit) return &entry.fit->params;
        }
        return nullptr;
    };

    for (const Extracted& from : present) {
        for (const Extracted& to : present) {
            if (from.region == to.region) continue;
            if (opts.kl_from_histograms) {
                if (from.hist.empty() || to.hist.empty()) continue;
                report.divergences.push_back(
                    {std::nullopt, from.region, to.region,
                     kl_divergence_masses(from.hist, to.hist)});
                continue;
            }
            for (Family f : opts.divergence_families) {
                const DistributionParams* p = fitted_params(from.region, f);
                const DistributionParams* q = fitted_params(to.region, f);
                if (!p || !q) continue;
                report.divergences.push_back(
                    {f, from.region, to.region, kl_divergence(*p, *q, opts.grid)});
            }
        }
    }
    return report;
}

nlohmann::ordered_json region_report_to_json(const RegionReport& report) {
    nlohmann::ordered_json j;
    j["schema"] = "speckle-region-report/1";
    j["image_id"] = report.image_id;
    nlohmann::ordered_json regions = nlohmann::ordered_json::object();
    for (const auto& per : report.regions) {
        nlohmann::ordered_json rj;
        rj["n_pixels"] = per.n_pixels;
        rj["n_used"] = per.n_used;
        rj["n_zero_dropped"] = per.n_zero_dropped;
        nlohmann::ordered_json fits = nlohmann::ordered_json::array();
        for (const auto& entry : per.fits) {
            nlohmann::ordered_json fj;
            if (entry.fit) {
                fj = fit_result_to_json(*entry.fit);
            } else {
                fj["family"] = family_name(entry.family);
                fj["error"] = entry.error ? fit_error_name(*entry.error) : "unknown";
            }
            if (entry.sse) fj["sse"] = *entry.sse;
            fits.push_back(std::move(fj));
        }
        rj["fits"] = std::move(fits);
        regions[region_name(per.region)] = std::move(rj);
    }
    j["regions"] = std::move(regions);

    nlohmann::ordered_json gaps = nlohmann::ordered_json::array();
    for (const auto& gap : report.gaps)
        gaps.push_back({{"region", region_name(gap.region)}, {"reason", gap.reason}});
    j["gaps"] = std::move(gaps);

    nlohmann::ordered_json divs = nlohmann::ordered_json::array();
    for (const auto& d : report.divergences)
        divs.push_back({{"family", d.family ? family_name(*d.family) : "histogram"},
                        {"from", region_name(d.from)},
                        {"to", region_name(d.to)},
                        {"kl", d.kl}});
    j["divergences"] = std::move(divs);
    return j;
}

}
