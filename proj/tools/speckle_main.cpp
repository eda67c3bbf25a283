#include <CLI11.hpp>

#include <cstdio>
#include <string>
#include <vector>

#include "speckle/pipeline.hpp"
#include "speckle/version.hpp"

namespace {

speckle::RunConfig g_config;
std::vector<std::string> g_family_names;
std::string g_strat_family = "nakagami";

void add_common(CLI::App* cmd) {
    cmd->add_option("--out", g_config.out_dir, "Output directory")->required();
    cmd->add_option("--seed", g_config.seed, "Random seed");
    cmd->add_option("--jobs", g_config.jobs, "Worker threads (0 = library default)");
    cmd->add_option("--alpha", g_config.alpha, "Significance level");
    cmd->add_option("--grid-bins", g_config.grid_bins, "Intensity grid bin count");
}

void add_image_inputs(CLI::App* cmd) {
    cmd->add_option("--images", g_config.images_dir, "Directory of 8-bit PGM images");
    cmd->add_option("--masks", g_config.masks_dir, "Directory of label-mask PGM files");
    cmd->add_option("--frames-list", g_config.frames_list,
                    "Multi-frame table: 'patient_id frame1.pgm frame2.pgm ...' per line; the "
                    "largest-mask frame is selected");
    cmd->add_option("--families", g_family_names, "Families to fit")->delimiter(',');
}

int resolve_families() {
    if (g_family_names.empty()) return 0;
    g_config.families.clear();
    for (const auto& name : g_family_names) {
        const auto f = speckle::family_from_name(name);
        if (!f) {
            std::fprintf(stderr, "config error: unknown family '%s'\n", name.c_str());
            return speckle::exit_config_error;
        }
        g_config.families.push_back(*f);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Speckle distribution analysis for labelled B-mode ultrasound regions"};
    app.set_version_flag("--version", speckle::kVersion);
    app.require_subcommand(1);

    CLI::App* fit = app.add_subcommand("fit", "Fit families to each labelled region");
    add_image_inputs(fit);
    add_common(fit);

    CLI::App* div = app.add_subcommand("divergence", "Directed KL divergence between regions");
    add_image_inputs(div);
    add_common(div);
    div->add_flag("--kl-histogram", g_config.kl_from_histograms,
                  "Compare empirical histograms instead of fitted models");

    CLI::App* cohort = app.add_subcommand("cohort", "Region comparison and stratification");
    add_common(cohort);
    cohort->add_option("--cohort", g_config.cohort_csv, "Patient characteristics CSV")->required();
    cohort->add_option("--fits", g_config.fits_csv, "Batch fits CSV (default <out>/fits.csv)");
    cohort->add_option("--strat-family", g_strat_family, "Family whose parameters are stratified");
    cohort->add_flag("--welch", g_config.welch, "Use Welch's t-test instead of pooled");

    CLI::App* sim = app.add_subcommand("simulate", "Generate a synthetic labelled phantom cohort");
    add_common(sim);
    sim->add_option("--n-patients", g_config.n_patients, "Cohort size");
    sim->add_option("--width", g_config.phantom_width, "Phantom width in pixels");
    sim->add_option("--height", g_config.phantom_height, "Phantom height in pixels");
    sim->add_option("--phantom-params", g_config.phantom_params_json,
                    "JSON file with per-region generator parameters");
    sim->add_option("--covariate", g_config.covariate_spec,
                    "Planted effect region:parameter:covariate:slope:noise_sd");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : speckle::exit_config_error;
    }

    if (const int rc = resolve_families(); rc != 0) return rc;
    if (const auto f = speckle::family_from_name(g_strat_family)) {
        g_config.strat_family = *f;
    } else {
        std::fprintf(stderr, "config error: unknown family '%s'\n", g_strat_family.c_str());
        return speckle::exit_config_error;
    }

    for (CLI::App* sub : {fit, div, cohort, sim}) {
        if (sub->parsed()) {
            g_config.subcommand = sub->get_name();
            break;
        }
    }
    return speckle::run(g_config);
}
