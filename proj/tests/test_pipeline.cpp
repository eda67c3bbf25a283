#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <sys/wait.h>

#include "speckle/csv.hpp"
#include "speckle/pgm.hpp"
#include "speckle/pipeline.hpp"

using namespace speckle;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "speckle_pipeline" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::size_t count_csv_rows(const fs::path& path) {
    return read_csv(path).rows.size();
}

RunConfig simulate_config(const fs::path& out, std::size_t n = 4) {
    RunConfig config;
    config.subcommand = "simulate";
    config.out_dir = out;
    config.n_patients = n;
    config.phantom_width = 96;
    config.phantom_height = 96;
    config.seed = 2024;
    return config;
}

}  // namespace

TEST_CASE("simulate writes images, masks, cohort CSV and ground truth") {
    const fs::path out = fresh_dir("sim");
    REQUIRE(run(simulate_config(out, 5)) == exit_ok);

    std::size_t n_images = 0, n_masks = 0;
    for (const auto& e : fs::directory_iterator(out / "images")) n_images += e.is_regular_file();
    for (const auto& e : fs::directory_iterator(out / "masks")) n_masks += e.is_regular_file();
    CHECK(n_images == 5);
    CHECK(n_masks == 5);
    CHECK(count_csv_rows(out / "cohort.csv") == 5);
    CHECK(fs::exists(out / "ground_truth.json"));
    CHECK(fs::exists(out / "run_manifest.json"));

    const PgmImage img = read_pgm(out / "images" / "p0000.pgm");
    CHECK(img.width == 96);
    CHECK(img.height == 96);
}

TEST_CASE("simulate is byte-deterministic for a fixed seed") {
    const fs::path out = fresh_dir("sim_det");
    REQUIRE(run(simulate_config(out)) == exit_ok);
    const std::string image_a = read_file(out / "images" / "p0001.pgm");
    const std::string cohort_a = read_file(out / "cohort.csv");
    const std::string truth_a = read_file(out / "ground_truth.json");
    const std::string manifest_a = read_file(out / "run_manifest.json");

    REQUIRE(run(simulate_config(out)) == exit_ok);
    CHECK(read_file(out / "images" / "p0001.pgm") == image_a);
    CHECK(read_file(out / "cohort.csv") == cohort_a);
    CHECK(read_file(out / "ground_truth.json") == truth_a);
    CHECK(read_file(out / "run_manifest.json") == manifest_a);
}

TEST_CASE("fit pipeline: per-image reports plus one batch CSV with 3x7 rows per image") {
    const fs::path sim = fresh_dir("fit_src");
    REQUIRE(run(simulate_config(sim, 3)) == exit_ok);

    RunConfig config;
    config.subcommand = "fit";
    config.images_dir = sim / "images";
    config.masks_dir = sim / "masks";
    config.out_dir = fresh_dir("fit_out");
    REQUIRE(run(config) == exit_ok);

    for (const char* id : {"p0000", "p0001", "p0002"})
        CHECK(fs::exists(config.out_dir / (std::string(id) + ".report.json")));
    CHECK(count_csv_rows(config.out_dir / "fits.csv") == 3 * 3 * 7);

    // fits CSV round-trips into cohort rows
    const auto rows = read_fits_csv(config.out_dir / "fits.csv");
    REQUIRE(rows.size() == 3);
    for (const auto& row : rows)
        for (int ri = 0; ri < 3; ++ri)
            CHECK(row.params[ri][static_cast<std::size_t>(Family::nakagami)].has_value());
}

TEST_CASE("fit skips mismatched pairs and fails on empty input") {
    const fs::path sim = fresh_dir("skip_src");
    REQUIRE(run(simulate_config(sim, 2)) == exit_ok);
    // corrupt one mask: wrong dimensions
    write_pgm(sim / "masks" / "p0000.pgm", PgmImage{8, 8, std::vector<std::uint8_t>(64, 1)});

    RunConfig config;
    config.subcommand = "fit";
    config.images_dir = sim / "images";
    config.masks_dir = sim / "masks";
    config.out_dir = fresh_dir("skip_out");
    CHECK(run(config) == exit_ok);  // one good pair remains
    CHECK(count_csv_rows(config.out_dir / "fits.csv") == 1 * 3 * 7);
    CHECK_FALSE(fs::exists(config.out_dir / "p0000.report.json"));

    RunConfig empty = config;
    empty.images_dir = fresh_dir("no_images");
    empty.out_dir = fresh_dir("empty_out");
    CHECK(run(empty) == exit_empty_input);

    RunConfig bad = config;
    bad.images_dir = fs::path("/nonexistent/images");
    bad.out_dir = fresh_dir("bad_out");
    CHECK(run(bad) == exit_config_error);
}

TEST_CASE("divergence emits six directed rows per family per image plus means") {
    const fs::path sim = fresh_dir("div_src");
    REQUIRE(run(simulate_config(sim, 2)) == exit_ok);

    RunConfig config;
    config.subcommand = "divergence";
    config.images_dir = sim / "images";
    config.masks_dir = sim / "masks";
    config.out_dir = fresh_dir("div_out");
    config.families = {Family::rayleigh, Family::nakagami};
    REQUIRE(run(config) == exit_ok);

    const CsvTable table = read_csv(config.out_dir / "divergence.csv");
    // 2 images x 2 families x 6 ordered pairs + 12 mean rows
    CHECK(table.rows.size() == 2 * 2 * 6 + 12);
    std::size_t mean_rows = 0;
    const int id_col = table.column("image_id");
    const int kl_col = table.column("kl");
    for (const auto& row : table.rows) {
        CHECK(std::stod(row[static_cast<std::size_t>(kl_col)]) >= -1e-12);
        mean_rows += row[static_cast<std::size_t>(id_col)] == "mean";
    }
    CHECK(mean_rows == 12);
}

TEST_CASE("divergence means: null phantoms near zero, distinct ones above, single image exact") {
    // identical generators in all regions
    const fs::path null_sim = fresh_dir("div_null");
    {
        RunConfig sim = simulate_config(null_sim, 4);
        const fs::path params = null_sim / "params.json";
        std::ofstream out(params);
        out << R"({"cortex":{"family":"nakagami","params":{"m":1.0,"omega":4500.0}},)"
            << R"("medulla":{"family":"nakagami","params":{"m":1.0,"omega":4500.0}},)"
            << R"("cec":{"family":"nakagami","params":{"m":1.0,"omega":4500.0}}})";
        out.close();
        sim.phantom_params_json = params;
        REQUIRE(run(sim) == exit_ok);
    }
    RunConfig null_div;
    null_div.subcommand = "divergence";
    null_div.images_dir = null_sim / "images";
    null_div.masks_dir = null_sim / "masks";
    null_div.out_dir = fresh_dir("div_null_out");
    null_div.families = {Family::nakagami};
    REQUIRE(run(null_div) == exit_ok);

    auto mean_kls = [](const fs::path& csv) {
        std::map<std::string, double> out;
        const CsvTable table = read_csv(csv);
        const int id = table.column("image_id");
        const int from = table.column("region_from");
        const int to = table.column("region_to");
        const int kl = table.column("kl");
        for (const auto& row : table.rows)
            if (row[static_cast<std::size_t>(id)] == "mean")
                out[row[static_cast<std::size_t>(from)] + ">" + row[static_cast<std::size_t>(to)]] =
                    std::stod(row[static_cast<std::size_t>(kl)]);
        return out;
    };
    const auto null_means = mean_kls(null_div.out_dir / "divergence.csv");
    REQUIRE(null_means.size() == 6);
    for (const auto& [pair, kl] : null_means) CHECK(kl < 0.01);

    // distinct per-region generators dominate the null in all six directions
    const fs::path sep_sim = fresh_dir("div_sep");
    REQUIRE(run(simulate_config(sep_sim, 4)) == exit_ok);  // distinct defaults
    RunConfig sep_div = null_div;
    sep_div.images_dir = sep_sim / "images";
    sep_div.masks_dir = sep_sim / "masks";
    sep_div.out_dir = fresh_dir("div_sep_out");
    REQUIRE(run(sep_div) == exit_ok);
    const auto sep_means = mean_kls(sep_div.out_dir / "divergence.csv");
    REQUIRE(sep_means.size() == 6);
    for (const auto& [pair, kl] : sep_means) CHECK(kl > null_means.at(pair));

    // a single image makes the mean rows coincide with the per-image rows
    fs::remove(sep_sim / "images" / "p0001.pgm");
    fs::remove(sep_sim / "images" / "p0002.pgm");
    fs::remove(sep_sim / "images" / "p0003.pgm");
    RunConfig single = sep_div;
    single.out_dir = fresh_dir("div_single_out");
    REQUIRE(run(single) == exit_ok);
    const CsvTable table = read_csv(single.out_dir / "divergence.csv");
    const int id = table.column("image_id");
    const int from = table.column("region_from");
    const int to = table.column("region_to");
    const int kl = table.column("kl");
    std::map<std::string, std::pair<double, double>> rows;
    for (const auto& row : table.rows) {
        const std::string key =
            row[static_cast<std::size_t>(from)] + ">" + row[static_cast<std::size_t>(to)];
        if (row[static_cast<std::size_t>(id)] == "mean")
            rows[key].second = std::stod(row[static_cast<std::size_t>(kl)]);
        else
            rows[key].first = std::stod(row[static_cast<std::size_t>(kl)]);
    }
    REQUIRE(rows.size() == 6);
    for (const auto& [key, pair] : rows) CHECK(pair.first == doctest::Approx(pair.second));
}

TEST_CASE("cohort pipeline joins fits with characteristics and reports") {
    const fs::path sim = fresh_dir("cohort_src");
    RunConfig sim_config = simulate_config(sim, 6);
    REQUIRE(run(sim_config) == exit_ok);

    RunConfig fit_config;
    fit_config.subcommand = "fit";
    fit_config.images_dir = sim / "images";
    fit_config.masks_dir = sim / "masks";
    fit_config.out_dir = fresh_dir("cohort_fit");
    REQUIRE(run(fit_config) == exit_ok);

    // add a patient row with no matching image
    {
        std::ofstream append(sim / "cohort.csv", std::ios::app);
        append << "legacy-patient,60,male,31,,diabetic_nephropathy,living,50\n";
    }

    RunConfig config;
    config.subcommand = "cohort";
    config.cohort_csv = sim / "cohort.csv";
    config.fits_csv = fit_config.out_dir / "fits.csv";
    config.out_dir = fresh_dir("cohort_out");
    REQUIRE(run(config) == exit_ok);

    CHECK(fs::exists(config.out_dir / "comparison.csv"));
    CHECK(fs::exists(config.out_dir / "comparison.json"));
    CHECK(fs::exists(config.out_dir / "stratification.csv"));
    CHECK(fs::exists(config.out_dir / "stratification.json"));

    const auto cj = nlohmann::json::parse(read_file(config.out_dir / "comparison.json"));
    // quantized minima can leave a parameter constant across six patients, so
    // a few of the 42 planned comparisons may be degenerate and skipped
    CHECK(cj["n_comparisons"].get<int>() >= 33);
    CHECK(cj["n_comparisons"].get<int>() <= 42);
    CHECK(cj["unmatched_patient_ids"].size() == 1);
    CHECK(cj["unmatched_patient_ids"][0] == "legacy-patient");

    RunConfig missing = config;
    missing.cohort_csv = "/nonexistent/cohort.csv";
    missing.out_dir = fresh_dir("cohort_missing");
    CHECK(run(missing) == exit_config_error);
}

TEST_CASE("multi-frame lists select the largest-mask frame") {
    const fs::path sim = fresh_dir("frames_src");
    REQUIRE(run(simulate_config(sim, 2)) == exit_ok);

    // frame B gets a strictly larger mask: reuse p0001's image with its mask,
    // and shrink p0000's mask to a sliver
    PgmImage sliver = read_pgm(sim / "masks" / "p0000.pgm");
    for (std::size_t i = 0; i < sliver.data.size(); ++i)
        if (i % 7 != 0) sliver.data[i] = 0;
    write_pgm(sim / "masks" / "p0000.pgm", sliver);

    const fs::path frames = sim / "frames.txt";
    {
        std::ofstream out(frames);
        out << "patientX p0000.pgm p0001.pgm\n";
    }

    RunConfig config;
    config.subcommand = "fit";
    config.images_dir = sim / "images";
    config.masks_dir = sim / "masks";
    config.frames_list = frames;
    config.out_dir = fresh_dir("frames_out");
    REQUIRE(run(config) == exit_ok);
    CHECK(fs::exists(config.out_dir / "patientX.report.json"));

    // the selected frame is the full-mask one, p0001
    const auto report = nlohmann::json::parse(read_file(config.out_dir / "patientX.report.json"));
    CHECK(report["regions"]["cortex"]["n_pixels"].get<int>() > 2000);
}

TEST_CASE("CLI binary: exit codes and determinism of the version flag") {
    const std::string cli = SPECKLE_CLI_PATH;
    REQUIRE(fs::exists(cli));

    CHECK(std::system((cli + " --version > /dev/null").c_str()) == 0);
    // unknown subcommand -> config error (exit code 2 -> wait status 512)
    const int bad = std::system((cli + " frobnicate --out /tmp/x 2> /dev/null").c_str());
    CHECK(WEXITSTATUS(bad) == exit_config_error);

    const fs::path out = fresh_dir("cli_sim");
    const std::string cmd = cli + " simulate --out " + out.string() +
                            " --n-patients 2 --width 64 --height 64 --seed 5 > /dev/null";
    CHECK(std::system(cmd.c_str()) == 0);
    CHECK(fs::exists(out / "images" / "p0000.pgm"));

    const int invalid_geometry =
        std::system((cli + " simulate --out " + (out / "tiny").string() +
                     " --n-patients 2 --width 2 --height 2 2> /dev/null")
                        .c_str());
    CHECK(WEXITSTATUS(invalid_geometry) == exit_config_error);
}

TEST_CASE("run manifest captures config and input digests") {
    const fs::path out = fresh_dir("manifest");
    RunConfig config = simulate_config(out, 2);
    REQUIRE(run(config) == exit_ok);
    const auto manifest = nlohmann::json::parse(read_file(out / "run_manifest.json"));
    CHECK(manifest["schema"] == "speckle-run-manifest/1");
    CHECK(manifest["subcommand"] == "simulate");
    CHECK(manifest["config"]["seed"].get<std::uint64_t>() == 2024);
    CHECK(manifest["config"]["n_patients"].get<int>() == 2);

    // digests change when inputs change
    const fs::path file = out / "probe.txt";
    {
        std::ofstream f(file);
        f << "alpha";
    }
    const auto d1 = fnv1a64_file(file);
    {
        std::ofstream f(file);
        f << "beta";
    }
    CHECK(fnv1a64_file(file) != d1);
}
