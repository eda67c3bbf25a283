#include "speckle/pipeline.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "speckle/csv.hpp"
#include "speckle/distributions.hpp"
#include "speckle/pgm.hpp"
#include "speckle/phantom.hpp"
#include "speckle/version.hpp"

namespace speckle {

namespace fs = std::filesystem;

namespace {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

void apply_jobs(const RunConfig& config) {
#ifdef _OPENMP
    if (config.jobs > 0) omp_set_num_threads(config.jobs);
#else
    (void)config;
#endif
}

void require_out_dir(const RunConfig& config) {
    if (config.out_dir.empty()) throw ConfigError("--out is required");
    std::error_code ec;
    fs::create_directories(config.out_dir, ec);
    if (ec) throw ConfigError("cannot create output directory " + config.out_dir.string());
}

void require_alpha(const RunConfig& config) {
    if (!(config.alpha > 0.0) || !(config.alpha < 1.0))
        throw ConfigError("--alpha must be in (0,1)");
}

void require_grid(const RunConfig& config) {
    if (config.grid_bins < 1) throw ConfigError("--grid-bins must be >= 1");
}

LabeledImage load_pair(const fs::path& image_path, const fs::path& mask_path,
                       const std::string& id) {
    const PgmImage img = read_pgm(image_path);
    const PgmImage mask = read_pgm(mask_path);
    if (img.width != mask.width || img.height != mask.height)
        throw std::runtime_error("mask size does not match image for " + id);
    LabeledImage out;
    out.width = img.width;
    out.height = img.height;
    out.pixels = img.data;
    out.mask = mask.data;
    out.id = id;
    validate_image(out);
    return out;
}

std::string json_dump(const nlohmann::ordered_json& j) {
    return j.dump(2) + "\n";
}

void write_text_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
}

std::string region_csv_cell(const RegionReport::PerRegion& per, const RegionFitEntry& entry) {
    // image_id is prepended by the caller
    std::ostringstream row;
    row << region_name(per.region) << ',' << family_name(entry.family);
    std::array<std::pair<std::string, double>, 3> cells;
    std::size_t used = 0;
    if (entry.fit) {
        const auto values = named_values(entry.fit->params);
        for (const auto& v : values) cells[used++] = v;
    }
    for (std::size_t i = 0; i < 3; ++i) {
        if (i < used)
            row << ',' << cells[i].first << ',' << format_double(cells[i].second);
        else
            row << ",,";
    }
    if (entry.fit) {
        row << ',' << format_double(entry.fit->log_likelihood);
        row << ',' << (entry.sse ? format_double(*entry.sse) : std::string());
        row << ',' << (entry.fit->converged ? "true" : "false");
        row << ',' << entry.fit->n_used;
        row << ',' << fit_method_name(entry.fit->method);
        row << ',';
    } else {
        row << ",,,,,," << (entry.error ? fit_error_name(*entry.error) : "unknown");
    }
    return row.str();
}

DistributionParams params_from_csv_row(Family family, const std::vector<std::string>& row,
                                       int first_param_col) {
    std::vector<std::pair<std::string, double>> values;
    for (int k = 0; k < 3; ++k) {
        const auto& name = row[static_cast<std::size_t>(first_param_col + 2 * k)];
        const auto& value = row[static_cast<std::size_t>(first_param_col + 2 * k + 1)];
        if (name.empty()) continue;
        values.emplace_back(name, std::stod(value));
    }
    return params_from_named(family, values);
}

struct DivergenceRow {
    std::string image_id;
    std::string family;
    Region from;
    Region to;
    double kl;
};

void write_divergence_csv(const fs::path& path, std::span<const DivergenceRow> rows) {
    std::ostringstream out;
    out << "# speckle-divergence-csv v1\n";
    out << "image_id,family,region_from,region_to,kl\n";
    for (const auto& r : rows)
        out << csv_escape(r.image_id) << ',' << r.family << ',' << region_name(r.from) << ','
            << region_name(r.to) << ',' << format_double(r.kl) << '\n';
    write_text_file(path, out.str());
}

void write_comparison_csv(const fs::path& path, const ComparisonReport& report) {
    std::ostringstream out;
    out << "# speckle-comparison-csv v1\n";
    out << "test,family,parameter,region_a,region_b,statistic,p,n_a,n_b,"
           "significant_alpha,significant_alpha_c\n";
    for (const auto& t : report.tests)
        out << "t," << family_name(t.family) << ',' << t.parameter << ','
            << region_name(t.region_a) << ',' << region_name(t.region_b) << ','
            << format_double(t.t) << ',' << format_double(t.p) << ',' << t.n_a << ',' << t.n_b
            << ',' << (t.significant_alpha ? "true" : "false") << ','
            << (t.significant_alpha_c ? "true" : "false") << '\n';
    write_text_file(path, out.str());
}

void write_stratification_csv(const fs::path& path, const StratificationReport& report) {
    std::ostringstream out;
    out << "# speckle-stratification-csv v1\n";
    out << "test,region,parameter,characteristic,statistic,p,n,significant_alpha,"
           "significant_alpha_c\n";
    for (const auto& t : report.tests)
        out << t.test << ',' << region_name(t.region) << ',' << t.parameter << ','
            << t.characteristic << ',' << format_double(t.statistic) << ',' << format_double(t.p)
            << ',' << t.n << ',' << (t.significant ? "true" : "false") << ','
            << (t.significant_alpha_c ? "true" : "false") << '\n';
    write_text_file(path, out.str());
}

std::array<DistributionParams, 3> phantom_params_from_json_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open phantom params file " + path.string());
    nlohmann::json j;
    in >> j;
    std::array<DistributionParams, 3> out = PhantomSpec::default_region_params();
    for (Region r : kAllRegions) {
        const char* name = region_name(r);
        if (j.contains(name))
            out[static_cast<std::size_t>(region_index(r))] = params_from_json(j.at(name));
    }
    return out;
}

CovariateModel parse_covariate_spec(const std::string& spec) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : spec) {
        if (c == ':') {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    parts.push_back(cur);
    if (parts.size() != 5)
        throw ConfigError("--covariate expects region:parameter:covariate:slope:noise_sd");
    CovariateModel cm;
    const auto region = region_from_name(parts[0]);
    if (!region) throw ConfigError("--covariate: unknown region '" + parts[0] + "'");
    cm.region = *region;
    cm.parameter = parts[1];
    if (parts[2] == "age") cm.covariate = CovariateModel::Covariate::age;
    else if (parts[2] == "bmi") cm.covariate = CovariateModel::Covariate::bmi;
    else throw ConfigError("--covariate: covariate must be age or bmi");
    cm.slope = std::stod(parts[3]);
    cm.noise_sd = std::stod(parts[4]);
    return cm;
}

}  // namespace

std::uint64_t fnv1a64_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string() + " for digest");
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    char buf[65536];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        const std::streamsize got = in.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            hash ^= static_cast<unsigned char>(buf[i]);
            hash *= 0x100000001b3ULL;
        }
    }
    return hash;
}

void write_run_manifest(const RunConfig& config, std::span<const fs::path> inputs) {
    nlohmann::ordered_json j;
    j["schema"] = "speckle-run-manifest/1";
    j["tool"] = "speckle";
    j["version"] = kVersion;
    j["subcommand"] = config.subcommand;

    nlohmann::ordered_json c;
    c["images"] = config.images_dir.string();
    c["masks"] = config.masks_dir.string();
    c["cohort"] = config.cohort_csv.string();
    c["fits"] = config.fits_csv.string();
    c["frames_list"] = config.frames_list.string();
    c["out"] = config.out_dir.string();
    nlohmann::ordered_json fams = nlohmann::ordered_json::array();
    for (Family f : config.families) fams.push_back(family_name(f));
    c["families"] = std::move(fams);
    c["strat_family"] = family_name(config.strat_family);
    c["grid_bins"] = config.grid_bins;
    c["alpha"] = config.alpha;
    c["seed"] = config.seed;
    c["jobs"] = config.jobs;
    c["kl_from_histograms"] = config.kl_from_histograms;
    c["welch"] = config.welch;
    c["n_patients"] = config.n_patients;
    c["phantom_width"] = config.phantom_width;
    c["phantom_height"] = config.phantom_height;
    c["phantom_params"] = config.phantom_params_json.string();
    c["covariate"] = config.covariate_spec;
    j["config"] = std::move(c);

    nlohmann::ordered_json ins = nlohmann::ordered_json::array();
    for (const auto& path : inputs) {
        char digest[24];
        std::snprintf(digest, sizeof digest, "%016llx",
                      static_cast<unsigned long long>(fnv1a64_file(path)));
        ins.push_back({{"path", path.string()}, {"fnv1a64", digest}});
    }
    j["inputs"] = std::move(ins);
    write_text_file(config.out_dir / "run_manifest.json", json_dump(j));
}

std::vector<LabeledImage> load_image_pairs(const RunConfig& config,
                                           std::vector<std::string>* skip_log) {
    auto log_skip = [&](const std::string& message) {
        if (skip_log) skip_log->push_back(message);
        std::cerr << "skip: " << message << "\n";
    };

    std::vector<LabeledImage> images;

    if (!config.frames_list.empty()) {
        // multi-frame mode: each line is "patient_id frame1.pgm frame2.pgm ..."
        std::ifstream in(config.frames_list);
        if (!in) throw ConfigError("cannot open frames list " + config.frames_list.string());
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#') continue;
            std::istringstream ss(line);
            std::string id;
            ss >> id;
            std::vector<LabeledImage> frames;
            std::string frame;
            bool bad = false;
            while (ss >> frame) {
                const fs::path image_path = config.images_dir / frame;
                const fs::path mask_path = config.masks_dir / fs::path(frame).filename();
                try {
                    frames.push_back(load_pair(image_path, mask_path, id));
                } catch (const std::exception& e) {
                    log_skip(id + ": " + e.what());
                    bad = true;
                    break;
                }
            }
            if (bad || frames.empty()) continue;
            const FrameSelection sel = select_frame(frames);
            if (sel.area == 0) log_skip(id + ": all frames have empty masks (kept frame 0)");
            images.push_back(std::move(frames[sel.index]));
        }
        return images;
    }

    if (config.images_dir.empty() || !fs::is_directory(config.images_dir))
        throw ConfigError("--images must name an existing directory");
    if (config.masks_dir.empty() || !fs::is_directory(config.masks_dir))
        throw ConfigError("--masks must name an existing directory");

    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(config.images_dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".pgm") continue;
        files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());

    for (const auto& image_path : files) {
        const std::string id = image_path.stem().string();
        const fs::path mask_path = config.masks_dir / image_path.filename();
        if (!fs::exists(mask_path)) {
            log_skip(id + ": no mask " + mask_path.string());
            continue;
        }
        try {
            images.push_back(load_pair(image_path, mask_path, id));
        } catch (const std::exception& e) {
            log_skip(id + ": " + e.what());
        }
    }
    return images;
}

std::vector<RegionReport> analyze_batch(const RunConfig& config,
                                        std::span<const LabeledImage> images) {
    AnalyzeOptions opts;
    opts.grid = IntensityGrid::with_bins(config.grid_bins);
    opts.families = config.families;
    opts.divergence_families = config.families;
    opts.kl_from_histograms = config.kl_from_histograms;

    std::vector<RegionReport> reports(images.size());
    std::exception_ptr failure;
    const auto n = static_cast<long>(images.size());
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < n; ++i) {
        try {
            reports[i] = analyze_image(images[i], opts);
        } catch (...) {
#pragma omp critical
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    return reports;
}

void write_fits_csv(const fs::path& path, std::span<const RegionReport> reports) {
    std::ostringstream out;
    out << "# speckle-fits-csv v1\n";
    out << "image_id,region,family,param1_name,param1,param2_name,param2,param3_name,param3,"
           "log_likelihood,sse,converged,n_used,method,error\n";
    for (const auto& report : reports)
        for (const auto& per : report.regions)
            for (const auto& entry : per.fits)
                out << csv_escape(report.image_id) << ',' << region_csv_cell(per, entry) << '\n';
    write_text_file(path, out.str());
}

std::vector<CohortRow> read_fits_csv(const fs::path& path) {
    const CsvTable table = read_csv(path);
    const int id_col = table.column("image_id");
    const int region_col = table.column("region");
    const int family_col = table.column("family");
    const int p1_col = table.column("param1_name");
    const int err_col = table.column("error");
    if (id_col < 0 || region_col < 0 || family_col < 0 || p1_col < 0)
        throw CohortError("fits csv: missing required columns in " + path.string());

    std::vector<CohortRow> rows;
    std::map<std::string, std::size_t> index;
    for (const auto& raw : table.rows) {
        if (raw.size() < static_cast<std::size_t>(p1_col + 6)) continue;
        const std::string& id = raw[static_cast<std::size_t>(id_col)];
        const auto region = region_from_name(raw[static_cast<std::size_t>(region_col)]);
        const auto family = family_from_name(raw[static_cast<std::size_t>(family_col)]);
        if (!region || !family) continue;
        if (err_col >= 0 && !raw[static_cast<std::size_t>(err_col)].empty()) continue;

        auto it = index.find(id);
        if (it == index.end()) {
            it = index.emplace(id, rows.size()).first;
            rows.push_back(CohortRow{id, {}, -1});
        }
        try {
            rows[it->second]
                .params[static_cast<std::size_t>(region_index(*region))]
                       [static_cast<std::size_t>(*family)] =
                params_from_csv_row(*family, raw, p1_col);
        } catch (const std::exception&) {
            // unparseable parameter cells: leave the slot empty
        }
    }
    return rows;
}

int run_fit(const RunConfig& config) {
    require_out_dir(config);
    require_alpha(config);
    require_grid(config);
    apply_jobs(config);

    std::vector<std::string> skip_log;
    const std::vector<LabeledImage> images = load_image_pairs(config, &skip_log);
    if (images.empty()) {
        std::cerr << "error: no usable image/mask pairs\n";
        return exit_empty_input;
    }

    const std::vector<RegionReport> reports = analyze_batch(config, images);
    for (const auto& report : reports)
        write_text_file(config.out_dir / (report.image_id + ".report.json"),
                        json_dump(region_report_to_json(report)));
    write_fits_csv(config.out_dir / "fits.csv", reports);

    std::vector<fs::path> inputs;
    if (!config.frames_list.empty()) inputs.push_back(config.frames_list);
    write_run_manifest(config, inputs);
    std::cout << "fit: " << reports.size() << " image(s), " << skip_log.size() << " skipped\n";
    return exit_ok;
}

int run_divergence(const RunConfig& config) {
    require_out_dir(config);
    require_alpha(config);
    require_grid(config);
    apply_jobs(config);

    std::vector<std::string> skip_log;
    const std::vector<LabeledImage> images = load_image_pairs(config, &skip_log);
    if (images.empty()) {
        std::cerr << "error: no usable image/mask pairs\n";
        return exit_empty_input;
    }
    const std::vector<RegionReport> reports = analyze_batch(config, images);

    std::vector<DivergenceRow> rows;
    std::map<std::tuple<std::string, int, int>, std::pair<double, std::size_t>> means;
    for (const auto& report : reports) {
        for (const auto& d : report.divergences) {
            const std::string fam = d.family ? family_name(*d.family) : "histogram";
            rows.push_back({report.image_id, fam, d.from, d.to, d.kl});
            auto& [sum, count] = means[{fam, static_cast<int>(d.from), static_cast<int>(d.to)}];
            sum += d.kl;
            ++count;
        }
    }
    for (const auto& [key, acc] : means)
        rows.push_back({"mean", std::get<0>(key), static_cast<Region>(std::get<1>(key)),
                        static_cast<Region>(std::get<2>(key)), acc.first / acc.second});

    write_divergence_csv(config.out_dir / "divergence.csv", rows);
    write_run_manifest(config, {});
    std::cout << "divergence: " << reports.size() << " image(s)\n";
    return exit_ok;
}

int run_cohort(const RunConfig& config) {
    require_out_dir(config);
    require_alpha(config);
    apply_jobs(config);

    if (config.cohort_csv.empty() || !fs::exists(config.cohort_csv))
        throw ConfigError("--cohort must name an existing CSV file");
    fs::path fits = config.fits_csv;
    if (fits.empty()) fits = config.out_dir / "fits.csv";
    if (!fs::exists(fits))
        throw ConfigError("fits CSV not found at " + fits.string() + "; run fit first or pass --fits");

    std::vector<CohortRow> rows = read_fits_csv(fits);
    std::vector<PatientRecord> patients = read_patient_csv(config.cohort_csv);

    // assemble the table through the same join used for in-memory reports
    CohortTable cohort;
    cohort.patients = std::move(patients);
    std::map<std::string, int> patient_by_id;
    for (std::size_t i = 0; i < cohort.patients.size(); ++i)
        patient_by_id[cohort.patients[i].patient_id] = static_cast<int>(i);
    std::set<std::string> matched;
    for (auto& row : rows) {
        const auto it = patient_by_id.find(row.patient_id);
        if (it != patient_by_id.end()) {
            row.patient_index = it->second;
            matched.insert(row.patient_id);
        } else {
            cohort.unmatched_row_ids.push_back(row.patient_id);
        }
        cohort.rows.push_back(std::move(row));
    }
    for (const auto& rec : cohort.patients)
        if (!matched.count(rec.patient_id)) cohort.unmatched_patient_ids.push_back(rec.patient_id);

    const ComparisonReport comparison = run_region_comparison(cohort, config.alpha, config.welch);
    const StratificationReport strat =
        run_stratification(cohort, config.strat_family, config.alpha);

    nlohmann::ordered_json cj = comparison_report_to_json(comparison);
    cj["unmatched_fit_ids"] = cohort.unmatched_row_ids;
    cj["unmatched_patient_ids"] = cohort.unmatched_patient_ids;
    write_text_file(config.out_dir / "comparison.json", json_dump(cj));
    write_comparison_csv(config.out_dir / "comparison.csv", comparison);
    write_text_file(config.out_dir / "stratification.json",
                    json_dump(stratification_report_to_json(strat)));
    write_stratification_csv(config.out_dir / "stratification.csv", strat);
    write_run_manifest(config, std::array<fs::path, 2>{fits, config.cohort_csv});

    char alpha_c[32];
    std::snprintf(alpha_c, sizeof alpha_c, "%.4f", comparison.alpha_c);
    std::cout << "cohort: " << comparison.n_comparisons << " comparisons, alpha = "
              << format_double(comparison.alpha) << ", alpha_c = " << alpha_c << " ("
              << format_double(comparison.alpha_c) << ")\n";
    for (Family f : comparison.flagged)
        std::cout << "flagged: " << family_name(f) << " separates all region pairs at alpha_c\n";
    if (!cohort.unmatched_row_ids.empty()) {
        std::cout << "unmatched fit ids:";
        for (const auto& id : cohort.unmatched_row_ids) std::cout << ' ' << id;
        std::cout << "\n";
    }
    if (!cohort.unmatched_patient_ids.empty()) {
        std::cout << "unmatched patient ids:";
        for (const auto& id : cohort.unmatched_patient_ids) std::cout << ' ' << id;
        std::cout << "\n";
    }
    return exit_ok;
}

int run_simulate(const RunConfig& config) {
    require_out_dir(config);
    require_alpha(config);
    apply_jobs(config);

    CohortSpec spec;
    spec.n_patients = config.n_patients;
    spec.seed = config.seed;
    spec.base.width = config.phantom_width;
    spec.base.height = config.phantom_height;
    spec.base.seed = config.seed;
    if (!config.phantom_params_json.empty())
        spec.base.region_params = phantom_params_from_json_file(config.phantom_params_json);
    if (!config.covariate_spec.empty()) spec.covariate = parse_covariate_spec(config.covariate_spec);

    SyntheticCohort cohort;
    try {
        cohort = generate_cohort(spec);
    } catch (const PhantomError& e) {
        throw ConfigError(e.what());
    }

    const fs::path images_dir = config.out_dir / "images";
    const fs::path masks_dir = config.out_dir / "masks";
    fs::create_directories(images_dir);
    fs::create_directories(masks_dir);

    nlohmann::ordered_json truth = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < cohort.images.size(); ++i) {
        const LabeledImage& img = cohort.images[i];
        write_pgm(images_dir / (img.id + ".pgm"),
                  PgmImage{img.width, img.height, img.pixels});
        write_pgm(masks_dir / (img.id + ".pgm"), PgmImage{img.width, img.height, img.mask});
        nlohmann::ordered_json pj;
        pj["patient_id"] = img.id;
        for (Region r : kAllRegions)
            pj[region_name(r)] =
                params_to_json(cohort.truth[i][static_cast<std::size_t>(region_index(r))]);
        truth.push_back(std::move(pj));
    }
    write_patient_csv(config.out_dir / "cohort.csv", cohort.patients);
    const nlohmann::ordered_json manifest{{"schema", "speckle-ground-truth/1"},
                                          {"patients", std::move(truth)}};
    write_text_file(config.out_dir / "ground_truth.json", json_dump(manifest));
    write_run_manifest(config, {});

    for (const auto& warning : cohort.warnings) std::cerr << "warning: " << warning << "\n";
    std::cout << "simulate: " << cohort.images.size() << " phantom(s) -> " << config.out_dir.string()
              << "\n";
    std::cout << json_dump(manifest);
    return exit_ok;
}

int run(const RunConfig& config) {
    try {
        if (config.subcommand == "fit") return run_fit(config);
        if (config.subcommand == "divergence") return run_divergence(config);
        if (config.subcommand == "cohort") return run_cohort(config);
        if (config.subcommand == "simulate") return run_simulate(config);
        std::cerr << "error: unknown subcommand '" << config.subcommand << "'\n";
        return exit_config_error;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_config_error;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return exit_internal_error;
    }
}

}
