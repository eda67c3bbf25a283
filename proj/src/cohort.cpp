#include "speckle/cohort.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include "speckle/csv.hpp"
#include "speckle/stats.hpp"

namespace speckle {

namespace {

std::optional<double> parse_optional_double(const std::string& cell) {
    if (cell.empty()) return std::nullopt;
    try {
        std::size_t pos = 0;
        const double v = std::stod(cell, &pos);
        if (pos != cell.size()) return std::nullopt;
        // ages and BMI must be positive; junk becomes missing
        if (!(v > 0.0) || !std::isfinite(v)) return std::nullopt;
        return v;
    } catch (...) {
        return std::nullopt;
    }
}

std::optional<std::string> parse_optional_string(const std::string& cell) {
    if (cell.empty()) return std::nullopt;
    return cell;
}

const std::optional<std::string>* categorical_field(const PatientRecord& rec,
                                                    const std::string& field) {
    if (field == "sex") return &rec.sex;
    if (field == "ethnicity") return &rec.ethnicity;
    if (field == "primary_diagnosis") return &rec.primary_diagnosis;
    if (field == "donor_type") return &rec.donor_type;
    return nullptr;
}

}  // namespace

std::vector<PatientRecord> read_patient_csv(const std::filesystem::path& path) {
    const CsvTable table = read_csv(path);
    const int id = table.column("patient_id");
    if (id < 0) throw CohortError("patient csv: missing patient_id column in " + path.string());
    const int age = table.column("age");
    const int sex = table.column("sex");
    const int bmi = table.column("bmi");
    const int eth = table.column("ethnicity");
    const int diag = table.column("primary_diagnosis");
    const int dtype = table.column("donor_type");
    const int dage = table.column("donor_age");

    std::vector<PatientRecord> out;
    out.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        auto cell = [&](int col) -> std::string {
            return (col >= 0 && col < static_cast<int>(row.size())) ? row[col] : std::string();
        };
        PatientRecord rec;
        rec.patient_id = cell(id);
        if (rec.patient_id.empty()) continue;
        rec.age = parse_optional_double(cell(age));
        rec.sex = parse_optional_string(cell(sex));
        rec.bmi = parse_optional_double(cell(bmi));
        rec.ethnicity = parse_optional_string(cell(eth));
        rec.primary_diagnosis = parse_optional_string(cell(diag));
        rec.donor_type = parse_optional_string(cell(dtype));
        rec.donor_age = parse_optional_double(cell(dage));
        out.push_back(std::move(rec));
    }
    return out;
}

void write_patient_csv(const std::filesystem::path& path, std::span<const PatientRecord> records) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw CohortError("patient csv: cannot write " + path.string());
    out << "# speckle-cohort-csv v1\n";
    out << "patient_id,age,sex,bmi,ethnicity,primary_diagnosis,donor_type,donor_age\n";
    auto num = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
    auto str = [](const std::optional<std::string>& v) { return v ? csv_escape(*v) : std::string(); };
    for (const auto& r : records) {
        out << csv_escape(r.patient_id) << ',' << num(r.age) << ',' << str(r.sex) << ','
            << num(r.bmi) << ',' << str(r.ethnicity) << ',' << str(r.primary_diagnosis) << ','
            << str(r.donor_type) << ',' << num(r.donor_age) << '\n';
    }
}

std::vector<PatientRecord> filter_rare_categories(std::vector<PatientRecord> records,
                                                  const std::string& field, std::size_t min_count,
                                                  std::vector<std::string>* removal_log) {
    std::map<std::string, std::size_t> counts;
    for (const auto& rec : records) {
        const auto* value = categorical_field(rec, field);
        if (!value) throw CohortError("filter_rare_categories: unknown field '" + field + "'");
        if (*value) ++counts[**value];
    }
    std::set<std::string> removed;
    for (const auto& [cat, n] : counts) {
        if (n < min_count) {
            removed.insert(cat);
            if (removal_log)
                removal_log->push_back("removed " + field + " category '" + cat + "' (n=" +
                                       std::to_string(n) + " < " + std::to_string(min_count) + ")");
        }
    }
    std::erase_if(records, [&](const PatientRecord& rec) {
        const auto* value = categorical_field(rec, field);
        return *value && removed.count(**value) > 0;
    });
    return records;
}

CohortTable build_cohort(std::span<const RegionReport> reports,
                         std::vector<PatientRecord> patients) {
    CohortTable table;
    table.patients = std::move(patients);

    std::map<std::string, int> patient_by_id;
    for (std::size_t i = 0; i < table.patients.size(); ++i)
        patient_by_id[table.patients[i].patient_id] = static_cast<int>(i);

    std::set<std::string> matched_patients;
    for (const RegionReport& report : reports) {
        CohortRow row;
        row.patient_id = report.image_id;
        for (const auto& per : report.regions) {
            const int ri = region_index(per.region);
            for (const auto& entry : per.fits) {
                if (!entry.fit) continue;
                row.params[static_cast<std::size_t>(ri)][static_cast<std::size_t>(entry.family)] =
                    entry.fit->params;
            }
        }
        const auto it = patient_by_id.find(row.patient_id);
        if (it != patient_by_id.end()) {
            row.patient_index = it->second;
            matched_patients.insert(row.patient_id);
        } else {
            table.unmatched_row_ids.push_back(row.patient_id);
        }
        table.rows.push_back(std::move(row));
    }
    for (const auto& rec : table.patients)
        if (!matched_patients.count(rec.patient_id))
            table.unmatched_patient_ids.push_back(rec.patient_id);
    return table;
}

ComparisonReport run_region_comparison(const CohortTable& cohort, double alpha, bool welch) {
    std::size_t complete = 0;
    for (const auto& row : cohort.rows) {
        bool all = true;
        for (int ri = 0; ri < 3; ++ri) {
            bool any = false;
            for (const auto& p : row.params[static_cast<std::size_t>(ri)]) any = any || p.has_value();
            all = all && any;
        }
        complete += all;
    }
    if (complete < 2)
        throw CohortError("run_region_comparison: needs at least 2 rows with all three regions fitted");

    ComparisonReport report;
    report.alpha = alpha;
    report.welch = welch;

    // gather parameter samples per (family, parameter, region)
    struct Key {
        Family family;
        std::size_t param;
        int region;
        bool operator<(const Key& o) const {
            return std::tie(family, param, region) < std::tie(o.family, o.param, o.region);
        }
    };
    std::map<Key, std::vector<double>> samples;
    std::map<std::pair<Family, std::size_t>, std::string> param_names;
    for (const auto& row : cohort.rows) {
        for (int ri = 0; ri < 3; ++ri) {
            for (Family f : kAllFamilies) {
                const auto& p = row.params[static_cast<std::size_t>(ri)][static_cast<std::size_t>(f)];
                if (!p) continue;
                const auto values = named_values(*p);
                for (std::size_t k = 0; k < values.size(); ++k) {
                    samples[Key{f, k, ri}].push_back(values[k].second);
                    param_names[{f, k}] = values[k].first;
                }
            }
        }
    }

    const std::array<std::pair<Region, Region>, 3> pairs = {{{Region::cortex, Region::medulla},
                                                             {Region::cortex, Region::cec},
                                                             {Region::medulla, Region::cec}}};

    for (Family f : kAllFamilies) {
        for (std::size_t k = 0; k < parameter_count(f); ++k) {
            const auto name_it = param_names.find({f, k});
            if (name_it == param_names.end()) continue;  // family never fitted
            for (int ri = 0; ri < 3; ++ri) {
                const auto it = samples.find(Key{f, k, ri});
                if (it == samples.end() || it->second.size() < 4) continue;
                NormalitySummary ns;
                ns.family = f;
                ns.parameter = name_it->second;
                ns.region = static_cast<Region>(ri + 1);
                ns.n = it->second.size();
                try {
                    ns.skewness = sample_skewness(it->second);
                    ns.excess_kurtosis = sample_excess_kurtosis(it->second);
                } catch (const StatError&) {
                    continue;  // constant parameter (e.g. quantized x_min), nothing to summarize
                }
                report.normality.push_back(ns);
            }
            for (const auto& [ra, rb] : pairs) {
                const auto a = samples.find(Key{f, k, region_index(ra)});
                const auto b = samples.find(Key{f, k, region_index(rb)});
                if (a == samples.end() || b == samples.end()) continue;
                if (a->second.size() < 2 || b->second.size() < 2) continue;
                ComparisonTest test;
                test.family = f;
                test.parameter = name_it->second;
                test.region_a = ra;
                test.region_b = rb;
                try {
                    const TTestResult t = two_sample_t_test(a->second, b->second, welch);
                    test.t = t.t;
                    test.p = t.p;
                } catch (const StatError&) {
                    continue;  // zero-variance pair, not a comparison
                }
                test.n_a = a->second.size();
                test.n_b = b->second.size();
                report.tests.push_back(test);
            }
        }
    }

    report.n_comparisons = report.tests.size();
    report.alpha_c = report.n_comparisons ? bonferroni_alpha(alpha, report.n_comparisons) : alpha;
    report.family_wise_error_rate = family_wise_error(alpha, report.n_comparisons);
    for (auto& test : report.tests) {
        test.significant_alpha = test.p <= alpha;
        test.significant_alpha_c = test.p <= report.alpha_c;
    }

    // a family is flagged when every parameter separates every region pair
    for (Family f : kAllFamilies) {
        std::size_t expected = 0;
        for (std::size_t k = 0; k < parameter_count(f); ++k)
            if (param_names.count({f, k})) expected += pairs.size();
        if (expected == 0) continue;
        std::size_t found = 0, significant = 0;
        for (const auto& test : report.tests) {
            if (test.family != f) continue;
            ++found;
            significant += test.significant_alpha_c;
        }
        if (found == expected && significant == expected) report.flagged.push_back(f);
    }
    return report;
}

StratificationReport run_stratification(const CohortTable& cohort, Family family, double alpha,
                                        std::size_t min_category_count) {
    StratificationReport report;
    report.family = family;
    report.alpha = alpha;

    // rare-diagnosis filtering happens on the joined patient set
    std::vector<PatientRecord> joined;
    for (const auto& row : cohort.rows)
        if (row.patient_index >= 0)
            joined.push_back(cohort.patients[static_cast<std::size_t>(row.patient_index)]);
    std::set<std::string> kept_diagnoses;
    {
        std::vector<std::string> removal_log;
        const auto filtered =
            filter_rare_categories(joined, "primary_diagnosis", min_category_count, &removal_log);
        for (const auto& rec : filtered)
            if (rec.primary_diagnosis) kept_diagnoses.insert(*rec.primary_diagnosis);
        for (auto& line : removal_log) report.notes.push_back(std::move(line));
    }

    struct Characteristic {
        std::string name;
        bool categorical;
    };
    const std::array<Characteristic, 7> characteristics = {{
        {"age", false},
        {"bmi", false},
        {"donor_age", false},
        {"sex", true},
        {"ethnicity", true},
        {"primary_diagnosis", true},
        {"donor_type", true},
    }};

    auto numeric_field = [](const PatientRecord& rec,
                            const std::string& name) -> const std::optional<double>* {
        if (name == "age") return &rec.age;
        if (name == "bmi") return &rec.bmi;
        if (name == "donor_age") return &rec.donor_age;
        return nullptr;
    };

    for (Region region : kAllRegions) {
        const int ri = region_index(region);
        // collect (patient, parameter values) for rows with this family fitted
        struct RowValue {
            const PatientRecord* rec;
            std::vector<std::pair<std::string, double>> values;
        };
        std::vector<RowValue> rows;
        for (const auto& row : cohort.rows) {
            if (row.patient_index < 0) continue;
            const auto& p = row.params[static_cast<std::size_t>(ri)][static_cast<std::size_t>(family)];
            if (!p) continue;
            rows.push_back({&cohort.patients[static_cast<std::size_t>(row.patient_index)],
                            named_values(*p)});
        }
        if (rows.empty()) {
            report.notes.push_back(std::string("region '") + region_name(region) +
                                   "': no fitted rows for family " + family_name(family));
            continue;
        }

        const std::size_t n_params = rows.front().values.size();
        for (std::size_t k = 0; k < n_params; ++k) {
            const std::string param = rows.front().values[k].first;
            for (const auto&[char_name, categorical] : characteristics) {
                if (!categorical) {
                    std::vector<double> xs, ys;
                    for (const auto& rv : rows) {
                        const auto* field = numeric_field(*rv.rec, char_name);
                        if (!field || !*field) continue;
                        xs.push_back(**field);
                        ys.push_back(rv.values[k].second);
                    }
                    StratTest test;
                    test.region = region;
                    test.parameter = param;
                    test.characteristic = char_name;
                    test.test = "pearson";
                    test.n = xs.size();
                    try {
                        const PearsonResult r = pearson_correlation(xs, ys);
                        test.statistic = r.rho;
                        test.p = r.p;
                        test.significant = r.p <= alpha;
                        report.tests.push_back(test);
                    } catch (const StatError& e) {
                        report.notes.push_back(std::string(region_name(region)) + "/" + param + "/" +
                                               char_name + ": skipped (" + e.what() + ")");
                    }
                    continue;
                }

                std::map<std::string, std::vector<double>> groups;
                for (const auto& rv : rows) {
                    const auto* field = categorical_field(*rv.rec, char_name);
                    if (!field || !*field) continue;
                    if (char_name == "primary_diagnosis" && !kept_diagnoses.count(**field)) continue;
                    groups[**field].push_back(rv.values[k].second);
                }
                std::vector<std::string> names;
                std::vector<std::vector<double>> data;
                std::size_t n_used = 0;
                for (auto& [name, values] : groups) {
                    if (values.size() < 2) continue;  // singleton category cannot enter ANOVA
                    n_used += values.size();
                    names.push_back(name);
                    data.push_back(std::move(values));
                }
                if (data.size() < 2) {
                    report.notes.push_back(std::string(region_name(region)) + "/" + param + "/" +
                                           char_name + ": skipped (fewer than 2 usable groups)");
                    continue;
                }
                StratTest test;
                test.region = region;
                test.parameter = param;
                test.characteristic = char_name;
                test.test = "anova";
                test.n = n_used;
                try {
                    const AnovaResult r = one_way_anova(data);
                    test.statistic = r.f;
                    test.p = r.p;
                    test.significant = r.p <= alpha;
                    report.tests.push_back(test);
                    if (test.significant) {
                        for (const TukeyPair& pair : tukey_posthoc(data)) {
                            StratPosthoc ph;
                            ph.region = region;
                            ph.parameter = param;
                            ph.characteristic = char_name;
                            ph.group_a = names[pair.i];
                            ph.group_b = names[pair.j];
                            ph.q = pair.q;
                            ph.p_adjusted = pair.p_adjusted;
                            ph.significant = pair.p_adjusted <= alpha;
                            report.posthoc.push_back(std::move(ph));
                        }
                    }
                } catch (const StatError& e) {
                    report.notes.push_back(std::string(region_name(region)) + "/" + param + "/" +
                                           char_name + ": skipped (" + e.what() + ")");
                }
            }
        }
    }

    report.alpha_c =
        report.tests.empty() ? alpha : bonferroni_alpha(alpha, report.tests.size());
    for (auto& test : report.tests) test.significant_alpha_c = test.p <= report.alpha_c;
    return report;
}

nlohmann::ordered_json comparison_report_to_json(const ComparisonReport& report) {
    nlohmann::ordered_json j;
    j["schema"] = "speckle-comparison-report/1";
    j["alpha"] = report.alpha;
    j["alpha_c"] = report.alpha_c;
    j["n_comparisons"] = report.n_comparisons;
    j["family_wise_error_rate"] = report.family_wise_error_rate;
    j["t_test"] = report.welch ? "welch" : "pooled";
    nlohmann::ordered_json flagged = nlohmann::ordered_json::array();
    for (Family f : report.flagged) flagged.push_back(family_name(f));
    j["flagged_families"] = std::move(flagged);

    nlohmann::ordered_json tests = nlohmann::ordered_json::array();
    for (const auto& t : report.tests) {
        tests.push_back({{"test", "t"},
                         {"family", family_name(t.family)},
                         {"parameter", t.parameter},
                         {"region_a", region_name(t.region_a)},
                         {"region_b", region_name(t.region_b)},
                         {"statistic", t.t},
                         {"p", t.p},
                         {"n_a", t.n_a},
                         {"n_b", t.n_b},
                         {"significant_alpha", t.significant_alpha},
                         {"significant_alpha_c", t.significant_alpha_c}});
    }
    j["tests"] = std::move(tests);

    nlohmann::ordered_json norm = nlohmann::ordered_json::array();
    for (const auto& n : report.normality) {
        norm.push_back({{"family", family_name(n.family)},
                        {"parameter", n.parameter},
                        {"region", region_name(n.region)},
                        {"n", n.n},
                        {"skewness", n.skewness},
                        {"excess_kurtosis", n.excess_kurtosis}});
    }
    j["normality_summary"] = std::move(norm);
    return j;
}

nlohmann::ordered_json stratification_report_to_json(const StratificationReport& report) {
    nlohmann::ordered_json j;
    j["schema"] = "speckle-stratification-report/1";
    j["family"] = family_name(report.family);
    j["alpha"] = report.alpha;
    j["alpha_c"] = report.alpha_c;

    nlohmann::ordered_json tests = nlohmann::ordered_json::array();
    for (const auto& t : report.tests) {
        tests.push_back({{"test", t.test},
                         {"region", region_name(t.region)},
                         {"parameter", t.parameter},
                         {"characteristic", t.characteristic},
                         {"statistic", t.statistic},
                         {"p", t.p},
                         {"n", t.n},
                         {"significant_alpha", t.significant},
                         {"significant_alpha_c", t.significant_alpha_c}});
    }
    j["tests"] = std::move(tests);

    nlohmann::ordered_json posthoc = nlohmann::ordered_json::array();
    for (const auto& ph : report.posthoc) {
        posthoc.push_back({{"region", region_name(ph.region)},
                           {"parameter", ph.parameter},
                           {"characteristic", ph.characteristic},
                           {"group_a", ph.group_a},
                           {"group_b", ph.group_b},
                           {"q", ph.q},
                           {"p_adjusted", ph.p_adjusted},
                           {"significant", ph.significant}});
    }
    j["posthoc"] = std::move(posthoc);
    j["notes"] = report.notes;
    return j;
}

}
