#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "speckle/families.hpp"
#include "speckle/region.hpp"

namespace speckle {

class CohortError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Recipient and donor characteristics; every field other than the id may be
/// missing (empty CSV cell).
struct PatientRecord {
    std::string patient_id;
    std::optional<double> age;
    std::optional<std::string> sex;
    std::optional<double> bmi;
    std::optional<std::string> ethnicity;
    std::optional<std::string> primary_diagnosis;
    std::optional<std::string> donor_type;
    std::optional<double> donor_age;
};

/// CSV header: patient_id,age,sex,bmi,ethnicity,primary_diagnosis,donor_type,donor_age
std::vector<PatientRecord> read_patient_csv(const std::filesystem::path& path);
void write_patient_csv(const std::filesystem::path& path, std::span<const PatientRecord> records);

/// Removes records whose categorical field value occurs fewer than min_count
/// times; records with the field missing are kept.
std::vector<PatientRecord> filter_rare_categories(std::vector<PatientRecord> records,
                                                  const std::string& field,
                                                  std::size_t min_count = 10,
                                                  std::vector<std::string>* removal_log = nullptr);

inline int region_index(Region r) {
    return static_cast<int>(r) - 1;
}

/// Fitted parameters for one patient-image, region-major then family-major.
struct CohortRow {
    std::string patient_id;
    std::array<std::array<std::optional<DistributionParams>, 7>, 3> params;
    int patient_index = -1;  // into CohortTable::patients, -1 when unjoined
};

struct CohortTable {
    std::vector<CohortRow> rows;
    std::vector<PatientRecord> patients;
    std::vector<std::string> unmatched_row_ids;      // fits without characteristics
    std::vector<std::string> unmatched_patient_ids;  // characteristics without fits
};

/// Joins per-image fit reports with patient characteristics on id.
CohortTable build_cohort(std::span<const RegionReport> reports,
                         std::vector<PatientRecord> patients);

struct ComparisonTest {
    Family family;
    std::string parameter;
    Region region_a;
    Region region_b;
    double t = 0.0;
    double p = 1.0;
    std::size_t n_a = 0;
    std::size_t n_b = 0;
    bool significant_alpha = false;
    bool significant_alpha_c = false;
};

/// Informational normality surrogate for one parameter sample.
struct NormalitySummary {
    Family family;
    std::string parameter;
    Region region;
    std::size_t n = 0;
    double skewness = 0.0;
    double excess_kurtosis = 0.0;
};

struct ComparisonReport {
    std::vector<ComparisonTest> tests;
    std::vector<NormalitySummary> normality;
    std::size_t n_comparisons = 0;
    double alpha = 0.05;
    double alpha_c = 0.05;
    double family_wise_error_rate = 0.0;
    std::vector<Family> flagged;  // every parameter significant at alpha_c in all three pairs
    bool welch = false;
};

/// Pairwise region t-tests for every family parameter, Bonferroni-corrected
/// by the number of comparisons actually run.
ComparisonReport run_region_comparison(const CohortTable& cohort, double alpha = 0.05,
                                       bool welch = false);

struct StratTest {
    Region region;
    std::string parameter;
    std::string characteristic;
    std::string test;  // "anova" or "pearson"
    double statistic = 0.0;
    double p = 1.0;
    std::size_t n = 0;
    bool significant = false;          // at alpha
    bool significant_alpha_c = false;  // Bonferroni over the executed tests
};

struct StratPosthoc {
    Region region;
    std::string parameter;
    std::string characteristic;
    std::string group_a;
    std::string group_b;
    double q = 0.0;
    double p_adjusted = 1.0;
    bool significant = false;
};

struct StratificationReport {
    Family family = Family::nakagami;
    double alpha = 0.05;
    double alpha_c = 0.05;  // alpha / number of executed tests
    std::vector<StratTest> tests;
    std::vector<StratPosthoc> posthoc;
    std::vector<std::string> notes;  // skipped analyses, removed rare categories
};

/// ANOVA (+ Tukey post-hoc when significant) across the categorical
/// characteristics and two-tailed Pearson against the numeric ones, for each
/// region and fitted parameter of the chosen family. Rows missing a field are
/// excluded from that analysis only.
StratificationReport run_stratification(const CohortTable& cohort,
                                        Family family = Family::nakagami, double alpha = 0.05,
                                        std::size_t min_category_count = 10);

nlohmann::ordered_json comparison_report_to_json(const ComparisonReport& report);
nlohmann::ordered_json stratification_report_to_json(const StratificationReport& report);

}
