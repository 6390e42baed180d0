#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fairsplit/manifest.hpp"

namespace fairsplit {

// Which fairness measure an attribute entry carries: statistical parity for
// expression classification, demographic parity difference for AUs, average
// subgroup concordance for valence/arousal.
enum class ParityKind { StatisticalParity, DemographicParityDifference, AverageCcc };
const char* parity_kind_name(ParityKind kind);
std::optional<ParityKind> parse_parity_kind(std::string_view name);

// "fair" iff value ≤ 0.1 (the threshold is inclusive), "unfair" otherwise.
// Only statistical parity and demographic parity difference carry a fairness
// threshold; value must lie in [0,1].
std::string fairness_flag(ParityKind kind, double value);

struct SubgroupEntry {
    std::string name;
    double value = 0.0;
    std::int64_t count = 0;
};

struct AttributeReport {
    std::string attribute; // "age" | "gender" | "race"
    ParityKind fairness_kind = ParityKind::StatisticalParity;
    std::optional<double> fairness_value; // absent when undefined
    std::string flag;                     // "fair" | "unfair" | "n/a" | "" (no threshold)
    std::optional<double> subgroup_mean;  // mean subgroup F1; absent for VA
    std::vector<SubgroupEntry> subgroups; // per-subgroup F1 or mean CCC
    std::vector<std::string> exclusions;
};

struct EvaluationReport {
    std::string model = "model";
    TaskKind task = TaskKind::Expression;
    std::string overall_metric;          // "macro_f1" | "multilabel_f1" | "mean_va_ccc"
    std::optional<double> overall_value; // absent when undefined
    std::array<AttributeReport, 3> attributes; // age, gender, race

    // Configuration echo.
    std::string manifest_path;
    std::string predictions_path;
    std::string split_path;
    std::string set_filter;
    bool weighted_subgroup_mean = false;
    int au_threshold = 0;
    std::pair<double, double> va_range{-1.0, 1.0};

    std::size_t sample_count = 0;
    std::size_t missing_predictions = 0;
    std::vector<std::string> notes;
    std::string toolkit_version;
};

struct ReportInputs {
    std::string model = "model";
    bool weighted = false; // sample-weighted subgroup mean instead of unweighted
    std::string manifest_path;
    std::string predictions_path;
    std::string split_path;
    std::string set_filter;
    int au_threshold = 0;
    std::pair<double, double> va_range{-1.0, 1.0};
};

// Computes the full report (overall metric, per-attribute fairness values and
// subgroup breakdowns) from a joined evaluation set. Metrics that are
// undefined on this data (e.g. a single-subgroup attribute) are reported as
// absent values with an explanatory note, never as fabricated numbers.
EvaluationReport build_report(const JoinedEvaluationSet& joined, const ReportInputs& inputs);

// Machine-readable round trip (JSON).
std::string report_to_json(const EvaluationReport& report);
EvaluationReport report_from_json(const std::string& text);
void write_report(const EvaluationReport& report, const std::filesystem::path& path);
EvaluationReport load_report(const std::filesystem::path& path);

enum class RenderFormat { Machine, Table };
std::optional<RenderFormat> parse_render_format(std::string_view name);

// One row per model. The tabular form shows the test metric then the
// per-attribute (fairness, subgroup-mean) columns in percent with one decimal
// (half-up), mirroring the report tables the toolkit reproduces; unfair
// values are marked with '*'. The machine form is a JSON array at full
// precision. All reports must share one task kind.
std::string render_reports(const std::vector<EvaluationReport>& reports, RenderFormat format);

// One-decimal percent with half-up (away from zero) rounding: 0.588 → "58.8".
std::string format_percent(double fraction);

} // namespace fairsplit
