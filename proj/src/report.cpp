#include "fairsplit/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "fairsplit/csv.hpp"
#include "fairsplit/errors.hpp"
#include "fairsplit/metrics.hpp"
#include "fairsplit/version.hpp"

namespace fairsplit {

using nlohmann::json;

const char* parity_kind_name(ParityKind kind) {
    switch (kind) {
        case ParityKind::StatisticalParity: return "statistical_parity";
        case ParityKind::DemographicParityDifference: return "demographic_parity_difference";
        case ParityKind::AverageCcc: return "average_ccc";
    }
    throw DomainError("invalid parity kind");
}

std::optional<ParityKind> parse_parity_kind(std::string_view name) {
    if (name == "statistical_parity") return ParityKind::StatisticalParity;
    if (name == "demographic_parity_difference") return ParityKind::DemographicParityDifference;
    if (name == "average_ccc") return ParityKind::AverageCcc;
    return std::nullopt;
}

std::string fairness_flag(ParityKind kind, double value) {
    if (kind == ParityKind::AverageCcc) {
        throw DomainError("average concordance carries no fairness threshold");
    }
    if (!(value >= 0.0 && value <= 1.0)) {
        throw DomainError("fairness value " + csv::format_double(value) + " outside [0,1]");
    }
    return value <= 0.1 ? "fair" : "unfair";
}

std::string format_percent(double fraction) {
    // Half-up (away from zero) to one decimal in percent: scale to tenths of
    // a percent and round.
    const long long tenths = std::llround(fraction * 1000.0);
    const long long whole = tenths / 10;
    const long long frac = std::llabs(tenths % 10);
    std::string out;
    if (tenths < 0 && whole == 0) out += "-";
    out += std::to_string(whole);
    out += ".";
    out += std::to_string(frac);
    return out;
}

namespace {

ParityKind parity_kind_for(TaskKind task) {
    switch (task) {
        case TaskKind::Expression: return ParityKind::StatisticalParity;
        case TaskKind::ActionUnits: return ParityKind::DemographicParityDifference;
        case TaskKind::ValenceArousal: return ParityKind::AverageCcc;
    }
    throw DomainError("invalid task");
}

void note_exclusions(AttributeReport& attribute, const std::vector<std::string>& names,
                     const std::string& reason) {
    for (const std::string& name : names) {
        attribute.exclusions.push_back(name + ": " + reason);
    }
}

AttributeReport build_attribute(const JoinedEvaluationSet& joined, Attribute attribute,
                                bool weighted, std::vector<std::string>& notes) {
    AttributeReport out;
    out.attribute = attribute_name(attribute);
    out.fairness_kind = parity_kind_for(joined.task);
    const SubgroupIndex index = subgroup_index(joined, attribute);

    if (joined.task == TaskKind::ValenceArousal) {
        out.flag = ""; // average concordance has no fair/unfair threshold
        try {
            const SubgroupCccTable table = subgroup_ccc_table(joined, index);
            note_exclusions(out, table.excluded, "fewer than two samples, no concordance");
            out.fairness_value = average_ccc_subgroups(table);
            for (std::size_t s = 0; s < table.subgroup_count(); ++s) {
                out.subgroups.push_back({table.subgroup_names[s],
                                         0.5 * (table.ccc_valence[s] + table.ccc_arousal[s]),
                                         table.sizes[s]});
            }
        } catch (const UndefinedMetricError& error) {
            out.fairness_value.reset();
            out.flag = "n/a";
            notes.push_back(out.attribute + ": " + error.what());
        }
        return out;
    }

    // Fairness value: statistical parity over class prediction rates, or
    // demographic parity difference over activation rates.
    try {
        if (joined.task == TaskKind::Expression) {
            const SubgroupClassRates rates =
                class_prediction_rates(joined.pred_expression, joined.category_count, index);
            note_exclusions(out, rates.excluded, "no samples in the evaluation set");
            out.fairness_value = statistical_parity(rates);
        } else {
            const SubgroupActivationRates rates =
                activation_prediction_rates(joined.pred_aus, joined.au_count, index);
            note_exclusions(out, rates.excluded, "no samples in the evaluation set");
            out.fairness_value = demographic_parity_difference(rates);
        }
        // fairness_flag guards the nominal [0,1] domain, but the pairwise
        // parity statistic can legitimately reach 2 on extreme disparities;
        // anything above 1 is trivially above the 0.1 threshold.
        out.flag = *out.fairness_value > 1.0
                       ? "unfair"
                       : fairness_flag(out.fairness_kind, *out.fairness_value);
    } catch (const UndefinedMetricError& error) {
        out.fairness_value.reset();
        out.flag = "n/a";
        notes.push_back(out.attribute + ": " + error.what());
    }

    // Per-subgroup performance and its mean.
    try {
        const SubgroupScores scores = subgroup_f1(joined, index);
        for (const std::string& name : scores.excluded) {
            bool already = false;
            for (const std::string& entry : out.exclusions) {
                if (entry.rfind(name + ":", 0) == 0) already = true;
            }
            if (!already) out.exclusions.push_back(name + ": no defined F1 score");
        }
        out.subgroup_mean = weighted ? scores.weighted_mean : scores.unweighted_mean;
        for (std::size_t s = 0; s < scores.subgroup_names.size(); ++s) {
            out.subgroups.push_back(
                {scores.subgroup_names[s], scores.values[s], scores.sizes[s]});
        }
    } catch (const UndefinedMetricError& error) {
        out.subgroup_mean.reset();
        notes.push_back(out.attribute + ": " + error.what());
    }
    return out;
}

} // namespace

EvaluationReport build_report(const JoinedEvaluationSet& joined, const ReportInputs& inputs) {
    EvaluationReport out;
    out.model = inputs.model;
    out.task = joined.task;
    out.weighted_subgroup_mean = inputs.weighted;
    out.manifest_path = inputs.manifest_path;
    out.predictions_path = inputs.predictions_path;
    out.split_path = inputs.split_path;
    out.set_filter = inputs.set_filter;
    out.au_threshold = inputs.au_threshold;
    out.va_range = inputs.va_range;
    out.sample_count = joined.size();
    out.missing_predictions = joined.missing.size();
    out.toolkit_version = kVersion;

    switch (joined.task) {
        case TaskKind::Expression: out.overall_metric = "macro_f1"; break;
        case TaskKind::ActionUnits: out.overall_metric = "multilabel_f1"; break;
        case TaskKind::ValenceArousal: out.overall_metric = "mean_va_ccc"; break;
    }
    try {
        switch (joined.task) {
            case TaskKind::Expression:
                out.overall_value =
                    f1_macro(joined.truth_expression, joined.pred_expression,
                             joined.category_count);
                break;
            case TaskKind::ActionUnits:
                out.overall_value =
                    f1_binary_multilabel(joined.truth_aus, joined.pred_aus, joined.au_count);
                break;
            case TaskKind::ValenceArousal:
                out.overall_value = mean_va_ccc(joined);
                break;
        }
    } catch (const UndefinedMetricError& error) {
        out.overall_value.reset();
        out.notes.push_back(std::string("overall: ") + error.what());
    }

    const std::array<Attribute, 3> order{Attribute::Age, Attribute::Gender, Attribute::Race};
    for (std::size_t a = 0; a < order.size(); ++a) {
        out.attributes[a] = build_attribute(joined, order[a], inputs.weighted, out.notes);
    }
    if (!joined.missing.empty()) {
        out.notes.push_back(std::to_string(joined.missing.size()) +
                            " manifest sample(s) had no prediction and were left out");
    }
    return out;
}

namespace {

json optional_to_json(const std::optional<double>& value) {
    if (value) return *value;
    return nullptr;
}

std::optional<double> optional_from_json(const json& value) {
    if (value.is_null()) return std::nullopt;
    return value.get<double>();
}

json attribute_to_json(const AttributeReport& attribute) {
    json subgroups = json::array();
    for (const SubgroupEntry& entry : attribute.subgroups) {
        subgroups.push_back(
            {{"name", entry.name}, {"value", entry.value}, {"count", entry.count}});
    }
    return {{"attribute", attribute.attribute},
            {"fairness_kind", parity_kind_name(attribute.fairness_kind)},
            {"fairness_value", optional_to_json(attribute.fairness_value)},
            {"flag", attribute.flag},
            {"subgroup_mean", optional_to_json(attribute.subgroup_mean)},
            {"subgroups", subgroups},
            {"exclusions", attribute.exclusions}};
}

AttributeReport attribute_from_json(const json& value) {
    AttributeReport out;
    out.attribute = value.at("attribute").get<std::string>();
    auto kind = parse_parity_kind(value.at("fairness_kind").get<std::string>());
    if (!kind) throw ValidationError("unknown fairness_kind in report");
    out.fairness_kind = *kind;
    out.fairness_value = optional_from_json(value.at("fairness_value"));
    out.flag = value.at("flag").get<std::string>();
    out.subgroup_mean = optional_from_json(value.at("subgroup_mean"));
    for (const json& entry : value.at("subgroups")) {
        out.subgroups.push_back({entry.at("name").get<std::string>(),
                                 entry.at("value").get<double>(),
                                 entry.at("count").get<std::int64_t>()});
    }
    out.exclusions = value.at("exclusions").get<std::vector<std::string>>();
    return out;
}

json report_to_json_value(const EvaluationReport& report) {
    json attributes = json::array();
    for (const AttributeReport& attribute : report.attributes) {
        attributes.push_back(attribute_to_json(attribute));
    }
    return {{"model", report.model},
            {"task", task_name(report.task)},
            {"overall", {{"metric", report.overall_metric},
                         {"value", optional_to_json(report.overall_value)}}},
            {"attributes", attributes},
            {"config",
             {{"manifest", report.manifest_path},
              {"predictions", report.predictions_path},
              {"split", report.split_path},
              {"set", report.set_filter},
              {"weighted", report.weighted_subgroup_mean},
              {"au_threshold", report.au_threshold},
              {"va_range", {report.va_range.first, report.va_range.second}}}},
            {"sample_count", report.sample_count},
            {"missing_predictions", report.missing_predictions},
            {"notes", report.notes},
            {"toolkit_version", report.toolkit_version}};
}

EvaluationReport report_from_json_value(const json& value) {
    EvaluationReport out;
    out.model = value.at("model").get<std::string>();
    auto task = parse_task(value.at("task").get<std::string>());
    if (!task) throw ValidationError("unknown task in report");
    out.task = *task;
    out.overall_metric = value.at("overall").at("metric").get<std::string>();
    out.overall_value = optional_from_json(value.at("overall").at("value"));
    const json& attributes = value.at("attributes");
    if (attributes.size() != out.attributes.size()) {
        throw ValidationError("report must carry exactly three attribute entries");
    }
    for (std::size_t a = 0; a < out.attributes.size(); ++a) {
        out.attributes[a] = attribute_from_json(attributes[a]);
    }
    const json& config = value.at("config");
    out.manifest_path = config.at("manifest").get<std::string>();
    out.predictions_path = config.at("predictions").get<std::string>();
    out.split_path = config.at("split").get<std::string>();
    out.set_filter = config.at("set").get<std::string>();
    out.weighted_subgroup_mean = config.at("weighted").get<bool>();
    out.au_threshold = config.at("au_threshold").get<int>();
    out.va_range = {config.at("va_range").at(0).get<double>(),
                    config.at("va_range").at(1).get<double>()};
    out.sample_count = value.at("sample_count").get<std::size_t>();
    out.missing_predictions = value.at("missing_predictions").get<std::size_t>();
    out.notes = value.at("notes").get<std::vector<std::string>>();
    out.toolkit_version = value.at("toolkit_version").get<std::string>();
    return out;
}

} // namespace

std::string report_to_json(const EvaluationReport& report) {
    return report_to_json_value(report).dump(2) + "\n";
}

EvaluationReport report_from_json(const std::string& text) {
    json value;
    try {
        value = json::parse(text);
    } catch (const json::exception& error) {
        throw ValidationError(std::string("invalid report document: ") + error.what());
    }
    try {
        return report_from_json_value(value);
    } catch (const json::exception& error) {
        throw ValidationError(std::string("malformed report document: ") + error.what());
    }
}

void write_report(const EvaluationReport& report, const std::filesystem::path& path) {
    csv::Writer out(path);
    out.write_raw(report_to_json(report));
    out.close();
}

EvaluationReport load_report(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    if (in.bad()) throw IoError("failed reading file: " + path.string());
    return report_from_json(buffer.str());
}

std::optional<RenderFormat> parse_render_format(std::string_view name) {
    std::string t = csv::to_lower(csv::trim(name));
    if (t == "json" || t == "machine" || t == "json-like") return RenderFormat::Machine;
    if (t == "table" || t == "text") return RenderFormat::Table;
    return std::nullopt;
}

namespace {

std::string render_cell(const std::optional<double>& value, const std::string& flag) {
    if (!value) return "n/a";
    std::string out = format_percent(*value);
    if (flag == "unfair") out += "*";
    return out;
}

std::string fairness_column_label(TaskKind task) {
    switch (task) {
        case TaskKind::Expression: return "SP";
        case TaskKind::ActionUnits: return "DPD";
        case TaskKind::ValenceArousal: return "CCC";
    }
    throw DomainError("invalid task");
}

std::string render_table(const std::vector<EvaluationReport>& reports) {
    const TaskKind task = reports.front().task;
    const bool va = task == TaskKind::ValenceArousal;
    const std::string fairness = fairness_column_label(task);
    const std::string performance = task == TaskKind::ValenceArousal ? "CCC" : "F1";

    std::vector<std::string> header{"Model", "Test " + performance};
    for (const char* attribute : {"Age", "Gender", "Race"}) {
        header.push_back(std::string(attribute) + " " + fairness);
        if (!va) header.push_back(std::string(attribute) + " " + performance);
    }

    std::vector<std::vector<std::string>> rows;
    bool any_unfair = false;
    for (const EvaluationReport& report : reports) {
        if (report.task != task) {
            throw ValidationError("cannot render reports of different tasks in one table");
        }
        std::vector<std::string> row{report.model,
                                     render_cell(report.overall_value, "")};
        for (const AttributeReport& attribute : report.attributes) {
            row.push_back(render_cell(attribute.fairness_value, attribute.flag));
            if (attribute.flag == "unfair") any_unfair = true;
            if (!va) row.push_back(render_cell(attribute.subgroup_mean, ""));
        }
        rows.push_back(std::move(row));
    }

    std::vector<std::size_t> widths(header.size(), 0);
    for (std::size_t c = 0; c < header.size(); ++c) widths[c] = header[c].size();
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            widths[c] = std::max(widths[c], row[c].size());
        }
    }

    auto emit_row = [&](const std::vector<std::string>& row, std::ostringstream& out) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out << " | ";
            if (c == 0) {
                out << row[c] << std::string(widths[c] - row[c].size(), ' ');
            } else {
                out << std::string(widths[c] - row[c].size(), ' ') << row[c];
            }
        }
        out << "\n";
    };

    std::ostringstream out;
    emit_row(header, out);
    std::size_t rule = 0;
    for (std::size_t c = 0; c < widths.size(); ++c) rule += widths[c] + (c ? 3 : 0);
    out << std::string(rule, '-') << "\n";
    for (const auto& row : rows) emit_row(row, out);
    if (any_unfair) out << "* value above the 0.1 fairness threshold\n";
    return out.str();
}

} // namespace

std::string render_reports(const std::vector<EvaluationReport>& reports, RenderFormat format) {
    if (reports.empty()) throw ValidationError("cannot render an empty report list");
    if (format == RenderFormat::Machine) {
        for (const EvaluationReport& report : reports) {
            if (report.task != reports.front().task) {
                throw ValidationError("cannot render reports of different tasks in one table");
            }
        }
        json out = json::array();
        for (const EvaluationReport& report : reports) {
            out.push_back(report_to_json_value(report));
        }
        return out.dump(2) + "\n";
    }
    return render_table(reports);
}

} // namespace fairsplit
