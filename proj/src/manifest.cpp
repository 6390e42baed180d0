#include "fairsplit/manifest.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "fairsplit/csv.hpp"
#include "fairsplit/errors.hpp"

namespace fairsplit {

namespace {

// Header lookup that is tolerant of stray whitespace and letter case.
class HeaderIndex {
public:
    explicit HeaderIndex(const std::vector<std::string>& header, const std::string& path)
        : path_(path) {
        for (std::size_t i = 0; i < header.size(); ++i) {
            by_name_.emplace(csv::to_lower(csv::trim(header[i])), i);
        }
    }

    std::optional<std::size_t> find(const std::string& name) const {
        auto it = by_name_.find(name);
        if (it == by_name_.end()) return std::nullopt;
        return it->second;
    }

    std::size_t require(const std::string& name) const {
        auto idx = find(name);
        if (!idx) {
            throw ValidationError("missing required column '" + name + "' in " + path_);
        }
        return *idx;
    }

    // All columns whose name starts with `prefix` followed by an integer id,
    // in header order, as (id, column) pairs.
    std::vector<std::pair<int, std::size_t>> numbered(const std::string& prefix) const {
        std::vector<std::pair<int, std::size_t>> out;
        std::vector<std::pair<std::size_t, int>> in_order;
        for (const auto& [name, col] : by_name_) {
            if (name.size() <= prefix.size() || name.compare(0, prefix.size(), prefix) != 0) {
                continue;
            }
            auto id = csv::parse_int(name.substr(prefix.size()));
            if (!id) continue;
            in_order.emplace_back(col, static_cast<int>(*id));
        }
        std::sort(in_order.begin(), in_order.end());
        for (const auto& [col, id] : in_order) out.emplace_back(id, col);
        return out;
    }

private:
    std::map<std::string, std::size_t> by_name_;
    std::string path_;
};

[[noreturn]] void row_error(const std::string& path, std::size_t line, const std::string& what) {
    throw ValidationError(path + ":" + std::to_string(line) + ": " + what);
}

void check_width(const csv::Table& table, std::size_t row, const std::string& path) {
    if (table.rows[row].size() != table.header.size()) {
        row_error(path, table.line_numbers[row],
                  "expected " + std::to_string(table.header.size()) + " fields, got " +
                      std::to_string(table.rows[row].size()));
    }
}

int parse_au_value(const std::string& text, const std::string& path, std::size_t line,
                   const std::string& column, int max_value) {
    auto value = csv::parse_int(csv::trim(text));
    if (!value || *value < 0 || *value > max_value) {
        row_error(path, line,
                  "column '" + column + "': expected integer in 0.." + std::to_string(max_value) +
                      ", got \"" + text + "\"");
    }
    return static_cast<int>(*value);
}

double parse_real(const std::string& text, const std::string& path, std::size_t line,
                  const std::string& column) {
    auto value = csv::parse_double(csv::trim(text));
    if (!value || !std::isfinite(*value)) {
        row_error(path, line, "column '" + column + "': expected finite decimal, got \"" + text + "\"");
    }
    return *value;
}

// Resolves AU prediction/label columns named <prefix><id> against an optional
// declared id list. Returns (id, column) pairs in declared order, or in header
// order when no list was declared.
std::vector<std::pair<int, std::size_t>> resolve_au_columns(const HeaderIndex& header,
                                                            const std::string& prefix,
                                                            const std::vector<int>& declared,
                                                            const std::string& path) {
    if (declared.empty()) {
        auto found = header.numbered(prefix);
        if (found.empty()) {
            throw ValidationError("no '" + prefix + "<id>' columns found in " + path);
        }
        return found;
    }
    std::vector<std::pair<int, std::size_t>> out;
    for (int id : declared) {
        out.emplace_back(id, header.require(prefix + std::to_string(id)));
    }
    return out;
}

void add_count_warning(std::vector<std::string>& warnings, std::size_t count,
                       const std::string& field, const std::string& fallback) {
    if (count == 0) return;
    warnings.push_back(std::to_string(count) + " " + field + " value" + (count == 1 ? "" : "s") +
                       " unrecognized; treated as " + fallback);
}

} // namespace

Manifest load_manifest(const std::filesystem::path& path, const ManifestSchema& schema) {
    csv::Table table = csv::read_table(path);
    const std::string where = path.string();
    HeaderIndex header(table.header, where);

    Manifest out;
    out.schema = schema;

    const std::size_t id_col = header.require("sample_id");
    const std::optional<std::size_t> subject_col = header.find("subject_id");
    const std::size_t age_col = header.require("age");
    const std::size_t gender_col = header.require("gender");
    const std::size_t race_col = header.require("race");

    std::optional<std::size_t> expr_col;
    std::vector<std::pair<int, std::size_t>> au_cols;
    std::optional<std::size_t> val_col;
    std::optional<std::size_t> aro_col;
    switch (schema.task) {
        case TaskKind::Expression:
            expr_col = header.require("expression");
            break;
        case TaskKind::ActionUnits:
            au_cols = resolve_au_columns(header, "au_", schema.au_ids, where);
            out.schema.au_ids.clear();
            for (const auto& [id, col] : au_cols) out.schema.au_ids.push_back(id);
            break;
        case TaskKind::ValenceArousal:
            val_col = header.require("valence");
            aro_col = header.require("arousal");
            if (!(schema.va_range.first < schema.va_range.second)) {
                throw ValidationError("invalid valence/arousal source range [" +
                                      csv::format_double(schema.va_range.first) + ", " +
                                      csv::format_double(schema.va_range.second) + "]");
            }
            break;
    }

    // Vocabulary lookup; built up-front when declared, otherwise inferred from
    // the data afterwards (sorted, so the result is independent of row order).
    std::map<std::string, int> vocab;
    for (std::size_t i = 0; i < out.schema.expressions.size(); ++i) {
        auto key = csv::to_lower(csv::trim(out.schema.expressions[i]));
        if (!vocab.emplace(key, static_cast<int>(i)).second) {
            throw ValidationError("duplicate expression category '" + out.schema.expressions[i] +
                                  "' in declared vocabulary");
        }
    }
    const bool infer_vocab = schema.task == TaskKind::Expression && vocab.empty();
    std::vector<std::string> raw_labels; // per-sample, only used when inferring

    std::map<std::string, std::size_t> seen_ids;
    std::vector<std::string> duplicate_ids;
    std::size_t bad_age = 0;
    std::size_t bad_gender = 0;
    std::size_t bad_race = 0;
    bool all_binary = true;

    out.samples.reserve(table.rows.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        check_width(table, r, where);
        const auto& row = table.rows[r];
        const std::size_t line = table.line_numbers[r];

        Sample sample;
        sample.sample_id = csv::trim(row[id_col]);
        if (sample.sample_id.empty()) row_error(where, line, "empty sample_id");
        auto [it, inserted] = seen_ids.emplace(sample.sample_id, r);
        if (!inserted) duplicate_ids.push_back(sample.sample_id);
        if (subject_col) sample.subject_id = csv::trim(row[*subject_col]);

        if (auto age = parse_age_group(row[age_col])) {
            sample.age = *age;
        } else {
            sample.age = AgeGroup::unknown();
            ++bad_age;
        }
        if (auto gender = parse_gender(row[gender_col])) {
            sample.gender = *gender;
        } else {
            sample.gender = Gender::OtherUncertain;
            ++bad_gender;
        }
        if (auto race = parse_race(row[race_col])) {
            sample.race = *race;
        } else {
            sample.race = Race::Unlabeled;
            ++bad_race;
        }

        switch (schema.task) {
            case TaskKind::Expression: {
                std::string label = csv::trim(row[*expr_col]);
                if (label.empty()) row_error(where, line, "empty expression label");
                if (infer_vocab) {
                    raw_labels.push_back(csv::to_lower(label));
                    vocab.emplace(raw_labels.back(), -1); // index assigned below
                } else {
                    auto found = vocab.find(csv::to_lower(label));
                    if (found == vocab.end()) {
                        row_error(where, line,
                                  "expression '" + label + "' not in the declared vocabulary");
                    }
                    sample.expression = found->second;
                }
                break;
            }
            case TaskKind::ActionUnits: {
                sample.aus.reserve(au_cols.size());
                for (const auto& [id, col] : au_cols) {
                    int value =
                        parse_au_value(row[col], where, line, "au_" + std::to_string(id), 5);
                    if (value > 1) all_binary = false;
                    sample.aus.push_back(value);
                }
                break;
            }
            case TaskKind::ValenceArousal: {
                sample.valence = parse_real(row[*val_col], where, line, "valence");
                sample.arousal = parse_real(row[*aro_col], where, line, "arousal");
                auto [lo, hi] = out.schema.va_range;
                if (sample.valence < lo || sample.valence > hi || sample.arousal < lo ||
                    sample.arousal > hi) {
                    row_error(where, line,
                              "valence/arousal outside the declared range [" +
                                  csv::format_double(lo) + ", " + csv::format_double(hi) + "]");
                }
                break;
            }
        }
        out.samples.push_back(std::move(sample));
    }

    if (!duplicate_ids.empty()) {
        std::sort(duplicate_ids.begin(), duplicate_ids.end());
        duplicate_ids.erase(std::unique(duplicate_ids.begin(), duplicate_ids.end()),
                            duplicate_ids.end());
        std::string msg = "duplicate sample_id";
        msg += duplicate_ids.size() == 1 ? ": " : "s: ";
        for (std::size_t i = 0; i < duplicate_ids.size(); ++i) {
            if (i) msg += ", ";
            msg += "\"" + duplicate_ids[i] + "\"";
        }
        throw ValidationError(msg + " in " + where);
    }

    if (infer_vocab) {
        int next = 0;
        for (auto& [label, index] : vocab) index = next++; // std::map iterates sorted
        out.schema.expressions.reserve(vocab.size());
        for (const auto& [label, index] : vocab) out.schema.expressions.push_back(label);
        for (std::size_t r = 0; r < raw_labels.size(); ++r) {
            out.samples[r].expression = vocab.at(raw_labels[r]);
        }
    }

    if (schema.task == TaskKind::ActionUnits) out.au_binarized = all_binary;

    add_count_warning(out.warnings, bad_age, "age", "unknown");
    add_count_warning(out.warnings, bad_gender, "gender", "other/uncertain");
    add_count_warning(out.warnings, bad_race, "race", "unlabeled");
    return out;
}

void write_manifest(const Manifest& manifest, const std::filesystem::path& path) {
    csv::Writer writer(path);
    std::vector<std::string> header{"sample_id", "subject_id"};
    switch (manifest.schema.task) {
        case TaskKind::Expression:
            header.push_back("expression");
            break;
        case TaskKind::ActionUnits:
            for (int id : manifest.schema.au_ids) header.push_back("au_" + std::to_string(id));
            break;
        case TaskKind::ValenceArousal:
            header.push_back("valence");
            header.push_back("arousal");
            break;
    }
    header.insert(header.end(), {"age", "gender", "race"});
    writer.write_row(header);

    for (const Sample& sample : manifest.samples) {
        std::vector<std::string> row{sample.sample_id, sample.subject_id};
        switch (manifest.schema.task) {
            case TaskKind::Expression:
                row.push_back(manifest.schema.expressions.at(
                    static_cast<std::size_t>(sample.expression)));
                break;
            case TaskKind::ActionUnits:
                for (int value : sample.aus) row.push_back(std::to_string(value));
                break;
            case TaskKind::ValenceArousal:
                row.push_back(csv::format_double(sample.valence));
                row.push_back(csv::format_double(sample.arousal));
                break;
        }
        row.push_back(age_group_name(sample.age));
        row.push_back(gender_name(sample.gender));
        row.push_back(race_name(sample.race));
        writer.write_row(row);
    }
    writer.close();
}

PredictionSet load_predictions(const std::filesystem::path& path, TaskKind task,
                               const std::vector<int>& au_ids) {
    csv::Table table = csv::read_table(path);
    const std::string where = path.string();
    HeaderIndex header(table.header, where);

    PredictionSet out;
    out.task = task;
    const std::size_t id_col = header.require("sample_id");

    std::optional<std::size_t> expr_col;
    std::vector<std::pair<int, std::size_t>> au_cols;
    std::optional<std::size_t> val_col;
    std::optional<std::size_t> aro_col;
    switch (task) {
        case TaskKind::Expression:
            expr_col = header.require("pred_expression");
            break;
        case TaskKind::ActionUnits:
            au_cols = resolve_au_columns(header, "pred_au_", au_ids, where);
            for (const auto& [id, col] : au_cols) out.au_ids.push_back(id);
            break;
        case TaskKind::ValenceArousal:
            val_col = header.require("pred_valence");
            aro_col = header.require("pred_arousal");
            break;
    }

    std::set<std::string> seen;
    out.records.reserve(table.rows.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        check_width(table, r, where);
        const auto& row = table.rows[r];
        const std::size_t line = table.line_numbers[r];

        PredictionRecord record;
        record.sample_id = csv::trim(row[id_col]);
        if (record.sample_id.empty()) row_error(where, line, "empty sample_id");
        if (!seen.insert(record.sample_id).second) {
            row_error(where, line, "duplicate prediction for sample_id \"" + record.sample_id + "\"");
        }
        switch (task) {
            case TaskKind::Expression:
                record.expression_label = csv::trim(row[*expr_col]);
                if (record.expression_label.empty()) {
                    row_error(where, line, "empty pred_expression");
                }
                break;
            case TaskKind::ActionUnits:
                record.aus.reserve(au_cols.size());
                for (const auto& [id, col] : au_cols) {
                    record.aus.push_back(parse_au_value(row[col], where, line,
                                                        "pred_au_" + std::to_string(id), 1));
                }
                break;
            case TaskKind::ValenceArousal:
                record.valence = parse_real(row[*val_col], where, line, "pred_valence");
                record.arousal = parse_real(row[*aro_col], where, line, "pred_arousal");
                break;
        }
        out.records.push_back(std::move(record));
    }
    return out;
}

JoinedEvaluationSet join_predictions(const Manifest& manifest, const PredictionSet& predictions) {
    if (manifest.schema.task != predictions.task) {
        throw ValidationError("prediction shape mismatch: predictions are for the '" +
                              std::string(task_name(predictions.task)) + "' task, manifest is '" +
                              std::string(task_name(manifest.schema.task)) + "'");
    }
    if (manifest.schema.task == TaskKind::ActionUnits && !manifest.au_binarized) {
        throw ValidationError(
            "manifest AU intensities must be binarized before evaluation (run normalization)");
    }
    if (manifest.schema.task == TaskKind::ValenceArousal &&
        manifest.schema.va_range != std::pair<double, double>{-1.0, 1.0}) {
        throw ValidationError(
            "manifest valence/arousal must be scaled to [-1,1] before evaluation (run "
            "normalization)");
    }

    JoinedEvaluationSet out;
    out.task = manifest.schema.task;
    out.category_count = manifest.schema.expressions.size();
    out.au_count = manifest.schema.au_ids.size();

    // Map prediction AU columns (by id) onto the manifest AU order.
    std::vector<std::size_t> au_order;
    if (out.task == TaskKind::ActionUnits) {
        if (predictions.au_ids.size() != manifest.schema.au_ids.size()) {
            throw ValidationError("prediction shape mismatch: " +
                                  std::to_string(predictions.au_ids.size()) + " AU column(s), " +
                                  "manifest declares " +
                                  std::to_string(manifest.schema.au_ids.size()));
        }
        for (int id : manifest.schema.au_ids) {
            auto it = std::find(predictions.au_ids.begin(), predictions.au_ids.end(), id);
            if (it == predictions.au_ids.end()) {
                throw ValidationError("prediction shape mismatch: no pred_au_" +
                                      std::to_string(id) + " column");
            }
            au_order.push_back(static_cast<std::size_t>(it - predictions.au_ids.begin()));
        }
    }

    // Vocabulary lookup for expression predictions.
    std::map<std::string, int> vocab;
    for (std::size_t i = 0; i < manifest.schema.expressions.size(); ++i) {
        vocab.emplace(csv::to_lower(csv::trim(manifest.schema.expressions[i])),
                      static_cast<int>(i));
    }

    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < manifest.samples.size(); ++i) {
        index.emplace(manifest.samples[i].sample_id, i);
    }

    // Resolve predictions to manifest positions.
    std::vector<const PredictionRecord*> matched(manifest.samples.size(), nullptr);
    for (const PredictionRecord& record : predictions.records) {
        auto it = index.find(record.sample_id);
        if (it == index.end()) {
            throw ValidationError("prediction references unknown sample_id \"" + record.sample_id +
                                  "\"");
        }
        if (matched[it->second]) {
            throw ValidationError("duplicate prediction for sample_id \"" + record.sample_id +
                                  "\"");
        }
        matched[it->second] = &record;
    }

    for (std::size_t i = 0; i < manifest.samples.size(); ++i) {
        const Sample& sample = manifest.samples[i];
        const PredictionRecord* record = matched[i];
        if (!record) {
            out.missing.push_back(sample.sample_id);
            continue;
        }
        out.sample_ids.push_back(sample.sample_id);
        out.age.push_back(sample.age);
        out.gender.push_back(sample.gender);
        out.race.push_back(sample.race);
        switch (out.task) {
            case TaskKind::Expression: {
                out.truth_expression.push_back(sample.expression);
                auto found = vocab.find(csv::to_lower(record->expression_label));
                if (found != vocab.end()) {
                    out.pred_expression.push_back(found->second);
                    break;
                }
                auto as_index = csv::parse_int(record->expression_label);
                if (as_index && *as_index >= 0 &&
                    *as_index < static_cast<long long>(out.category_count)) {
                    out.pred_expression.push_back(static_cast<int>(*as_index));
                    break;
                }
                throw ValidationError("prediction for \"" + record->sample_id +
                                      "\": expression '" + record->expression_label +
                                      "' not in the manifest vocabulary");
            }
            case TaskKind::ActionUnits: {
                for (std::size_t a = 0; a < au_order.size(); ++a) {
                    out.truth_aus.push_back(static_cast<std::uint8_t>(sample.aus[a]));
                    out.pred_aus.push_back(static_cast<std::uint8_t>(record->aus[au_order[a]]));
                }
                break;
            }
            case TaskKind::ValenceArousal: {
                out.truth_valence.push_back(sample.valence);
                out.truth_arousal.push_back(sample.arousal);
                out.pred_valence.push_back(record->valence);
                out.pred_arousal.push_back(record->arousal);
                break;
            }
        }
    }
    return out;
}

} // namespace fairsplit
