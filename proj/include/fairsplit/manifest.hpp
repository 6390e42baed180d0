#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fairsplit/types.hpp"

namespace fairsplit {

// Declared shape of a manifest: which task it labels and the task vocabulary.
struct ManifestSchema {
    TaskKind task = TaskKind::Expression;
    // Expression category names; index into this list is the category index.
    // May be left empty on load, in which case the vocabulary is inferred from
    // the data (distinct labels, sorted) so that loading stays order-independent.
    std::vector<std::string> expressions;
    // AU identifiers, one per au_<id> column. Empty on load means "infer from
    // the header, in header order".
    std::vector<int> au_ids;
    // Declared source range of valence/arousal annotations. Values are stored
    // as read; normalize_manifest maps them onto [-1,1].
    std::pair<double, double> va_range{-1.0, 1.0};

    bool operator==(const ManifestSchema&) const = default;
};

struct Sample {
    std::string sample_id;
    std::string subject_id; // empty → the sample is its own subject
    AgeGroup age;           // may be unknown
    Gender gender = Gender::OtherUncertain;
    Race race = Race::Unlabeled;

    // Exactly one of the following is meaningful, per the manifest task.
    int expression = -1;        // index into schema.expressions
    std::vector<int> aus;       // per-AU intensity 0..5 or activation 0/1
    double valence = 0.0;
    double arousal = 0.0;

    bool operator==(const Sample&) const = default;
};

struct Manifest {
    ManifestSchema schema;
    std::vector<Sample> samples;
    // True when every AU value is already 0/1 (set on load by inspection, and
    // by normalize_manifest after thresholding).
    bool au_binarized = false;
    // Human-readable load diagnostics (unrecognized demographic values etc.).
    std::vector<std::string> warnings;

    std::size_t size() const { return samples.size(); }
};

// One row of a prediction file, shaped like the task label. Expression
// predictions are kept as text and resolved against the manifest vocabulary
// at join time (a bare integer is accepted as a category index).
struct PredictionRecord {
    std::string sample_id;
    std::string expression_label;
    std::vector<int> aus; // activations 0/1
    double valence = 0.0;
    double arousal = 0.0;
};

struct PredictionSet {
    TaskKind task = TaskKind::Expression;
    std::vector<int> au_ids; // for AU predictions, in column order
    std::vector<PredictionRecord> records;
};

// Aligned truth/prediction/demographics arrays produced by the join, in
// manifest sample order restricted to matched ids.
struct JoinedEvaluationSet {
    TaskKind task = TaskKind::Expression;
    std::vector<std::string> sample_ids;
    std::vector<AgeGroup> age;
    std::vector<Gender> gender;
    std::vector<Race> race;

    // Expression task: category indices.
    std::vector<int> truth_expression;
    std::vector<int> pred_expression;
    std::size_t category_count = 0;

    // AU task: flattened sample-major activation matrices of width au_count.
    std::vector<std::uint8_t> truth_aus;
    std::vector<std::uint8_t> pred_aus;
    std::size_t au_count = 0;

    // VA task.
    std::vector<double> truth_valence;
    std::vector<double> truth_arousal;
    std::vector<double> pred_valence;
    std::vector<double> pred_arousal;

    // Manifest sample_ids with no prediction, in manifest order.
    std::vector<std::string> missing;

    std::size_t size() const { return sample_ids.size(); }
    // Matched fraction of the manifest: matched / (matched + missing).
    double coverage() const {
        std::size_t total = sample_ids.size() + missing.size();
        return total == 0 ? 1.0 : static_cast<double>(sample_ids.size()) / static_cast<double>(total);
    }
};

// Reads a manifest file (CSV, header row). The schema parameter declares the
// task and optionally pins the vocabulary / AU list / VA source range; parts
// left empty are inferred as documented on ManifestSchema.
Manifest load_manifest(const std::filesystem::path& path, const ManifestSchema& schema);

// Writes a manifest back out in the same column format load_manifest reads.
void write_manifest(const Manifest& manifest, const std::filesystem::path& path);

// Reads a prediction file (sample_id + pred_* columns) shaped for `task`.
// For AU predictions, au_ids pins the expected column set; empty means "infer
// from the header, in header order".
PredictionSet load_predictions(const std::filesystem::path& path, TaskKind task,
                               const std::vector<int>& au_ids = {});

// Aligns predictions with manifest truth. Every prediction must reference a
// manifest sample and match the task shape; manifest samples without a
// prediction are reported in `missing`, not fabricated. The manifest must be
// in normalized form (binary AUs / [-1,1] VA) so that truth and predictions
// share a scale.
JoinedEvaluationSet join_predictions(const Manifest& manifest, const PredictionSet& predictions);

} // namespace fairsplit
