#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fairsplit/types.hpp"

namespace fairsplit {

struct Manifest;

/// Affine map of `value` from [lo, hi] onto [-1, 1]. Endpoints map exactly to
/// -1 and 1. Throws DomainError if lo >= hi or value lies outside the range.
double rescale_va(double value, double lo, double hi);

/// Intensity 0 stays 0, intensities 1..5 become 1. The activation threshold
/// is fixed at "greater than 0"; the alternative "greater than 1" convention
/// found in some prior work is available only via NormalizeOptions and is
/// never applied silently. Throws DomainError outside 0..5.
std::uint8_t binarize_au(int intensity, int threshold = 0);

/// Maps an age in years to its bin. Throws DomainError for negative ages.
AgeBin bin_age(int years);

struct NormalizeOptions {
    /// AU activation threshold: activation iff intensity > threshold.
    int au_threshold = 0;
};

/// Produces a manifest in the consistent annotation form: AU intensities
/// binarized, VA rescaled from the schema's source range onto [-1, 1], ages
/// already binned at load. Idempotent.
Manifest normalize_manifest(const Manifest& manifest, const NormalizeOptions& options = {});

// --- dual-rater demographic consolidation ---------------------------------

struct RaterRecord {
    AgeGroup age;
    Gender gender = Gender::OtherUncertain;
    Race race = Race::Unlabeled;
};

/// One rater's annotation table, keyed by sample id.
struct RaterTable {
    std::map<std::string, RaterRecord> rows;
};

/// Fields where both raters agreed. Absent optional = that field disagreed.
struct ConsensusRecord {
    std::optional<AgeGroup> age;
    std::optional<Gender> gender;
    std::optional<Race> race;
};

struct Disagreement {
    std::string sample_id;
    std::string field; // "age" | "gender" | "race"
    /// The two raters' values in canonical-name order (the result is
    /// symmetric in the rater tables, so no rater attribution is kept).
    std::string value_a;
    std::string value_b;
};

struct ConsolidationResult {
    std::map<std::string, ConsensusRecord> consensus;
    std::vector<Disagreement> disagreements; // sorted by (sample_id, field)

    std::size_t consensus_field_count() const;
};

/// Per-field consensus: for each of age, gender, and race independently,
/// equal values become ground truth and unequal values are reported as
/// disagreements. Both tables must cover the same sample ids.
ConsolidationResult consolidate_annotations(const RaterTable& a, const RaterTable& b);

/// Rater files share the manifest demographic column format:
/// sample_id, age, gender, race.
RaterTable load_rater_table(const std::filesystem::path& path);

/// Writes consensus.csv (sample_id, age, gender, race; blank = disagreed)
/// and disagreements.csv (sample_id, field, rater_a, rater_b).
void write_consolidation(const ConsolidationResult& result, const std::filesystem::path& out_dir);

} // namespace fairsplit
