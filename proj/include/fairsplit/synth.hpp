#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fairsplit/manifest.hpp"
#include "fairsplit/partition.hpp"

namespace fairsplit {

// A named categorical distribution; probabilities sum to 1 within 1e-9.
struct Categorical {
    std::vector<std::string> names;
    std::vector<double> probabilities;

    static Categorical from_counts(std::vector<std::string> names,
                                   const std::vector<std::int64_t>& counts);
    void validate(const std::string& what) const;
};

// One 2D Gaussian component of a valence/arousal mixture; samples are clipped
// into [-1,1]².
struct VaComponent {
    double weight = 1.0;
    double mean_valence = 0.0;
    double mean_arousal = 0.0;
    double sigma_valence = 0.3;
    double sigma_arousal = 0.3;
};

struct SynthSpec {
    std::int64_t count = 0;
    TaskKind task = TaskKind::Expression;
    std::uint64_t seed = 0;

    Categorical expressions; // expression task
    std::vector<int> au_ids; // AU task
    std::vector<double> au_rates;
    bool au_intensities = false; // emit raw 0..5 intensities instead of 0/1
    std::vector<VaComponent> va_components; // VA task

    Categorical age;    // names parse as age groups
    Categorical gender; // names parse as gender values
    Categorical race;   // names parse as race values

    // Subject-group sizes drawn uniformly from [min,max]. The constant-1
    // distribution means "no subject structure": samples get no subject_id
    // and form singleton groups.
    std::int64_t group_size_min = 1;
    std::int64_t group_size_max = 1;

    // Optional per-expression-category race distribution (index = category);
    // empty means race is drawn independently of the label.
    std::vector<Categorical> race_given_label;

    void validate() const;
};

// Reads a SynthSpec from a flat `key = value` file. Keys: task, count, seed,
// expressions, aus, au_intensities, va_components, age, gender, race,
// group_sizes.
SynthSpec load_synth_spec(const std::filesystem::path& path);

// Deterministic synthetic manifest: attributes sampled independently from the
// spec's marginals (unless race_given_label is set), subjects assigned by
// drawing group sizes and filling them in order.
Manifest generate_manifest(const SynthSpec& spec);

// Exhaustive minimum of the partition objective over all 3^G assignments,
// ties broken by the lexicographically smallest assignment sequence (groups
// in ascending group_id order). Refuses more than 13 groups.
PartitionAssignment oracle_partition(const Strata& strata,
                                     const std::vector<SubjectGroup>& groups,
                                     const PartitionConfig& config);
PartitionAssignment oracle_partition(const Manifest& manifest, const PartitionConfig& config);

// Expression-task fixture with the published category, age, gender, and race
// totals of the AffectNet re-partition (290,580 samples, singleton subjects).
SynthSpec affectnet_expression_spec(std::uint64_t seed = 0);

} // namespace fairsplit
