#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "fairsplit/manifest.hpp"

namespace fairsplit {

inline constexpr int kSetCount = 3;
inline constexpr int kTrain = 0;
inline constexpr int kValid = 1;
inline constexpr int kTest = 2;

const char* set_name(int set); // "train" / "valid" / "test"
std::optional<int> parse_set_name(std::string_view name);

// Balancing dimensions, in the order they enter the objective.
enum class Dimension { Label = 0, Age = 1, Gender = 2, Race = 3 };
inline constexpr int kDimensionCount = 4;
const char* dimension_name(Dimension d);

// Maps a valence/arousal point in [-1,1]² onto the 10×10 grid of 0.2-wide
// cells: index floor((component+1)/0.2), with 1.0 clamped into cell 9. A value
// on an interior cell boundary belongs to the higher cell. Returned as
// (valence cell, arousal cell).
std::pair<int, int> discretize_va_grid(double valence, double arousal);

// One sample's coordinates in the balancing space. `label` is the expression
// category index or the flattened VA cell (valence_cell*10 + arousal_cell);
// for the AU task the label dimension is carried per-AU (see Strata::au_masks)
// and `label` is kNoLabel. The remaining fields are indices into the
// category lists the Strata object holds.
struct StratumKey {
    static constexpr std::uint16_t kNoLabel = 0xFFFF;
    std::uint16_t label = kNoLabel;
    std::uint8_t age = 0;
    std::uint8_t gender = 0;
    std::uint8_t race = 0;

    bool operator==(const StratumKey&) const = default;
};

// Per-sample stratum keys plus the global marginal counts they induce. The
// four balancing dimensions are flattened into one category axis:
// [0, label_count) then age, gender (3), race (5) categories.
struct Strata {
    TaskKind task = TaskKind::Expression;
    std::size_t label_count = 0; // expression categories | 100 VA cells | AU count
    std::vector<AgeGroup> age_categories; // distinct groups present, sorted
    std::vector<std::string> label_names; // per label category, for reporting

    std::vector<StratumKey> keys;          // one per manifest sample
    std::vector<std::uint64_t> au_masks;   // AU task only: activation bitmasks
    std::vector<std::int64_t> global;      // category counts over the manifest
    std::int64_t total_samples = 0;

    std::size_t age_count() const { return age_categories.size(); }
    std::size_t total_categories() const { return label_count + age_count() + 3 + 5; }
    std::size_t dimension_offset(Dimension d) const;
    std::size_t dimension_size(Dimension d) const;
    // Fraction of all samples in each category of dimension d (sums to 1 for
    // every dimension except the per-AU rate dimension).
    std::vector<double> global_marginal(Dimension d) const;
};

// Requires a normalized manifest: binary AUs, valence/arousal in [-1,1].
Strata build_strata(const Manifest& manifest);

// All samples sharing a subject, with cached per-category counts. Samples
// without a subject_id form singleton groups keyed by sample_id.
struct SubjectGroup {
    std::string group_id;
    std::vector<std::uint32_t> members; // indices into manifest.samples
    std::int64_t size = 0;
    // Sparse (flat category index, count) pairs, ascending by index.
    std::vector<std::pair<std::uint32_t, std::int64_t>> counts;
};

// Groups manifest samples by subject, sorted by group_id; cached counts are
// filled from `strata`.
std::vector<SubjectGroup> group_subjects(const Manifest& manifest, const Strata& strata);

struct PartitionConfig {
    std::array<double, kSetCount> fractions{0.55, 0.15, 0.30};
    double w_size = 4.0;
    double w_label = 2.0;
    double w_age = 1.0;
    double w_gender = 1.0;
    double w_race = 1.0;
    std::uint64_t seed = 0;
    std::int64_t move_budget = 100000;
    std::int64_t patience = 10000;
    int restarts = 8;

    double dimension_weight(Dimension d) const;
    // Fractions positive and summing to 1 within 1e-9; weights ≥ 0;
    // move_budget/patience ≥ 0; restarts ≥ 1. Throws ValidationError.
    void validate() const;
};

// Applies `key = value` lines from a flat config file onto `base` and returns
// the result. Recognized keys: fractions (a,b,c), w_size, w_label, w_age,
// w_gender, w_race, seed, move_budget, patience, restarts.
PartitionConfig load_partition_config(const std::filesystem::path& path,
                                      const PartitionConfig& base = {});
// Applies a comma-separated "name=value,..." weight list (names: size, label,
// age, gender, race) onto config. Throws ValidationError on unknown names.
void apply_weight_list(PartitionConfig& config, const std::string& list);
// Parses "a,b,c" into target fractions. Throws ValidationError.
std::array<double, kSetCount> parse_fraction_list(const std::string& list);

struct PartitionAssignment {
    // Aligned arrays: group_ids[i] is assigned to sets[i]. Groups appear in
    // ascending group_id order.
    std::vector<std::string> group_ids;
    std::vector<std::uint8_t> sets;

    std::array<double, kSetCount> achieved_fractions{};
    std::array<std::int64_t, kSetCount> set_sizes{};
    // l1_gaps[set][dimension]: Σ_c |p_set(c) − p_global(c)| per dimension
    // (mean absolute rate gap for the AU label dimension).
    std::array<std::array<double, kDimensionCount>, kSetCount> l1_gaps{};
    double objective_value = 0.0;

    PartitionConfig config;         // echo of the solver configuration
    std::vector<std::string> warnings;
    int winning_restart = -1;
    std::uint64_t winning_seed = 0;
    // Best-so-far objective values of the winning restart's local search,
    // starting from the seeded value; strictly decreasing after the first.
    std::vector<double> objective_trace;
    std::int64_t evaluated_moves = 0;

    int set_of(std::string_view group_id) const; // -1 when absent
};

// J = Σ_set [ w_size·|frac(set) − target(set)| + Σ_d w_d·gap_d(set) ] where
// gap_d is the L1 distance between the set's marginal and the global marginal
// (mean per-AU absolute rate difference for the AU label dimension); an empty
// set contributes a gap of 1.0 for every dimension.
double objective(const PartitionAssignment& assignment, const Strata& strata,
                 const std::vector<SubjectGroup>& groups, const PartitionConfig& config);

// Incremental state for evaluating J over a mutable assignment. Evaluation
// always recomputes from integer count arrays in a fixed order, so a given
// assignment yields bit-identical J regardless of the move history.
class ObjectiveEvaluator {
public:
    ObjectiveEvaluator(const Strata& strata, const PartitionConfig& config);

    void reset();
    void add(const SubjectGroup& group, int set) { apply(group, set, +1); }
    void remove(const SubjectGroup& group, int set) { apply(group, set, -1); }
    double evaluate() const;

    struct Detail {
        double objective = 0.0;
        std::array<double, kSetCount> fractions{};
        std::array<std::int64_t, kSetCount> sizes{};
        std::array<std::array<double, kDimensionCount>, kSetCount> gaps{};
    };
    Detail detail() const;

private:
    void apply(const SubjectGroup& group, int set, std::int64_t sign);
    double dimension_gap(int set, Dimension d) const;

    const Strata& strata_;
    const PartitionConfig& config_;
    std::array<std::vector<std::int64_t>, kSetCount> counts_;
    std::array<std::int64_t, kSetCount> sizes_{};
};

// Deterministic partition solver: proportional deficit seeding (restart 0)
// or random initialization (later restarts), followed by strict-improvement
// local search over single-group reassignments and group-pair swaps
// (exhaustive sweeps on small instances, randomized proposals on large
// ones). Restarts run under independent seeds derived from config.seed; the
// winner is the restart with the lexicographically smallest (objective,
// seed), so the result does not depend on thread scheduling.
PartitionAssignment solve_partition(const Manifest& manifest, const PartitionConfig& config);

// Writes split.csv (`sample_id,set`, manifest order), statistics.csv
// (`set,dimension,category,count`), and run_meta.json into out_dir.
// Re-emitting the same assignment produces byte-identical files.
struct SplitFiles {
    std::filesystem::path split_csv;
    std::filesystem::path statistics_csv;
    std::filesystem::path run_meta_json;
};
SplitFiles emit_split(const PartitionAssignment& assignment, const Manifest& manifest,
                      const std::filesystem::path& out_dir);

// Reads a split.csv back into sample_id → set.
std::vector<std::pair<std::string, int>> load_split(const std::filesystem::path& path);

} // namespace fairsplit
