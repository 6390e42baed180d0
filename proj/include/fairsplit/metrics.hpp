#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fairsplit/manifest.hpp"

namespace fairsplit {

enum class Attribute { Age = 0, Gender = 1, Race = 2 };
inline constexpr int kAttributeCount = 3;
const char* attribute_name(Attribute attribute);

// Subgroup membership over one demographic attribute: a per-sample subgroup
// id, with -1 marking samples excluded from subgroup statistics (unknown age,
// other/uncertain gender, unlabeled race).
struct SubgroupIndex {
    std::string attribute;
    std::vector<std::string> names;  // candidate subgroups
    std::vector<int> ids;            // per joined sample; -1 = excluded
    std::vector<std::int64_t> sizes; // per candidate subgroup (zeros possible)
};

SubgroupIndex subgroup_index(const JoinedEvaluationSet& joined, Attribute attribute);

// Empirical per-subgroup prediction rates p(ŷ=c | s_i) over one attribute.
// Zero-sample subgroups are dropped from the table and listed in `excluded`.
struct SubgroupClassRates {
    std::string attribute;
    std::vector<std::string> subgroup_names;
    std::vector<std::int64_t> sizes;
    std::size_t category_count = 0;          // k
    std::vector<std::vector<double>> rates;  // [subgroup][category]
    std::vector<std::string> excluded;

    std::size_t subgroup_count() const { return subgroup_names.size(); } // n
};

SubgroupClassRates class_prediction_rates(const std::vector<int>& predictions,
                                          std::size_t category_count,
                                          const SubgroupIndex& index);

// Per-subgroup activation rates p_c(ŷ=1 | s_i), one per AU.
struct SubgroupActivationRates {
    std::string attribute;
    std::vector<std::string> subgroup_names;
    std::vector<std::int64_t> sizes;
    std::size_t au_count = 0;                // k
    std::vector<std::vector<double>> rates;  // [subgroup][au]
    std::vector<std::string> excluded;

    std::size_t subgroup_count() const { return subgroup_names.size(); } // n
};

SubgroupActivationRates activation_prediction_rates(const std::vector<std::uint8_t>& predictions,
                                                    std::size_t au_count,
                                                    const SubgroupIndex& index);

// Unweighted mean over categories of the per-category F1 (2TP/(2TP+FP+FN)).
// Categories absent from both truths and predictions are excluded from the
// mean; categories with truth but no correct prediction score 0.
double f1_macro(const std::vector<int>& truths, const std::vector<int>& predictions,
                std::size_t category_count);

// Mean over AUs of the positive-class binary F1, on flattened sample-major
// activation matrices of width au_count. AUs never positive in either truths
// or predictions are excluded from the mean.
double f1_binary_multilabel(const std::vector<std::uint8_t>& truths,
                            const std::vector<std::uint8_t>& predictions, std::size_t au_count);

// SP = [2/(n(n−1))] · Σ_c Σ_{i<j} |p(ŷ=c|s_i) − p(ŷ=c|s_j)| over the included
// subgroups. Undefined for fewer than two subgroups.
double statistical_parity(const SubgroupClassRates& rates);

// DPD = (1/k) · Σ_c [max_i p_c(ŷ=1|s_i) − min_i p_c(ŷ=1|s_i)]. Undefined for
// fewer than two subgroups.
double demographic_parity_difference(const SubgroupActivationRates& rates);

// Population (1/N) moments of two aligned sequences.
struct MomentSummary {
    double mean_x = 0.0;
    double mean_y = 0.0;
    double var_x = 0.0;
    double var_y = 0.0;
    double covariance = 0.0;
    std::int64_t count = 0;
};

MomentSummary moments(const std::vector<double>& x, const std::vector<double>& y);

// Concordance correlation 2·s_xy / (s_x² + s_y² + (x̄−ȳ)²) with population
// moments; an exactly zero denominator (both sequences constant and equal)
// yields 1.0. Undefined for fewer than two pairs.
double ccc(const std::vector<double>& annotations, const std::vector<double>& predictions);

// (CCC_valence + CCC_arousal)/2 over the full joined set.
double mean_va_ccc(const JoinedEvaluationSet& joined);

// Per-subgroup valence/arousal CCCs. Subgroups with fewer than two samples
// cannot carry a CCC and are listed in `excluded`.
struct SubgroupCccTable {
    std::string attribute;
    std::vector<std::string> subgroup_names;
    std::vector<std::int64_t> sizes;
    std::vector<double> ccc_valence;
    std::vector<double> ccc_arousal;
    std::vector<std::string> excluded;

    std::size_t subgroup_count() const { return subgroup_names.size(); } // n
};

SubgroupCccTable subgroup_ccc_table(const JoinedEvaluationSet& joined,
                                    const SubgroupIndex& index);

// (1/2n) · Σ_i (CCC_valence^(i) + CCC_arousal^(i)) over the table's subgroups.
// Undefined when the table is empty.
double average_ccc_subgroups(const SubgroupCccTable& table);

// Per-subgroup task F1 (macro F1 for expressions, binary multilabel F1 for
// AUs) plus the unweighted and sample-weighted means over subgroups with at
// least one sample.
struct SubgroupScores {
    std::string attribute;
    std::vector<std::string> subgroup_names;
    std::vector<std::int64_t> sizes;
    std::vector<double> values;
    std::vector<std::string> excluded;
    double unweighted_mean = 0.0;
    double weighted_mean = 0.0;
};

SubgroupScores subgroup_f1(const JoinedEvaluationSet& joined, const SubgroupIndex& index);

} // namespace fairsplit
