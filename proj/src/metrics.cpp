#include "fairsplit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "fairsplit/errors.hpp"

namespace fairsplit {

const char* attribute_name(Attribute attribute) {
    switch (attribute) {
        case Attribute::Age: return "age";
        case Attribute::Gender: return "gender";
        case Attribute::Race: return "race";
    }
    throw DomainError("invalid attribute");
}

SubgroupIndex subgroup_index(const JoinedEvaluationSet& joined, Attribute attribute) {
    SubgroupIndex out;
    out.attribute = attribute_name(attribute);
    out.ids.assign(joined.size(), -1);
    switch (attribute) {
        case Attribute::Age: {
            std::set<AgeGroup> seen;
            for (AgeGroup group : joined.age) {
                if (group.known()) seen.insert(group);
            }
            std::vector<AgeGroup> categories(seen.begin(), seen.end());
            for (AgeGroup group : categories) out.names.push_back(age_group_name(group));
            out.sizes.assign(categories.size(), 0);
            for (std::size_t i = 0; i < joined.size(); ++i) {
                if (!joined.age[i].known()) continue;
                auto it = std::lower_bound(categories.begin(), categories.end(), joined.age[i]);
                out.ids[i] = static_cast<int>(it - categories.begin());
                out.sizes[static_cast<std::size_t>(out.ids[i])] += 1;
            }
            break;
        }
        case Attribute::Gender: {
            out.names = {gender_name(Gender::Male), gender_name(Gender::Female)};
            out.sizes.assign(out.names.size(), 0);
            for (std::size_t i = 0; i < joined.size(); ++i) {
                if (joined.gender[i] == Gender::OtherUncertain) continue;
                out.ids[i] = static_cast<int>(joined.gender[i]);
                out.sizes[static_cast<std::size_t>(out.ids[i])] += 1;
            }
            break;
        }
        case Attribute::Race: {
            out.names = {race_name(Race::Asian), race_name(Race::Black), race_name(Race::Indian),
                         race_name(Race::White)};
            out.sizes.assign(out.names.size(), 0);
            for (std::size_t i = 0; i < joined.size(); ++i) {
                if (joined.race[i] == Race::Unlabeled) continue;
                out.ids[i] = static_cast<int>(joined.race[i]);
                out.sizes[static_cast<std::size_t>(out.ids[i])] += 1;
            }
            break;
        }
    }
    return out;
}

namespace {

void check_index(const SubgroupIndex& index, std::size_t sample_count) {
    if (index.ids.size() != sample_count) {
        throw ValidationError("subgroup index covers " + std::to_string(index.ids.size()) +
                              " samples, expected " + std::to_string(sample_count));
    }
}

// Subgroups with at least `min_size` samples keep their position; the rest go
// to `excluded`. Returns old-subgroup → compacted-row mapping (-1 dropped).
std::vector<int> compact_subgroups(const SubgroupIndex& index, std::int64_t min_size,
                                   std::vector<std::string>& names,
                                   std::vector<std::int64_t>& sizes,
                                   std::vector<std::string>& excluded) {
    std::vector<int> row(index.names.size(), -1);
    int next = 0;
    for (std::size_t s = 0; s < index.names.size(); ++s) {
        if (index.sizes[s] >= min_size && index.sizes[s] > 0) {
            row[s] = next++;
            names.push_back(index.names[s]);
            sizes.push_back(index.sizes[s]);
        } else {
            excluded.push_back(index.names[s]);
        }
    }
    return row;
}

} // namespace

SubgroupClassRates class_prediction_rates(const std::vector<int>& predictions,
                                          std::size_t category_count,
                                          const SubgroupIndex& index) {
    check_index(index, predictions.size());
    SubgroupClassRates out;
    out.attribute = index.attribute;
    out.category_count = category_count;
    const std::vector<int> row =
        compact_subgroups(index, 1, out.subgroup_names, out.sizes, out.excluded);
    out.rates.assign(out.subgroup_names.size(), std::vector<double>(category_count, 0.0));
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const int subgroup = index.ids[i];
        if (subgroup < 0 || row[static_cast<std::size_t>(subgroup)] < 0) continue;
        const int prediction = predictions[i];
        if (prediction < 0 || static_cast<std::size_t>(prediction) >= category_count) {
            throw ValidationError("prediction index " + std::to_string(prediction) +
                                  " outside the " + std::to_string(category_count) +
                                  "-category vocabulary");
        }
        out.rates[static_cast<std::size_t>(row[static_cast<std::size_t>(subgroup)])]
                 [static_cast<std::size_t>(prediction)] += 1.0;
    }
    for (std::size_t s = 0; s < out.rates.size(); ++s) {
        for (double& rate : out.rates[s]) rate /= static_cast<double>(out.sizes[s]);
    }
    return out;
}

SubgroupActivationRates activation_prediction_rates(const std::vector<std::uint8_t>& predictions,
                                                    std::size_t au_count,
                                                    const SubgroupIndex& index) {
    if (au_count == 0) throw ValidationError("activation rates need at least one action unit");
    if (predictions.size() % au_count != 0) {
        throw ValidationError("activation matrix size " + std::to_string(predictions.size()) +
                              " is not a multiple of the AU count " + std::to_string(au_count));
    }
    check_index(index, predictions.size() / au_count);
    SubgroupActivationRates out;
    out.attribute = index.attribute;
    out.au_count = au_count;
    const std::vector<int> row =
        compact_subgroups(index, 1, out.subgroup_names, out.sizes, out.excluded);
    out.rates.assign(out.subgroup_names.size(), std::vector<double>(au_count, 0.0));
    const std::size_t sample_count = predictions.size() / au_count;
    for (std::size_t i = 0; i < sample_count; ++i) {
        const int subgroup = index.ids[i];
        if (subgroup < 0 || row[static_cast<std::size_t>(subgroup)] < 0) continue;
        auto& rates = out.rates[static_cast<std::size_t>(row[static_cast<std::size_t>(subgroup)])];
        for (std::size_t a = 0; a < au_count; ++a) {
            if (predictions[i * au_count + a]) rates[a] += 1.0;
        }
    }
    for (std::size_t s = 0; s < out.rates.size(); ++s) {
        for (double& rate : out.rates[s]) rate /= static_cast<double>(out.sizes[s]);
    }
    return out;
}

double f1_macro(const std::vector<int>& truths, const std::vector<int>& predictions,
                std::size_t category_count) {
    if (truths.empty()) throw UndefinedMetricError("macro F1 of an empty evaluation set");
    if (truths.size() != predictions.size()) {
        throw ValidationError("macro F1 needs equally many truths and predictions");
    }
    if (category_count == 0) throw ValidationError("macro F1 needs at least one category");
    std::vector<std::int64_t> tp(category_count, 0);
    std::vector<std::int64_t> fp(category_count, 0);
    std::vector<std::int64_t> fn(category_count, 0);
    for (std::size_t i = 0; i < truths.size(); ++i) {
        const int truth = truths[i];
        const int prediction = predictions[i];
        if (truth < 0 || static_cast<std::size_t>(truth) >= category_count || prediction < 0 ||
            static_cast<std::size_t>(prediction) >= category_count) {
            throw ValidationError("category index outside the " +
                                  std::to_string(category_count) + "-category vocabulary");
        }
        if (truth == prediction) {
            tp[static_cast<std::size_t>(truth)] += 1;
        } else {
            fn[static_cast<std::size_t>(truth)] += 1;
            fp[static_cast<std::size_t>(prediction)] += 1;
        }
    }
    double sum = 0.0;
    std::size_t included = 0;
    for (std::size_t c = 0; c < category_count; ++c) {
        const std::int64_t denominator = 2 * tp[c] + fp[c] + fn[c];
        if (denominator == 0) continue; // absent from truths and predictions
        sum += 2.0 * static_cast<double>(tp[c]) / static_cast<double>(denominator);
        ++included;
    }
    if (included == 0) throw UndefinedMetricError("no category present in truths or predictions");
    return sum / static_cast<double>(included);
}

double f1_binary_multilabel(const std::vector<std::uint8_t>& truths,
                            const std::vector<std::uint8_t>& predictions, std::size_t au_count) {
    if (truths.empty()) throw UndefinedMetricError("multilabel F1 of an empty evaluation set");
    if (truths.size() != predictions.size()) {
        throw ValidationError("multilabel F1 needs equally many truths and predictions");
    }
    if (au_count == 0 || truths.size() % au_count != 0) {
        throw ValidationError("activation matrix size " + std::to_string(truths.size()) +
                              " is not a multiple of the AU count " + std::to_string(au_count));
    }
    const std::size_t sample_count = truths.size() / au_count;
    double sum = 0.0;
    std::size_t included = 0;
    for (std::size_t a = 0; a < au_count; ++a) {
        std::int64_t tp = 0;
        std::int64_t fp = 0;
        std::int64_t fn = 0;
        for (std::size_t i = 0; i < sample_count; ++i) {
            const bool truth = truths[i * au_count + a] != 0;
            const bool prediction = predictions[i * au_count + a] != 0;
            if (truth && prediction) {
                ++tp;
            } else if (prediction) {
                ++fp;
            } else if (truth) {
                ++fn;
            }
        }
        const std::int64_t denominator = 2 * tp + fp + fn;
        if (denominator == 0) continue; // AU never positive in truths or predictions
        sum += 2.0 * static_cast<double>(tp) / static_cast<double>(denominator);
        ++included;
    }
    if (included == 0) {
        throw UndefinedMetricError("no AU is positive in either truths or predictions");
    }
    return sum / static_cast<double>(included);
}

double statistical_parity(const SubgroupClassRates& rates) {
    const std::size_t n = rates.subgroup_count();
    if (n < 2) {
        throw UndefinedMetricError("statistical parity needs at least two subgroups, " +
                                   rates.attribute + " has " + std::to_string(n));
    }
    double sum = 0.0;
    for (std::size_t c = 0; c < rates.category_count; ++c) {
        for (std::size_t i = 0; i + 1 < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                sum += std::fabs(rates.rates[i][c] - rates.rates[j][c]);
            }
        }
    }
    return 2.0 / (static_cast<double>(n) * static_cast<double>(n - 1)) * sum;
}

double demographic_parity_difference(const SubgroupActivationRates& rates) {
    const std::size_t n = rates.subgroup_count();
    if (n < 2) {
        throw UndefinedMetricError("demographic parity difference needs at least two subgroups, " +
                                   rates.attribute + " has " + std::to_string(n));
    }
    if (rates.au_count == 0) {
        throw UndefinedMetricError("demographic parity difference needs at least one AU");
    }
    double sum = 0.0;
    for (std::size_t a = 0; a < rates.au_count; ++a) {
        double lo = rates.rates[0][a];
        double hi = rates.rates[0][a];
        for (std::size_t s = 1; s < n; ++s) {
            lo = std::min(lo, rates.rates[s][a]);
            hi = std::max(hi, rates.rates[s][a]);
        }
        sum += hi - lo;
    }
    return sum / static_cast<double>(rates.au_count);
}

MomentSummary moments(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) {
        throw ValidationError("moment inputs must have equal lengths");
    }
    MomentSummary out;
    out.count = static_cast<std::int64_t>(x.size());
    if (x.empty()) return out;
    const double n = static_cast<double>(x.size());
    double sum_x = 0.0;
    double sum_y = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sum_x += x[i];
        sum_y += y[i];
    }
    out.mean_x = sum_x / n;
    out.mean_y = sum_y / n;
    double ss_x = 0.0;
    double ss_y = 0.0;
    double ss_xy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - out.mean_x;
        const double dy = y[i] - out.mean_y;
        ss_x += dx * dx;
        ss_y += dy * dy;
        ss_xy += dx * dy;
    }
    out.var_x = ss_x / n;
    out.var_y = ss_y / n;
    out.covariance = ss_xy / n;
    return out;
}

double ccc(const std::vector<double>& annotations, const std::vector<double>& predictions) {
    if (annotations.size() != predictions.size()) {
        throw ValidationError("concordance needs equally many annotations and predictions");
    }
    if (annotations.size() < 2) {
        throw UndefinedMetricError("concordance needs at least two pairs, got " +
                                   std::to_string(annotations.size()));
    }
    const MomentSummary m = moments(annotations, predictions);
    const double mean_gap = m.mean_x - m.mean_y;
    const double denominator = m.var_x + m.var_y + mean_gap * mean_gap;
    if (denominator == 0.0) return 1.0; // both sequences constant and equal
    return 2.0 * m.covariance / denominator;
}

double mean_va_ccc(const JoinedEvaluationSet& joined) {
    if (joined.task != TaskKind::ValenceArousal) {
        throw ValidationError("mean valence/arousal concordance requires the va task");
    }
    const double ccc_v = ccc(joined.truth_valence, joined.pred_valence);
    const double ccc_a = ccc(joined.truth_arousal, joined.pred_arousal);
    return 0.5 * (ccc_v + ccc_a);
}

SubgroupCccTable subgroup_ccc_table(const JoinedEvaluationSet& joined,
                                    const SubgroupIndex& index) {
    if (joined.task != TaskKind::ValenceArousal) {
        throw ValidationError("subgroup concordance requires the va task");
    }
    check_index(index, joined.size());
    SubgroupCccTable out;
    out.attribute = index.attribute;
    const std::vector<int> row =
        compact_subgroups(index, 2, out.subgroup_names, out.sizes, out.excluded);
    const std::size_t rows = out.subgroup_names.size();
    std::vector<std::vector<double>> tv(rows), ta(rows), pv(rows), pa(rows);
    for (std::size_t i = 0; i < joined.size(); ++i) {
        const int subgroup = index.ids[i];
        if (subgroup < 0) continue;
        const int r = row[static_cast<std::size_t>(subgroup)];
        if (r < 0) continue;
        tv[static_cast<std::size_t>(r)].push_back(joined.truth_valence[i]);
        ta[static_cast<std::size_t>(r)].push_back(joined.truth_arousal[i]);
        pv[static_cast<std::size_t>(r)].push_back(joined.pred_valence[i]);
        pa[static_cast<std::size_t>(r)].push_back(joined.pred_arousal[i]);
    }
    for (std::size_t r = 0; r < rows; ++r) {
        out.ccc_valence.push_back(ccc(tv[r], pv[r]));
        out.ccc_arousal.push_back(ccc(ta[r], pa[r]));
    }
    return out;
}

double average_ccc_subgroups(const SubgroupCccTable& table) {
    const std::size_t n = table.subgroup_count();
    if (n == 0) {
        throw UndefinedMetricError("no subgroup of " + table.attribute +
                                   " has enough samples for concordance");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sum += table.ccc_valence[i] + table.ccc_arousal[i];
    }
    return sum / (2.0 * static_cast<double>(n));
}

SubgroupScores subgroup_f1(const JoinedEvaluationSet& joined, const SubgroupIndex& index) {
    if (joined.task == TaskKind::ValenceArousal) {
        throw ValidationError("subgroup F1 requires a classification or AU task");
    }
    check_index(index, joined.size());
    SubgroupScores out;
    out.attribute = index.attribute;
    const std::vector<int> row =
        compact_subgroups(index, 1, out.subgroup_names, out.sizes, out.excluded);
    const std::size_t rows = out.subgroup_names.size();
    if (rows == 0) {
        throw UndefinedMetricError("no labeled subgroup of " + index.attribute +
                                   " in the evaluation set");
    }
    std::vector<std::vector<int>> truths(rows), preds(rows);
    std::vector<std::vector<std::uint8_t>> au_truths(rows), au_preds(rows);
    for (std::size_t i = 0; i < joined.size(); ++i) {
        const int subgroup = index.ids[i];
        if (subgroup < 0) continue;
        const int r = row[static_cast<std::size_t>(subgroup)];
        if (r < 0) continue;
        const auto ri = static_cast<std::size_t>(r);
        if (joined.task == TaskKind::Expression) {
            truths[ri].push_back(joined.truth_expression[i]);
            preds[ri].push_back(joined.pred_expression[i]);
        } else {
            const std::size_t base = i * joined.au_count;
            for (std::size_t a = 0; a < joined.au_count; ++a) {
                au_truths[ri].push_back(joined.truth_aus[base + a]);
                au_preds[ri].push_back(joined.pred_aus[base + a]);
            }
        }
    }
    std::vector<std::string> scored_names;
    std::vector<std::int64_t> scored_sizes;
    double sum = 0.0;
    double weighted_sum = 0.0;
    std::int64_t weight_total = 0;
    for (std::size_t r = 0; r < rows; ++r) {
        double value = 0.0;
        try {
            value = joined.task == TaskKind::Expression
                        ? f1_macro(truths[r], preds[r], joined.category_count)
                        : f1_binary_multilabel(au_truths[r], au_preds[r], joined.au_count);
        } catch (const UndefinedMetricError&) {
            // e.g. an AU-task subgroup where no AU is positive anywhere
            out.excluded.push_back(out.subgroup_names[r]);
            continue;
        }
        scored_names.push_back(out.subgroup_names[r]);
        scored_sizes.push_back(out.sizes[r]);
        out.values.push_back(value);
        sum += value;
        weighted_sum += value * static_cast<double>(out.sizes[r]);
        weight_total += out.sizes[r];
    }
    if (out.values.empty()) {
        throw UndefinedMetricError("no subgroup of " + index.attribute +
                                   " carries a defined F1 score");
    }
    out.subgroup_names = std::move(scored_names);
    out.sizes = std::move(scored_sizes);
    out.unweighted_mean = sum / static_cast<double>(out.values.size());
    out.weighted_mean = weighted_sum / static_cast<double>(weight_total);
    return out;
}

} // namespace fairsplit
