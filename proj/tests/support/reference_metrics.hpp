#pragma once

// Independent reference implementations of every evaluation metric, written
// as naive loops straight from the definitions. They deliberately share no
// code with the library (different structure, different moment formulation)
// so that agreement between the two is meaningful evidence of correctness.
// Undefined cases throw std::runtime_error.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace refmetrics {

// Mean over categories of 2TP/(2TP+FP+FN); categories with no true and no
// predicted sample are left out of the mean.
inline double f1_macro(const std::vector<int>& truth, const std::vector<int>& pred,
                       int categories) {
    if (truth.empty() || truth.size() != pred.size())
        throw std::runtime_error("reference f1_macro: bad input");
    double sum = 0.0;
    int used = 0;
    for (int c = 0; c < categories; ++c) {
        long tp = 0, fp = 0, fn = 0;
        for (std::size_t i = 0; i < truth.size(); ++i) {
            const bool t = truth[i] == c;
            const bool p = pred[i] == c;
            if (t && p) ++tp;
            if (!t && p) ++fp;
            if (t && !p) ++fn;
        }
        if (tp + fp + fn == 0) continue;
        sum += (2.0 * static_cast<double>(tp)) / static_cast<double>(2 * tp + fp + fn);
        ++used;
    }
    if (used == 0) throw std::runtime_error("reference f1_macro: no scorable category");
    return sum / used;
}

// Mean over AU columns of the positive-class binary F1; columns that are all
// zero in both matrices are left out. Rows are per-sample activation vectors.
inline double f1_binary_multilabel(const std::vector<std::vector<int>>& truth,
                                   const std::vector<std::vector<int>>& pred) {
    if (truth.empty() || truth.size() != pred.size())
        throw std::runtime_error("reference f1_binary_multilabel: bad input");
    const std::size_t aus = truth.front().size();
    double sum = 0.0;
    std::size_t used = 0;
    for (std::size_t c = 0; c < aus; ++c) {
        long tp = 0, fp = 0, fn = 0;
        for (std::size_t i = 0; i < truth.size(); ++i) {
            if (truth[i].size() != aus || pred[i].size() != aus)
                throw std::runtime_error("reference f1_binary_multilabel: ragged input");
            const bool t = truth[i][c] != 0;
            const bool p = pred[i][c] != 0;
            if (t && p) ++tp;
            if (!t && p) ++fp;
            if (t && !p) ++fn;
        }
        if (tp + fp + fn == 0) continue;
        sum += (2.0 * static_cast<double>(tp)) / static_cast<double>(2 * tp + fp + fn);
        ++used;
    }
    if (used == 0) throw std::runtime_error("reference f1_binary_multilabel: no scorable AU");
    return sum / static_cast<double>(used);
}

// Concordance via the expanded (non-central) moment form:
//   ccc = 2(E[xy] - E[x]E[y]) / (E[x²]-E[x]² + E[y²]-E[y]² + (E[x]-E[y])²)
// with the 0/0 → 1 convention for identical constant sequences.
inline double ccc(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw std::runtime_error("reference ccc: bad input");
    const double n = static_cast<double>(x.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        syy += y[i] * y[i];
        sxy += x[i] * y[i];
    }
    const double mx = sx / n, my = sy / n;
    const double vx = sxx / n - mx * mx;
    const double vy = syy / n - my * my;
    const double cov = sxy / n - mx * my;
    const double denominator = vx + vy + (mx - my) * (mx - my);
    if (denominator == 0.0) return 1.0;
    return 2.0 * cov / denominator;
}

// Per-subgroup class prediction rates from raw per-sample subgroup ids
// (negative = excluded) and predicted categories. Empty subgroups are dropped.
inline std::vector<std::vector<double>> class_rates(const std::vector<int>& subgroup_ids,
                                                    const std::vector<int>& predictions,
                                                    int subgroups, int categories) {
    std::vector<std::vector<double>> rates;
    for (int s = 0; s < subgroups; ++s) {
        long members = 0;
        std::vector<long> counts(static_cast<std::size_t>(categories), 0);
        for (std::size_t i = 0; i < subgroup_ids.size(); ++i) {
            if (subgroup_ids[i] != s) continue;
            ++members;
            ++counts[static_cast<std::size_t>(predictions[i])];
        }
        if (members == 0) continue;
        std::vector<double> row;
        for (long count : counts)
            row.push_back(static_cast<double>(count) / static_cast<double>(members));
        rates.push_back(row);
    }
    return rates;
}

// SP = [2/(n(n-1))] Σ_c Σ_{i<j} |p(ŷ=c|s_i) − p(ŷ=c|s_j)| over a rate table.
inline double statistical_parity(const std::vector<std::vector<double>>& rates) {
    const std::size_t n = rates.size();
    if (n < 2) throw std::runtime_error("reference statistical_parity: fewer than two subgroups");
    const std::size_t categories = rates.front().size();
    double total = 0.0;
    for (std::size_t c = 0; c < categories; ++c)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                total += std::fabs(rates[i][c] - rates[j][c]);
    return total * 2.0 / (static_cast<double>(n) * static_cast<double>(n - 1));
}

// Per-subgroup per-AU activation rates from per-sample activation rows.
inline std::vector<std::vector<double>> activation_rates(
    const std::vector<int>& subgroup_ids, const std::vector<std::vector<int>>& activations,
    int subgroups) {
    std::vector<std::vector<double>> rates;
    const std::size_t aus = activations.empty() ? 0 : activations.front().size();
    for (int s = 0; s < subgroups; ++s) {
        long members = 0;
        std::vector<long> counts(aus, 0);
        for (std::size_t i = 0; i < subgroup_ids.size(); ++i) {
            if (subgroup_ids[i] != s) continue;
            ++members;
            for (std::size_t c = 0; c < aus; ++c)
                if (activations[i][c] != 0) ++counts[c];
        }
        if (members == 0) continue;
        std::vector<double> row;
        for (long count : counts)
            row.push_back(static_cast<double>(count) / static_cast<double>(members));
        rates.push_back(row);
    }
    return rates;
}

// DPD = (1/k) Σ_c [max_i p_c(ŷ=1|s_i) − min_i p_c(ŷ=1|s_i)].
inline double demographic_parity_difference(const std::vector<std::vector<double>>& rates) {
    const std::size_t n = rates.size();
    if (n < 2)
        throw std::runtime_error("reference demographic_parity_difference: fewer than two subgroups");
    const std::size_t aus = rates.front().size();
    if (aus == 0) throw std::runtime_error("reference demographic_parity_difference: no AUs");
    double total = 0.0;
    for (std::size_t c = 0; c < aus; ++c) {
        double lo = rates[0][c], hi = rates[0][c];
        for (std::size_t i = 1; i < n; ++i) {
            if (rates[i][c] < lo) lo = rates[i][c];
            if (rates[i][c] > hi) hi = rates[i][c];
        }
        total += hi - lo;
    }
    return total / static_cast<double>(aus);
}

// Average CCC across subgroups with at least two samples:
// (1/2n) Σ_i (ccc_valence(i) + ccc_arousal(i)). Smaller subgroups are skipped.
inline double average_ccc(const std::vector<int>& subgroup_ids, int subgroups,
                          const std::vector<double>& truth_valence,
                          const std::vector<double>& pred_valence,
                          const std::vector<double>& truth_arousal,
                          const std::vector<double>& pred_arousal) {
    double total = 0.0;
    int used = 0;
    for (int s = 0; s < subgroups; ++s) {
        std::vector<double> tv, pv, ta, pa;
        for (std::size_t i = 0; i < subgroup_ids.size(); ++i) {
            if (subgroup_ids[i] != s) continue;
            tv.push_back(truth_valence[i]);
            pv.push_back(pred_valence[i]);
            ta.push_back(truth_arousal[i]);
            pa.push_back(pred_arousal[i]);
        }
        if (tv.size() < 2) continue;
        total += ccc(tv, pv) + ccc(ta, pa);
        ++used;
    }
    if (used == 0) throw std::runtime_error("reference average_ccc: no eligible subgroup");
    return total / (2.0 * static_cast<double>(used));
}

} // namespace refmetrics
