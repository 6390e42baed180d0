#include "fairsplit/partition.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <thread>

#include "json.hpp"

#include "fairsplit/csv.hpp"
#include "fairsplit/errors.hpp"
#include "fairsplit/rng.hpp"
#include "fairsplit/threads.hpp"
#include "fairsplit/version.hpp"

namespace fairsplit {

const char* set_name(int set) {
    switch (set) {
        case kTrain: return "train";
        case kValid: return "valid";
        case kTest: return "test";
        default: throw DomainError("invalid set index " + std::to_string(set));
    }
}

std::optional<int> parse_set_name(std::string_view name) {
    std::string t = csv::to_lower(csv::trim(name));
    if (t == "train") return kTrain;
    if (t == "valid" || t == "validation" || t == "val") return kValid;
    if (t == "test") return kTest;
    return std::nullopt;
}

const char* dimension_name(Dimension d) {
    switch (d) {
        case Dimension::Label: return "label";
        case Dimension::Age: return "age";
        case Dimension::Gender: return "gender";
        case Dimension::Race: return "race";
    }
    throw DomainError("invalid dimension");
}

namespace {

int va_cell_index(double component) {
    if (!(component >= -1.0 && component <= 1.0)) {
        throw DomainError("valence/arousal component " + csv::format_double(component) +
                          " outside [-1,1]");
    }
    // floor((v+1)/0.2) computed as floor(5v+5): for v a representable multiple
    // of 0.2 the product 5v rounds to an exact integer, so boundary values
    // land in the higher cell rather than drifting across it.
    int cell = static_cast<int>(std::floor(component * 5.0 + 5.0));
    if (cell > 9) cell = 9; // component == 1.0
    if (cell < 0) cell = 0;
    return cell;
}

} // namespace

std::pair<int, int> discretize_va_grid(double valence, double arousal) {
    return {va_cell_index(valence), va_cell_index(arousal)};
}

std::size_t Strata::dimension_offset(Dimension d) const {
    switch (d) {
        case Dimension::Label: return 0;
        case Dimension::Age: return label_count;
        case Dimension::Gender: return label_count + age_count();
        case Dimension::Race: return label_count + age_count() + kGenderCount;
    }
    throw DomainError("invalid dimension");
}

std::size_t Strata::dimension_size(Dimension d) const {
    switch (d) {
        case Dimension::Label: return label_count;
        case Dimension::Age: return age_count();
        case Dimension::Gender: return kGenderCount;
        case Dimension::Race: return kRaceCount;
    }
    throw DomainError("invalid dimension");
}

std::vector<double> Strata::global_marginal(Dimension d) const {
    std::vector<double> out(dimension_size(d), 0.0);
    if (total_samples == 0) return out;
    const std::size_t offset = dimension_offset(d);
    for (std::size_t c = 0; c < out.size(); ++c) {
        out[c] = static_cast<double>(global[offset + c]) / static_cast<double>(total_samples);
    }
    return out;
}

Strata build_strata(const Manifest& manifest) {
    const ManifestSchema& schema = manifest.schema;
    Strata out;
    out.task = schema.task;

    switch (schema.task) {
        case TaskKind::Expression:
            out.label_count = schema.expressions.size();
            out.label_names = schema.expressions;
            break;
        case TaskKind::ActionUnits:
            if (!manifest.au_binarized) {
                throw ValidationError(
                    "manifest AU intensities must be binarized before stratification");
            }
            if (schema.au_ids.size() > 64) {
                throw GuardError("stratification supports at most 64 action units, got " +
                                 std::to_string(schema.au_ids.size()));
            }
            out.label_count = schema.au_ids.size();
            for (int id : schema.au_ids) out.label_names.push_back("au_" + std::to_string(id));
            break;
        case TaskKind::ValenceArousal:
            if (schema.va_range != std::pair<double, double>{-1.0, 1.0}) {
                throw ValidationError(
                    "manifest valence/arousal must be scaled to [-1,1] before stratification");
            }
            out.label_count = 100;
            for (int v = 0; v < 10; ++v) {
                for (int a = 0; a < 10; ++a) {
                    out.label_names.push_back("cell_" + std::to_string(v) + "_" +
                                              std::to_string(a));
                }
            }
            break;
    }

    std::set<AgeGroup> age_seen;
    for (const Sample& sample : manifest.samples) age_seen.insert(sample.age);
    out.age_categories.assign(age_seen.begin(), age_seen.end());
    auto age_index = [&](AgeGroup group) {
        auto it = std::lower_bound(out.age_categories.begin(), out.age_categories.end(), group);
        return static_cast<std::uint8_t>(it - out.age_categories.begin());
    };

    out.keys.reserve(manifest.samples.size());
    if (schema.task == TaskKind::ActionUnits) out.au_masks.reserve(manifest.samples.size());
    out.global.assign(out.total_categories(), 0);
    out.total_samples = static_cast<std::int64_t>(manifest.samples.size());

    const std::size_t age_offset = out.dimension_offset(Dimension::Age);
    const std::size_t gender_offset = out.dimension_offset(Dimension::Gender);
    const std::size_t race_offset = out.dimension_offset(Dimension::Race);

    for (const Sample& sample : manifest.samples) {
        StratumKey key;
        switch (schema.task) {
            case TaskKind::Expression: {
                if (sample.expression < 0 ||
                    static_cast<std::size_t>(sample.expression) >= out.label_count) {
                    throw GuardError("sample \"" + sample.sample_id +
                                     "\" has an out-of-range expression index");
                }
                key.label = static_cast<std::uint16_t>(sample.expression);
                out.global[key.label] += 1;
                break;
            }
            case TaskKind::ActionUnits: {
                if (sample.aus.size() != out.label_count) {
                    throw GuardError("sample \"" + sample.sample_id +
                                     "\" has an AU vector of wrong length");
                }
                std::uint64_t mask = 0;
                for (std::size_t a = 0; a < sample.aus.size(); ++a) {
                    if (sample.aus[a]) {
                        mask |= std::uint64_t{1} << a;
                        out.global[a] += 1;
                    }
                }
                out.au_masks.push_back(mask);
                break;
            }
            case TaskKind::ValenceArousal: {
                auto [v, a] = discretize_va_grid(sample.valence, sample.arousal);
                key.label = static_cast<std::uint16_t>(v * 10 + a);
                out.global[key.label] += 1;
                break;
            }
        }
        key.age = age_index(sample.age);
        key.gender = static_cast<std::uint8_t>(sample.gender);
        key.race = static_cast<std::uint8_t>(sample.race);
        out.global[age_offset + key.age] += 1;
        out.global[gender_offset + key.gender] += 1;
        out.global[race_offset + key.race] += 1;
        out.keys.push_back(key);
    }
    return out;
}

std::vector<SubjectGroup> group_subjects(const Manifest& manifest, const Strata& strata) {
    // (group_id view, sample index), sorted to bring each group together.
    std::vector<std::pair<std::string_view, std::uint32_t>> order;
    order.reserve(manifest.samples.size());
    for (std::size_t i = 0; i < manifest.samples.size(); ++i) {
        const Sample& sample = manifest.samples[i];
        std::string_view gid = sample.subject_id.empty() ? sample.sample_id : sample.subject_id;
        order.emplace_back(gid, static_cast<std::uint32_t>(i));
    }
    std::sort(order.begin(), order.end());

    const std::size_t age_offset = strata.dimension_offset(Dimension::Age);
    const std::size_t gender_offset = strata.dimension_offset(Dimension::Gender);
    const std::size_t race_offset = strata.dimension_offset(Dimension::Race);

    std::vector<SubjectGroup> groups;
    std::map<std::uint32_t, std::int64_t> local; // flat category → count
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && order[j].first == order[i].first) ++j;

        SubjectGroup group;
        group.group_id = std::string(order[i].first);
        group.size = static_cast<std::int64_t>(j - i);
        local.clear();
        for (std::size_t k = i; k < j; ++k) {
            const std::uint32_t sample_index = order[k].second;
            group.members.push_back(sample_index);
            const StratumKey& key = strata.keys[sample_index];
            if (strata.task == TaskKind::ActionUnits) {
                std::uint64_t mask = strata.au_masks[sample_index];
                while (mask) {
                    int a = std::countr_zero(mask);
                    mask &= mask - 1;
                    local[static_cast<std::uint32_t>(a)] += 1;
                }
            } else {
                local[key.label] += 1;
            }
            local[static_cast<std::uint32_t>(age_offset + key.age)] += 1;
            local[static_cast<std::uint32_t>(gender_offset + key.gender)] += 1;
            local[static_cast<std::uint32_t>(race_offset + key.race)] += 1;
        }
        std::sort(group.members.begin(), group.members.end());
        group.counts.assign(local.begin(), local.end());
        groups.push_back(std::move(group));
        i = j;
    }
    return groups;
}

double PartitionConfig::dimension_weight(Dimension d) const {
    switch (d) {
        case Dimension::Label: return w_label;
        case Dimension::Age: return w_age;
        case Dimension::Gender: return w_gender;
        case Dimension::Race: return w_race;
    }
    throw DomainError("invalid dimension");
}

void PartitionConfig::validate() const {
    double sum = 0.0;
    for (double f : fractions) {
        if (!(f > 0.0) || !std::isfinite(f)) {
            throw ValidationError("target fractions must be positive");
        }
        sum += f;
    }
    if (std::fabs(sum - 1.0) > 1e-9) {
        throw ValidationError("target fractions must sum to 1, got " + csv::format_double(sum));
    }
    for (double w : {w_size, w_label, w_age, w_gender, w_race}) {
        if (!(w >= 0.0) || !std::isfinite(w)) {
            throw ValidationError("weights must be finite and non-negative");
        }
    }
    if (move_budget < 0) throw ValidationError("move_budget must be non-negative");
    if (patience < 0) throw ValidationError("patience must be non-negative");
    if (restarts < 1) throw ValidationError("restarts must be at least 1");
}

std::array<double, kSetCount> parse_fraction_list(const std::string& list) {
    auto parts = csv::split_line(list);
    if (parts.size() != static_cast<std::size_t>(kSetCount)) {
        throw ValidationError("expected three comma-separated fractions, got \"" + list + "\"");
    }
    std::array<double, kSetCount> out{};
    for (int s = 0; s < kSetCount; ++s) {
        auto value = csv::parse_double(csv::trim(parts[s]));
        if (!value) throw ValidationError("invalid fraction \"" + parts[s] + "\"");
        out[s] = *value;
    }
    return out;
}

void apply_weight_list(PartitionConfig& config, const std::string& list) {
    for (const std::string& part : csv::split_line(list)) {
        auto eq = part.find('=');
        if (eq == std::string::npos) {
            throw ValidationError("expected name=value in weight list, got \"" + part + "\"");
        }
        std::string name = csv::to_lower(csv::trim(part.substr(0, eq)));
        auto value = csv::parse_double(csv::trim(part.substr(eq + 1)));
        if (!value) throw ValidationError("invalid weight value in \"" + part + "\"");
        if (name == "size") {
            config.w_size = *value;
        } else if (name == "label") {
            config.w_label = *value;
        } else if (name == "age") {
            config.w_age = *value;
        } else if (name == "gender") {
            config.w_gender = *value;
        } else if (name == "race") {
            config.w_race = *value;
        } else {
            throw ValidationError("unknown weight name \"" + name +
                                  "\" (expected size, label, age, gender, or race)");
        }
    }
}

namespace {

std::uint64_t parse_u64(const std::string& text, const std::string& key) {
    std::uint64_t value = 0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end) {
        throw ValidationError("invalid value for " + key + ": \"" + text + "\"");
    }
    return value;
}

std::int64_t parse_i64(const std::string& text, const std::string& key) {
    auto value = csv::parse_int(text);
    if (!value) throw ValidationError("invalid value for " + key + ": \"" + text + "\"");
    return *value;
}

double parse_f64(const std::string& text, const std::string& key) {
    auto value = csv::parse_double(text);
    if (!value) throw ValidationError("invalid value for " + key + ": \"" + text + "\"");
    return *value;
}

} // namespace

PartitionConfig load_partition_config(const std::filesystem::path& path,
                                      const PartitionConfig& base) {
    PartitionConfig config = base;
    for (const auto& [key, value] : csv::read_key_values(path)) {
        if (key == "fractions") {
            config.fractions = parse_fraction_list(value);
        } else if (key == "w_size") {
            config.w_size = parse_f64(value, key);
        } else if (key == "w_label") {
            config.w_label = parse_f64(value, key);
        } else if (key == "w_age") {
            config.w_age = parse_f64(value, key);
        } else if (key == "w_gender") {
            config.w_gender = parse_f64(value, key);
        } else if (key == "w_race") {
            config.w_race = parse_f64(value, key);
        } else if (key == "seed") {
            config.seed = parse_u64(value, key);
        } else if (key == "move_budget") {
            config.move_budget = parse_i64(value, key);
        } else if (key == "patience") {
            config.patience = parse_i64(value, key);
        } else if (key == "restarts") {
            config.restarts = static_cast<int>(parse_i64(value, key));
        } else {
            throw ValidationError("unknown config key \"" + key + "\" in " + path.string());
        }
    }
    return config;
}

int PartitionAssignment::set_of(std::string_view group_id) const {
    for (std::size_t i = 0; i < group_ids.size(); ++i) {
        if (group_ids[i] == group_id) return sets[i];
    }
    return -1;
}

ObjectiveEvaluator::ObjectiveEvaluator(const Strata& strata, const PartitionConfig& config)
    : strata_(strata), config_(config) {
    for (auto& c : counts_) c.assign(strata_.total_categories(), 0);
}

void ObjectiveEvaluator::reset() {
    for (auto& c : counts_) std::fill(c.begin(), c.end(), 0);
    sizes_.fill(0);
}

void ObjectiveEvaluator::apply(const SubjectGroup& group, int set, std::int64_t sign) {
    auto& counts = counts_[set];
    for (const auto& [category, count] : group.counts) counts[category] += sign * count;
    sizes_[set] += sign * group.size;
}

double ObjectiveEvaluator::dimension_gap(int set, Dimension d) const {
    const std::int64_t n = sizes_[set];
    if (n == 0) return 1.0; // total-variation distance of an empty set
    const double inv_n = 1.0 / static_cast<double>(n);
    const double inv_total = 1.0 / static_cast<double>(strata_.total_samples);
    const std::size_t offset = strata_.dimension_offset(d);
    const std::size_t size = strata_.dimension_size(d);
    const auto& counts = counts_[set];
    double gap = 0.0;
    for (std::size_t c = 0; c < size; ++c) {
        gap += std::fabs(static_cast<double>(counts[offset + c]) * inv_n -
                         static_cast<double>(strata_.global[offset + c]) * inv_total);
    }
    if (d == Dimension::Label && strata_.task == TaskKind::ActionUnits && size > 0) {
        gap /= static_cast<double>(size); // mean per-AU absolute rate gap
    }
    return gap;
}

double ObjectiveEvaluator::evaluate() const {
    const double total = static_cast<double>(strata_.total_samples);
    double objective = 0.0;
    for (int set = 0; set < kSetCount; ++set) {
        const double fraction = total == 0.0 ? 0.0 : static_cast<double>(sizes_[set]) / total;
        objective += config_.w_size * std::fabs(fraction - config_.fractions[set]);
        for (int d = 0; d < kDimensionCount; ++d) {
            objective +=
                config_.dimension_weight(static_cast<Dimension>(d)) *
                dimension_gap(set, static_cast<Dimension>(d));
        }
    }
    return objective;
}

ObjectiveEvaluator::Detail ObjectiveEvaluator::detail() const {
    Detail out;
    out.objective = evaluate();
    const double total = static_cast<double>(strata_.total_samples);
    for (int set = 0; set < kSetCount; ++set) {
        out.sizes[set] = sizes_[set];
        out.fractions[set] = total == 0.0 ? 0.0 : static_cast<double>(sizes_[set]) / total;
        for (int d = 0; d < kDimensionCount; ++d) {
            out.gaps[set][d] = dimension_gap(set, static_cast<Dimension>(d));
        }
    }
    return out;
}

double objective(const PartitionAssignment& assignment, const Strata& strata,
                 const std::vector<SubjectGroup>& groups, const PartitionConfig& config) {
    std::map<std::string_view, int> by_id;
    for (std::size_t i = 0; i < assignment.group_ids.size(); ++i) {
        by_id.emplace(assignment.group_ids[i], assignment.sets[i]);
    }
    ObjectiveEvaluator evaluator(strata, config);
    for (const SubjectGroup& group : groups) {
        auto it = by_id.find(group.group_id);
        if (it == by_id.end()) {
            throw ValidationError("assignment does not cover group \"" + group.group_id + "\"");
        }
        evaluator.add(group, it->second);
    }
    return evaluator.evaluate();
}

namespace {

// Below this many groups the local search sweeps the whole move/swap
// neighborhood instead of sampling it (one sweep is ~n²/2 evaluations).
constexpr std::size_t kSystematicSweepLimit = 256;

struct RestartResult {
    double objective = std::numeric_limits<double>::infinity();
    std::uint64_t seed = 0;
    int index = -1;
    std::vector<std::uint8_t> sets;
    std::vector<double> trace;
    std::int64_t moves = 0;
};

// Deficit seeding: visit groups from largest to smallest (ties by group_id)
// and place each in the set with the largest remaining sample deficit
// relative to its target fraction (lowest set index winning ties). This lands
// every set within one group size of its target and interleaves placements,
// so each set samples the manifest roughly uniformly; the local search then
// polishes the marginals. Minimizing the full objective greedily instead
// would starve the small sets: once a set is small, any addition moves its
// marginal more than it improves the size term.
void deficit_seed(const std::vector<SubjectGroup>& groups,
                  const std::vector<std::uint32_t>& order, const PartitionConfig& config,
                  ObjectiveEvaluator& evaluator, std::vector<std::uint8_t>& sets) {
    std::int64_t total = 0;
    for (const SubjectGroup& group : groups) total += group.size;
    std::array<double, kSetCount> deficit{};
    for (int s = 0; s < kSetCount; ++s)
        deficit[static_cast<std::size_t>(s)] =
            config.fractions[static_cast<std::size_t>(s)] * static_cast<double>(total);
    for (std::uint32_t g : order) {
        int best_set = 0;
        double best_key = -std::numeric_limits<double>::infinity();
        for (int s = 0; s < kSetCount; ++s) {
            const double key = deficit[static_cast<std::size_t>(s)] /
                               config.fractions[static_cast<std::size_t>(s)];
            if (key > best_key) {
                best_key = key;
                best_set = s;
            }
        }
        deficit[static_cast<std::size_t>(best_set)] -= static_cast<double>(groups[g].size);
        evaluator.add(groups[g], best_set);
        sets[g] = static_cast<std::uint8_t>(best_set);
    }
}

RestartResult run_restart(int index, const Strata& strata,
                          const std::vector<SubjectGroup>& groups,
                          const std::vector<std::uint32_t>& seed_order,
                          const PartitionConfig& config) {
    RestartResult result;
    result.index = index;
    result.seed = SplitMix64::derive(config.seed, static_cast<std::uint64_t>(index));
    SplitMix64 rng(result.seed);

    const std::size_t group_count = groups.size();
    ObjectiveEvaluator evaluator(strata, config);
    std::vector<std::uint8_t> sets(group_count, 0);
    if (index == 0) {
        deficit_seed(groups, seed_order, config, evaluator, sets);
    } else {
        for (std::size_t g = 0; g < group_count; ++g) {
            sets[g] = static_cast<std::uint8_t>(rng.bounded(kSetCount));
            evaluator.add(groups[g], sets[g]);
        }
    }

    double objective = evaluator.evaluate();
    double best_objective = objective;
    result.trace.push_back(objective);

    // `moves` counts objective evaluations during the search; both search
    // modes share the same strict-improvement primitives. The trace records
    // best-so-far improvements only, so it stays strictly decreasing even
    // when the search is restarted from a perturbed solution.
    std::int64_t moves = 0;
    auto record = [&] {
        if (objective < best_objective) result.trace.push_back(objective);
    };
    auto try_move = [&](std::size_t g, int target) {
        ++moves;
        const int current = sets[g];
        evaluator.remove(groups[g], current);
        evaluator.add(groups[g], target);
        const double candidate = evaluator.evaluate();
        if (candidate < objective) {
            objective = candidate;
            sets[g] = static_cast<std::uint8_t>(target);
            record();
            return true;
        }
        evaluator.remove(groups[g], target);
        evaluator.add(groups[g], current);
        return false;
    };
    auto try_swap = [&](std::size_t g1, std::size_t g2) {
        const int s1 = sets[g1];
        const int s2 = sets[g2];
        if (g1 == g2 || s1 == s2) return false;
        ++moves;
        evaluator.remove(groups[g1], s1);
        evaluator.add(groups[g1], s2);
        evaluator.remove(groups[g2], s2);
        evaluator.add(groups[g2], s1);
        const double candidate = evaluator.evaluate();
        if (candidate < objective) {
            objective = candidate;
            sets[g1] = static_cast<std::uint8_t>(s2);
            sets[g2] = static_cast<std::uint8_t>(s1);
            record();
            return true;
        }
        evaluator.remove(groups[g1], s2);
        evaluator.add(groups[g1], s1);
        evaluator.remove(groups[g2], s1);
        evaluator.add(groups[g2], s2);
        return false;
    };

    if (group_count <= kSystematicSweepLimit) {
        // Small instance: exhaustive first-improvement sweeps over all single
        // reassignments and all pair swaps, until a full sweep finds nothing
        // (a true local optimum of this neighborhood). While budget remains,
        // kick a few groups away from the best solution and sweep again,
        // keeping the best assignment ever seen.
        auto sweep = [&] {
            bool improved = true;
            while (improved && moves < config.move_budget) {
                improved = false;
                for (std::size_t g = 0; g < group_count && moves < config.move_budget; ++g) {
                    for (int target = 0; target < kSetCount; ++target) {
                        if (target != sets[g] && try_move(g, target)) improved = true;
                    }
                }
                for (std::size_t g1 = 0; g1 + 1 < group_count && moves < config.move_budget;
                     ++g1) {
                    for (std::size_t g2 = g1 + 1; g2 < group_count && moves < config.move_budget;
                         ++g2) {
                        if (try_swap(g1, g2)) improved = true;
                    }
                }
            }
        };
        sweep();
        std::vector<std::uint8_t> best_sets = sets;
        best_objective = std::min(best_objective, objective);
        const std::size_t kick_size =
            std::max<std::size_t>(std::size_t{2}, group_count / 4);
        while (moves < config.move_budget) {
            // restore the incumbent, then perturb it
            for (std::size_t g = 0; g < group_count; ++g) {
                if (sets[g] != best_sets[g]) {
                    evaluator.remove(groups[g], sets[g]);
                    evaluator.add(groups[g], best_sets[g]);
                    sets[g] = best_sets[g];
                }
            }
            for (std::size_t k = 0; k < kick_size; ++k) {
                const std::size_t g = static_cast<std::size_t>(rng.bounded(group_count));
                int target = static_cast<int>(rng.bounded(kSetCount - 1));
                if (target >= sets[g]) ++target;
                evaluator.remove(groups[g], sets[g]);
                evaluator.add(groups[g], target);
                sets[g] = static_cast<std::uint8_t>(target);
            }
            objective = evaluator.evaluate();
            ++moves;
            sweep();
            if (objective < best_objective) {
                best_objective = objective;
                best_sets = sets;
            }
        }
        sets = std::move(best_sets);
        objective = best_objective;
    } else {
        // Large instance: randomized proposals with a patience cutoff. The
        // search is monotone here, so the incumbent is the current state.
        std::int64_t rejections = 0;
        while (moves < config.move_budget && rejections < config.patience) {
            bool improved = false;
            if (rng.bounded(2) == 0) {
                const std::size_t g = static_cast<std::size_t>(rng.bounded(group_count));
                int target = static_cast<int>(rng.bounded(kSetCount - 1));
                if (target >= sets[g]) ++target;
                improved = try_move(g, target);
            } else {
                const std::size_t g1 = static_cast<std::size_t>(rng.bounded(group_count));
                const std::size_t g2 = static_cast<std::size_t>(rng.bounded(group_count));
                improved = try_swap(g1, g2);
            }
            rejections = improved ? 0 : rejections + 1;
        }
    }

    result.objective = objective;
    result.sets = std::move(sets);
    result.moves = moves;
    return result;
}

} // namespace

PartitionAssignment solve_partition(const Manifest& manifest, const PartitionConfig& config) {
    config.validate();
    const Strata strata = build_strata(manifest);
    const std::vector<SubjectGroup> groups = group_subjects(manifest, strata);
    if (groups.size() < 3) {
        throw InfeasibleError("need at least 3 subject groups to form 3 sets, got " +
                              std::to_string(groups.size()));
    }

    // Greedy visit order: size descending, group_id ascending.
    std::vector<std::uint32_t> seed_order(groups.size());
    for (std::size_t i = 0; i < groups.size(); ++i) seed_order[i] = static_cast<std::uint32_t>(i);
    std::sort(seed_order.begin(), seed_order.end(), [&](std::uint32_t a, std::uint32_t b) {
        if (groups[a].size != groups[b].size) return groups[a].size > groups[b].size;
        return groups[a].group_id < groups[b].group_id;
    });

    const int restarts = config.restarts;
    std::vector<RestartResult> results(static_cast<std::size_t>(restarts));
    const int workers = worker_count(restarts);
    if (workers <= 1) {
        for (int r = 0; r < restarts; ++r) {
            results[static_cast<std::size_t>(r)] =
                run_restart(r, strata, groups, seed_order, config);
        }
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&]() {
                for (int r = next.fetch_add(1); r < restarts; r = next.fetch_add(1)) {
                    results[static_cast<std::size_t>(r)] =
                        run_restart(r, strata, groups, seed_order, config);
                }
            });
        }
        for (auto& t : pool) t.join();
    }

    // Winner: lexicographically smallest (objective, seed) — independent of
    // the order restarts finished in.
    std::size_t best = 0;
    for (std::size_t r = 1; r < results.size(); ++r) {
        if (results[r].objective < results[best].objective ||
            (results[r].objective == results[best].objective &&
             results[r].seed < results[best].seed)) {
            best = r;
        }
    }
    RestartResult& winner = results[best];

    PartitionAssignment out;
    out.config = config;
    out.group_ids.reserve(groups.size());
    for (const SubjectGroup& group : groups) out.group_ids.push_back(group.group_id);
    out.sets = std::move(winner.sets);
    out.winning_restart = winner.index;
    out.winning_seed = winner.seed;
    out.objective_trace = std::move(winner.trace);
    out.evaluated_moves = winner.moves;

    ObjectiveEvaluator evaluator(strata, config);
    for (std::size_t g = 0; g < groups.size(); ++g) evaluator.add(groups[g], out.sets[g]);
    const ObjectiveEvaluator::Detail detail = evaluator.detail();
    out.objective_value = detail.objective;
    out.achieved_fractions = detail.fractions;
    out.set_sizes = detail.sizes;
    out.l1_gaps = detail.gaps;

    const double largest_target = *std::max_element(config.fractions.begin(),
                                                    config.fractions.end());
    for (const SubjectGroup& group : groups) {
        const double share =
            static_cast<double>(group.size) / static_cast<double>(strata.total_samples);
        if (share > largest_target + 0.05) {
            out.warnings.push_back(
                "group \"" + group.group_id + "\" holds " + csv::format_double(share) +
                " of all samples, more than 5 points above the largest target fraction (" +
                csv::format_double(largest_target) + "); the size targets are unreachable");
        }
    }
    return out;
}

namespace {

void append_statistic(csv::Writer& writer, int set, const std::string& dimension,
                      const std::string& category, std::int64_t count) {
    writer.write_row({set_name(set), dimension, category, std::to_string(count)});
}

} // namespace

SplitFiles emit_split(const PartitionAssignment& assignment, const Manifest& manifest,
                      const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    SplitFiles files{out_dir / "split.csv", out_dir / "statistics.csv",
                     out_dir / "run_meta.json"};

    std::map<std::string_view, int> set_by_group;
    for (std::size_t i = 0; i < assignment.group_ids.size(); ++i) {
        set_by_group.emplace(assignment.group_ids[i], assignment.sets[i]);
    }
    std::vector<int> sample_set(manifest.samples.size(), -1);
    for (std::size_t i = 0; i < manifest.samples.size(); ++i) {
        const Sample& sample = manifest.samples[i];
        std::string_view gid = sample.subject_id.empty() ? sample.sample_id : sample.subject_id;
        auto it = set_by_group.find(gid);
        if (it == set_by_group.end()) {
            throw ValidationError("assignment does not cover subject group \"" +
                                  std::string(gid) + "\"");
        }
        sample_set[i] = it->second;
    }

    csv::Writer split(files.split_csv);
    split.write_row({"sample_id", "set"});
    for (std::size_t i = 0; i < manifest.samples.size(); ++i) {
        split.write_row({manifest.samples[i].sample_id, set_name(sample_set[i])});
    }
    split.close();

    // Per-set category counts over the same flattened space the solver used.
    const Strata strata = build_strata(manifest);
    std::array<std::vector<std::int64_t>, kSetCount> counts;
    for (auto& c : counts) c.assign(strata.total_categories(), 0);
    std::array<std::int64_t, kSetCount> sizes{};
    const std::size_t age_offset = strata.dimension_offset(Dimension::Age);
    const std::size_t gender_offset = strata.dimension_offset(Dimension::Gender);
    const std::size_t race_offset = strata.dimension_offset(Dimension::Race);
    for (std::size_t i = 0; i < manifest.samples.size(); ++i) {
        const int set = sample_set[i];
        const StratumKey& key = strata.keys[i];
        sizes[set] += 1;
        if (strata.task == TaskKind::ActionUnits) {
            std::uint64_t mask = strata.au_masks[i];
            while (mask) {
                counts[set][static_cast<std::size_t>(std::countr_zero(mask))] += 1;
                mask &= mask - 1;
            }
        } else {
            counts[set][key.label] += 1;
        }
        counts[set][age_offset + key.age] += 1;
        counts[set][gender_offset + key.gender] += 1;
        counts[set][race_offset + key.race] += 1;
    }

    const std::string label_dimension = strata.task == TaskKind::Expression ? "expression"
                                        : strata.task == TaskKind::ActionUnits ? "au_active"
                                                                               : "va_cell";
    csv::Writer statistics(files.statistics_csv);
    statistics.write_row({"set", "dimension", "category", "count"});
    for (int set = 0; set < kSetCount; ++set) {
        append_statistic(statistics, set, "size", "samples", sizes[set]);
        for (std::size_t c = 0; c < strata.label_count; ++c) {
            append_statistic(statistics, set, label_dimension, strata.label_names[c],
                             counts[set][c]);
        }
        for (std::size_t c = 0; c < strata.age_count(); ++c) {
            append_statistic(statistics, set, "age", age_group_name(strata.age_categories[c]),
                             counts[set][age_offset + c]);
        }
        for (int c = 0; c < kGenderCount; ++c) {
            append_statistic(statistics, set, "gender", gender_name(static_cast<Gender>(c)),
                             counts[set][gender_offset + static_cast<std::size_t>(c)]);
        }
        for (int c = 0; c < kRaceCount; ++c) {
            append_statistic(statistics, set, "race", race_name(static_cast<Race>(c)),
                             counts[set][race_offset + static_cast<std::size_t>(c)]);
        }
    }
    statistics.close();

    nlohmann::json meta;
    meta["toolkit_version"] = kVersion;
    meta["task"] = task_name(manifest.schema.task);
    meta["config"] = {
        {"fractions", assignment.config.fractions},
        {"weights",
         {{"size", assignment.config.w_size},
          {"label", assignment.config.w_label},
          {"age", assignment.config.w_age},
          {"gender", assignment.config.w_gender},
          {"race", assignment.config.w_race}}},
        {"seed", assignment.config.seed},
        {"move_budget", assignment.config.move_budget},
        {"patience", assignment.config.patience},
        {"restarts", assignment.config.restarts},
    };
    meta["objective"] = assignment.objective_value;
    meta["achieved_fractions"] = assignment.achieved_fractions;
    meta["set_sizes"] = assignment.set_sizes;
    nlohmann::json gaps;
    for (int set = 0; set < kSetCount; ++set) {
        nlohmann::json per_dim;
        for (int d = 0; d < kDimensionCount; ++d) {
            per_dim[dimension_name(static_cast<Dimension>(d))] = assignment.l1_gaps[set][d];
        }
        gaps[set_name(set)] = per_dim;
    }
    meta["marginal_gaps"] = gaps;
    meta["group_count"] = assignment.group_ids.size();
    meta["sample_count"] = manifest.samples.size();
    meta["winning_restart"] = assignment.winning_restart;
    meta["winning_seed"] = assignment.winning_seed;
    meta["accepted_moves"] =
        assignment.objective_trace.empty() ? 0 : assignment.objective_trace.size() - 1;
    meta["evaluated_moves"] = assignment.evaluated_moves;
    meta["warnings"] = assignment.warnings;

    csv::Writer meta_out(files.run_meta_json);
    meta_out.write_raw(meta.dump(2));
    meta_out.write_raw("\n");
    meta_out.close();
    return files;
}

std::vector<std::pair<std::string, int>> load_split(const std::filesystem::path& path) {
    csv::Table table = csv::read_table(path);
    auto id_col = table.column("sample_id");
    auto set_col = table.column("set");
    if (!id_col) throw ValidationError("missing required column 'sample_id' in " + path.string());
    if (!set_col) throw ValidationError("missing required column 'set' in " + path.string());
    std::vector<std::pair<std::string, int>> out;
    std::set<std::string> seen;
    out.reserve(table.rows.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        if (row.size() != table.header.size()) {
            throw ValidationError(path.string() + ":" + std::to_string(table.line_numbers[r]) +
                                  ": expected " + std::to_string(table.header.size()) +
                                  " fields, got " + std::to_string(row.size()));
        }
        std::string id = csv::trim(row[*id_col]);
        auto set = parse_set_name(row[*set_col]);
        if (id.empty() || !set) {
            throw ValidationError(path.string() + ":" + std::to_string(table.line_numbers[r]) +
                                  ": invalid split row");
        }
        if (!seen.insert(id).second) {
            throw ValidationError("duplicate sample_id \"" + id + "\" in " + path.string());
        }
        out.emplace_back(std::move(id), *set);
    }
    return out;
}

} // namespace fairsplit
