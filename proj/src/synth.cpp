#include "fairsplit/synth.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <thread>

#include "fairsplit/csv.hpp"
#include "fairsplit/errors.hpp"
#include "fairsplit/rng.hpp"
#include "fairsplit/threads.hpp"

namespace fairsplit {

Categorical Categorical::from_counts(std::vector<std::string> names,
                                     const std::vector<std::int64_t>& counts) {
    if (names.size() != counts.size()) {
        throw ValidationError("categorical names and counts differ in length");
    }
    std::int64_t total = 0;
    for (std::int64_t count : counts) {
        if (count < 0) throw ValidationError("categorical counts must be non-negative");
        total += count;
    }
    if (total == 0) throw ValidationError("categorical counts must not all be zero");
    Categorical out;
    out.names = std::move(names);
    out.probabilities.reserve(counts.size());
    for (std::int64_t count : counts) {
        out.probabilities.push_back(static_cast<double>(count) / static_cast<double>(total));
    }
    return out;
}

void Categorical::validate(const std::string& what) const {
    if (names.empty() || names.size() != probabilities.size()) {
        throw ValidationError(what + ": categorical needs matching names and probabilities");
    }
    double sum = 0.0;
    for (double p : probabilities) {
        if (!(p >= 0.0) || !std::isfinite(p)) {
            throw ValidationError(what + ": probabilities must be non-negative");
        }
        sum += p;
    }
    if (std::fabs(sum - 1.0) > 1e-9) {
        throw ValidationError(what + ": probabilities must sum to 1, got " +
                              csv::format_double(sum));
    }
}

void SynthSpec::validate() const {
    if (count < 0) throw ValidationError("sample count must be non-negative");
    switch (task) {
        case TaskKind::Expression: {
            expressions.validate("expressions");
            std::vector<std::string> sorted = expressions.names;
            std::sort(sorted.begin(), sorted.end());
            if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
                throw ValidationError("expressions: duplicate category name");
            }
            if (!race_given_label.empty()) {
                if (race_given_label.size() != expressions.names.size()) {
                    throw ValidationError(
                        "race_given_label needs one distribution per expression category");
                }
                for (const Categorical& dist : race_given_label) {
                    dist.validate("race_given_label");
                }
            }
            break;
        }
        case TaskKind::ActionUnits: {
            if (au_ids.empty() || au_ids.size() != au_rates.size()) {
                throw ValidationError("aus: need matching AU ids and activation rates");
            }
            for (double rate : au_rates) {
                if (!(rate >= 0.0 && rate <= 1.0)) {
                    throw ValidationError("aus: activation rates must lie in [0,1]");
                }
            }
            break;
        }
        case TaskKind::ValenceArousal: {
            if (va_components.empty()) {
                throw ValidationError("va_components: need at least one mixture component");
            }
            double weight_sum = 0.0;
            for (const VaComponent& component : va_components) {
                if (!(component.weight >= 0.0) || !(component.sigma_valence >= 0.0) ||
                    !(component.sigma_arousal >= 0.0)) {
                    throw ValidationError("va_components: weights and sigmas must be ≥ 0");
                }
                weight_sum += component.weight;
            }
            if (std::fabs(weight_sum - 1.0) > 1e-9) {
                throw ValidationError("va_components: weights must sum to 1, got " +
                                      csv::format_double(weight_sum));
            }
            break;
        }
    }
    age.validate("age");
    for (const std::string& name : age.names) {
        if (!parse_age_group(name)) {
            throw ValidationError("age: unrecognized age group \"" + name + "\"");
        }
    }
    gender.validate("gender");
    for (const std::string& name : gender.names) {
        if (!parse_gender(name)) {
            throw ValidationError("gender: unrecognized gender \"" + name + "\"");
        }
    }
    race.validate("race");
    for (const std::string& name : race.names) {
        if (!parse_race(name)) {
            throw ValidationError("race: unrecognized race \"" + name + "\"");
        }
    }
    if (!race_given_label.empty()) {
        for (const Categorical& dist : race_given_label) {
            for (const std::string& name : dist.names) {
                if (!parse_race(name)) {
                    throw ValidationError("race_given_label: unrecognized race \"" + name + "\"");
                }
            }
        }
    }
    if (group_size_min < 1 || group_size_max < group_size_min) {
        throw ValidationError("group sizes must satisfy 1 ≤ min ≤ max");
    }
}

namespace {

std::size_t draw_categorical(SplitMix64& rng, const std::vector<double>& probabilities) {
    const double u = rng.next_double();
    double cumulative = 0.0;
    for (std::size_t i = 0; i + 1 < probabilities.size(); ++i) {
        cumulative += probabilities[i];
        if (u < cumulative) return i;
    }
    return probabilities.size() - 1;
}

std::string padded_id(const char* prefix, std::int64_t value) {
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%s%07lld", prefix,
                  static_cast<long long>(value));
    return buffer;
}

double clip_unit(double value) { return std::min(1.0, std::max(-1.0, value)); }

std::vector<std::pair<std::string, std::string>> parse_pairs(const std::string& list,
                                                             const std::string& key) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const std::string& part : csv::split_line(list)) {
        auto colon = part.rfind(':');
        if (colon == std::string::npos) {
            throw ValidationError(key + ": expected name:value entries, got \"" + part + "\"");
        }
        out.emplace_back(csv::trim(part.substr(0, colon)), csv::trim(part.substr(colon + 1)));
    }
    return out;
}

Categorical parse_categorical(const std::string& list, const std::string& key) {
    Categorical out;
    for (const auto& [name, value] : parse_pairs(list, key)) {
        auto probability = csv::parse_double(value);
        if (!probability) {
            throw ValidationError(key + ": invalid probability \"" + value + "\"");
        }
        out.names.push_back(name);
        out.probabilities.push_back(*probability);
    }
    return out;
}

} // namespace

SynthSpec load_synth_spec(const std::filesystem::path& path) {
    SynthSpec spec;
    bool have_task = false;
    for (const auto& [key, value] : csv::read_key_values(path)) {
        if (key == "task") {
            auto task = parse_task(value);
            if (!task) throw ValidationError("unknown task \"" + value + "\"");
            spec.task = *task;
            have_task = true;
        } else if (key == "count") {
            auto count = csv::parse_int(value);
            if (!count) throw ValidationError("invalid count \"" + value + "\"");
            spec.count = *count;
        } else if (key == "seed") {
            std::uint64_t seed = 0;
            auto [ptr, ec] =
                std::from_chars(value.data(), value.data() + value.size(), seed);
            if (ec != std::errc() || ptr != value.data() + value.size()) {
                throw ValidationError("invalid seed \"" + value + "\"");
            }
            spec.seed = seed;
        } else if (key == "expressions") {
            spec.expressions = parse_categorical(value, key);
        } else if (key == "aus") {
            for (const auto& [name, rate_text] : parse_pairs(value, key)) {
                auto id = csv::parse_int(name);
                auto rate = csv::parse_double(rate_text);
                if (!id || !rate) {
                    throw ValidationError("aus: expected id:rate entries, got \"" + name + ":" +
                                          rate_text + "\"");
                }
                spec.au_ids.push_back(static_cast<int>(*id));
                spec.au_rates.push_back(*rate);
            }
        } else if (key == "au_intensities") {
            std::string t = csv::to_lower(value);
            if (t != "true" && t != "false") {
                throw ValidationError("au_intensities must be true or false");
            }
            spec.au_intensities = t == "true";
        } else if (key == "va_components") {
            std::string rest = value;
            std::vector<std::string> components;
            std::size_t start = 0;
            while (start <= rest.size()) {
                auto semi = rest.find(';', start);
                if (semi == std::string::npos) {
                    components.push_back(rest.substr(start));
                    break;
                }
                components.push_back(rest.substr(start, semi - start));
                start = semi + 1;
            }
            for (const std::string& component : components) {
                std::vector<std::string> fields;
                std::size_t field_start = 0;
                while (field_start <= component.size()) {
                    auto colon = component.find(':', field_start);
                    if (colon == std::string::npos) {
                        fields.push_back(csv::trim(component.substr(field_start)));
                        break;
                    }
                    fields.push_back(csv::trim(component.substr(field_start, colon - field_start)));
                    field_start = colon + 1;
                }
                if (fields.size() != 5) {
                    throw ValidationError(
                        "va_components: expected weight:mean_v:mean_a:sigma_v:sigma_a, got \"" +
                        component + "\"");
                }
                VaComponent out;
                auto weight = csv::parse_double(fields[0]);
                auto mean_v = csv::parse_double(fields[1]);
                auto mean_a = csv::parse_double(fields[2]);
                auto sigma_v = csv::parse_double(fields[3]);
                auto sigma_a = csv::parse_double(fields[4]);
                if (!weight || !mean_v || !mean_a || !sigma_v || !sigma_a) {
                    throw ValidationError("va_components: invalid number in \"" + component +
                                          "\"");
                }
                out.weight = *weight;
                out.mean_valence = *mean_v;
                out.mean_arousal = *mean_a;
                out.sigma_valence = *sigma_v;
                out.sigma_arousal = *sigma_a;
                spec.va_components.push_back(out);
            }
        } else if (key == "age") {
            spec.age = parse_categorical(value, key);
        } else if (key == "gender") {
            spec.gender = parse_categorical(value, key);
        } else if (key == "race") {
            spec.race = parse_categorical(value, key);
        } else if (key == "group_sizes") {
            auto colon = value.find(':');
            if (colon == std::string::npos) {
                auto size = csv::parse_int(value);
                if (!size) throw ValidationError("invalid group_sizes \"" + value + "\"");
                spec.group_size_min = spec.group_size_max = *size;
            } else {
                auto lo = csv::parse_int(value.substr(0, colon));
                auto hi = csv::parse_int(value.substr(colon + 1));
                if (!lo || !hi) throw ValidationError("invalid group_sizes \"" + value + "\"");
                spec.group_size_min = *lo;
                spec.group_size_max = *hi;
            }
        } else {
            throw ValidationError("unknown synth key \"" + key + "\" in " + path.string());
        }
    }
    if (!have_task) throw ValidationError("synth spec must declare a task");
    spec.validate();
    return spec;
}

Manifest generate_manifest(const SynthSpec& spec) {
    spec.validate();
    SplitMix64 rng(spec.seed);

    Manifest out;
    out.schema.task = spec.task;
    switch (spec.task) {
        case TaskKind::Expression:
            out.schema.expressions = spec.expressions.names;
            break;
        case TaskKind::ActionUnits:
            out.schema.au_ids = spec.au_ids;
            out.au_binarized = !spec.au_intensities;
            break;
        case TaskKind::ValenceArousal:
            out.schema.va_range = {-1.0, 1.0};
            break;
    }

    // Subject structure: draw group sizes first, then fill groups in order.
    const bool subjects = !(spec.group_size_min == 1 && spec.group_size_max == 1);
    std::vector<std::int64_t> group_sizes;
    if (subjects) {
        std::int64_t assigned = 0;
        while (assigned < spec.count) {
            std::int64_t size =
                spec.group_size_min +
                static_cast<std::int64_t>(rng.bounded(static_cast<std::uint64_t>(
                    spec.group_size_max - spec.group_size_min + 1)));
            size = std::min(size, spec.count - assigned);
            group_sizes.push_back(size);
            assigned += size;
        }
    }

    std::vector<double> va_weights;
    va_weights.reserve(spec.va_components.size());
    for (const VaComponent& component : spec.va_components) {
        va_weights.push_back(component.weight);
    }

    out.samples.reserve(static_cast<std::size_t>(spec.count));
    std::size_t group_index = 0;
    std::int64_t remaining_in_group = subjects && !group_sizes.empty() ? group_sizes[0] : 0;
    for (std::int64_t i = 0; i < spec.count; ++i) {
        Sample sample;
        sample.sample_id = padded_id("s", i);
        if (subjects) {
            if (remaining_in_group == 0) {
                ++group_index;
                remaining_in_group = group_sizes[group_index];
            }
            sample.subject_id = padded_id("subj", static_cast<std::int64_t>(group_index));
            --remaining_in_group;
        }

        int label = -1;
        switch (spec.task) {
            case TaskKind::Expression:
                label = static_cast<int>(draw_categorical(rng, spec.expressions.probabilities));
                sample.expression = label;
                break;
            case TaskKind::ActionUnits:
                sample.aus.reserve(spec.au_ids.size());
                for (double rate : spec.au_rates) {
                    const bool active = rng.next_double() < rate;
                    if (!active) {
                        sample.aus.push_back(0);
                    } else if (spec.au_intensities) {
                        sample.aus.push_back(
                            1 + static_cast<int>(rng.bounded(5))); // intensity 1..5
                    } else {
                        sample.aus.push_back(1);
                    }
                }
                break;
            case TaskKind::ValenceArousal: {
                const VaComponent& component =
                    spec.va_components[draw_categorical(rng, va_weights)];
                sample.valence = clip_unit(component.mean_valence +
                                           component.sigma_valence * rng.next_gaussian());
                sample.arousal = clip_unit(component.mean_arousal +
                                           component.sigma_arousal * rng.next_gaussian());
                break;
            }
        }

        sample.age = *parse_age_group(
            spec.age.names[draw_categorical(rng, spec.age.probabilities)]);
        sample.gender = *parse_gender(
            spec.gender.names[draw_categorical(rng, spec.gender.probabilities)]);
        const Categorical& race_dist =
            (!spec.race_given_label.empty() && label >= 0)
                ? spec.race_given_label[static_cast<std::size_t>(label)]
                : spec.race;
        sample.race = *parse_race(race_dist.names[draw_categorical(rng, race_dist.probabilities)]);
        out.samples.push_back(std::move(sample));
    }
    return out;
}

namespace {

constexpr int kOracleMaxGroups = 13;

std::int64_t pow3(int exponent) {
    std::int64_t out = 1;
    for (int i = 0; i < exponent; ++i) out *= 3;
    return out;
}

void decode_assignment(std::int64_t index, int group_count, std::vector<std::uint8_t>& digits) {
    // Group 0 is the most significant digit, so ascending indices enumerate
    // assignment sequences in lexicographic order.
    for (int g = group_count - 1; g >= 0; --g) {
        digits[static_cast<std::size_t>(g)] = static_cast<std::uint8_t>(index % 3);
        index /= 3;
    }
}

struct OracleBest {
    double objective = 0.0;
    std::int64_t index = -1;
};

OracleBest oracle_scan(const Strata& strata, const std::vector<SubjectGroup>& groups,
                       const PartitionConfig& config, std::int64_t begin, std::int64_t end) {
    const int group_count = static_cast<int>(groups.size());
    std::vector<std::uint8_t> digits(groups.size(), 0);
    decode_assignment(begin, group_count, digits);
    ObjectiveEvaluator evaluator(strata, config);
    for (std::size_t g = 0; g < groups.size(); ++g) evaluator.add(groups[g], digits[g]);

    OracleBest best{evaluator.evaluate(), begin};
    for (std::int64_t index = begin + 1; index < end; ++index) {
        // Odometer step: increment the least significant digit with carry.
        for (int g = group_count - 1; g >= 0; --g) {
            const auto gi = static_cast<std::size_t>(g);
            const int old_set = digits[gi];
            const int new_set = old_set == 2 ? 0 : old_set + 1;
            evaluator.remove(groups[gi], old_set);
            evaluator.add(groups[gi], new_set);
            digits[gi] = static_cast<std::uint8_t>(new_set);
            if (new_set != 0) break; // no carry
        }
        const double objective = evaluator.evaluate();
        if (objective < best.objective) best = {objective, index};
    }
    return best;
}

} // namespace

PartitionAssignment oracle_partition(const Strata& strata,
                                     const std::vector<SubjectGroup>& groups,
                                     const PartitionConfig& config) {
    config.validate();
    if (groups.empty()) throw InfeasibleError("cannot partition zero groups");
    if (groups.size() > kOracleMaxGroups) {
        throw GuardError("exhaustive search over " + std::to_string(groups.size()) +
                         " groups exceeds the " + std::to_string(kOracleMaxGroups) +
                         "-group cost guard");
    }
    const std::int64_t total = pow3(static_cast<int>(groups.size()));
    const int workers = worker_count(static_cast<int>(std::min<std::int64_t>(total, 64)));

    std::vector<OracleBest> bests;
    if (workers <= 1) {
        bests.push_back(oracle_scan(strata, groups, config, 0, total));
    } else {
        bests.assign(static_cast<std::size_t>(workers), OracleBest{});
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) {
            const std::int64_t begin = total * w / workers;
            const std::int64_t end = total * (w + 1) / workers;
            pool.emplace_back([&, w, begin, end]() {
                bests[static_cast<std::size_t>(w)] =
                    oracle_scan(strata, groups, config, begin, end);
            });
        }
        for (auto& t : pool) t.join();
    }

    OracleBest best = bests.front();
    for (const OracleBest& candidate : bests) {
        if (candidate.index < 0) continue;
        if (candidate.objective < best.objective ||
            (candidate.objective == best.objective && candidate.index < best.index)) {
            best = candidate;
        }
    }

    PartitionAssignment out;
    out.config = config;
    out.group_ids.reserve(groups.size());
    for (const SubjectGroup& group : groups) out.group_ids.push_back(group.group_id);
    std::vector<std::uint8_t> digits(groups.size(), 0);
    decode_assignment(best.index, static_cast<int>(groups.size()), digits);
    out.sets = digits;

    ObjectiveEvaluator evaluator(strata, config);
    for (std::size_t g = 0; g < groups.size(); ++g) evaluator.add(groups[g], out.sets[g]);
    const ObjectiveEvaluator::Detail detail = evaluator.detail();
    out.objective_value = detail.objective;
    out.achieved_fractions = detail.fractions;
    out.set_sizes = detail.sizes;
    out.l1_gaps = detail.gaps;
    return out;
}

PartitionAssignment oracle_partition(const Manifest& manifest, const PartitionConfig& config) {
    const Strata strata = build_strata(manifest);
    const std::vector<SubjectGroup> groups = group_subjects(manifest, strata);
    return oracle_partition(strata, groups, config);
}

SynthSpec affectnet_expression_spec(std::uint64_t seed) {
    SynthSpec spec;
    spec.task = TaskKind::Expression;
    spec.count = 290580;
    spec.seed = seed;
    spec.expressions = Categorical::from_counts(
        {"neutral", "happiness", "sadness", "surprise", "fear", "disgust", "anger", "contempt"},
        {75063, 134534, 25832, 14524, 6839, 4284, 25263, 4241});
    spec.age = Categorical::from_counts(
        {"0-2", "3-9", "10-19", "20-29", "30-39", "40-49", "50-59", "60-69", "70+"},
        {15706, 18051, 15219, 119378, 57283, 28707, 23313, 9557, 3366});
    spec.gender = Categorical::from_counts({"male", "female"}, {144364, 146216});
    spec.race = Categorical::from_counts({"asian", "black", "indian", "white"},
                                         {25884, 23899, 17435, 223362});
    return spec;
}

} // namespace fairsplit
