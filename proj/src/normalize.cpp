#include "fairsplit/normalize.hpp"

#include <algorithm>

#include "fairsplit/csv.hpp"
#include "fairsplit/errors.hpp"
#include "fairsplit/manifest.hpp"

namespace fairsplit {

double rescale_va(double value, double lo, double hi) {
    if (!(lo < hi)) {
        throw DomainError("invalid source range [" + csv::format_double(lo) + ", " +
                          csv::format_double(hi) + "]");
    }
    if (value < lo || value > hi) {
        throw DomainError("value " + csv::format_double(value) + " outside source range [" +
                          csv::format_double(lo) + ", " + csv::format_double(hi) + "]");
    }
    if (lo == -1.0 && hi == 1.0) return value;
    if (value == lo) return -1.0;
    if (value == hi) return 1.0;
    return 2.0 * (value - lo) / (hi - lo) - 1.0;
}

std::uint8_t binarize_au(int intensity, int threshold) {
    if (intensity < 0 || intensity > 5) {
        throw DomainError("AU intensity " + std::to_string(intensity) + " outside 0..5");
    }
    if (threshold < 0 || threshold > 4) {
        throw DomainError("AU activation threshold " + std::to_string(threshold) +
                          " outside 0..4");
    }
    return intensity > threshold ? 1 : 0;
}

AgeBin bin_age(int years) {
    if (years < 0) throw DomainError("negative age " + std::to_string(years));
    if (years <= 2) return AgeBin::Age0To2;
    if (years <= 9) return AgeBin::Age3To9;
    if (years <= 19) return AgeBin::Age10To19;
    if (years <= 29) return AgeBin::Age20To29;
    if (years <= 39) return AgeBin::Age30To39;
    if (years <= 49) return AgeBin::Age40To49;
    if (years <= 59) return AgeBin::Age50To59;
    if (years <= 69) return AgeBin::Age60To69;
    return AgeBin::Age70Plus;
}

Manifest normalize_manifest(const Manifest& manifest, const NormalizeOptions& options) {
    Manifest out = manifest;
    switch (out.schema.task) {
        case TaskKind::ActionUnits: {
            bool already_binary = out.au_binarized && options.au_threshold == 0;
            if (!already_binary) {
                for (auto& sample : out.samples) {
                    for (auto& value : sample.aus) {
                        value = binarize_au(value, options.au_threshold);
                    }
                }
            }
            out.au_binarized = true;
            break;
        }
        case TaskKind::ValenceArousal: {
            auto [lo, hi] = out.schema.va_range;
            if (lo != -1.0 || hi != 1.0) {
                for (auto& sample : out.samples) {
                    sample.valence = rescale_va(sample.valence, lo, hi);
                    sample.arousal = rescale_va(sample.arousal, lo, hi);
                }
                out.schema.va_range = {-1.0, 1.0};
            }
            break;
        }
        case TaskKind::Expression:
            break;
    }
    return out;
}

std::size_t ConsolidationResult::consensus_field_count() const {
    std::size_t count = 0;
    for (const auto& [id, record] : consensus) {
        count += (record.age.has_value() ? 1 : 0) + (record.gender.has_value() ? 1 : 0) +
                 (record.race.has_value() ? 1 : 0);
    }
    return count;
}

ConsolidationResult consolidate_annotations(const RaterTable& a, const RaterTable& b) {
    std::vector<std::string> only_a;
    std::vector<std::string> only_b;
    for (const auto& [id, rec] : a.rows) {
        if (!b.rows.count(id)) only_a.push_back(id);
    }
    for (const auto& [id, rec] : b.rows) {
        if (!a.rows.count(id)) only_b.push_back(id);
    }
    if (!only_a.empty() || !only_b.empty()) {
        std::string msg = "rater tables cover different sample ids:";
        for (const auto& id : only_a) msg += " " + id + "(first only)";
        for (const auto& id : only_b) msg += " " + id + "(second only)";
        throw ValidationError(msg);
    }

    ConsolidationResult result;
    auto sorted_pair = [](std::string x, std::string y) {
        if (y < x) std::swap(x, y);
        return std::pair<std::string, std::string>(std::move(x), std::move(y));
    };
    for (const auto& [id, ra] : a.rows) {
        const RaterRecord& rb = b.rows.at(id);
        ConsensusRecord rec;
        if (ra.age == rb.age) {
            rec.age = ra.age;
        } else {
            auto [x, y] = sorted_pair(age_group_name(ra.age), age_group_name(rb.age));
            result.disagreements.push_back({id, "age", x, y});
        }
        if (ra.gender == rb.gender) {
            rec.gender = ra.gender;
        } else {
            auto [x, y] = sorted_pair(gender_name(ra.gender), gender_name(rb.gender));
            result.disagreements.push_back({id, "gender", x, y});
        }
        if (ra.race == rb.race) {
            rec.race = ra.race;
        } else {
            auto [x, y] = sorted_pair(race_name(ra.race), race_name(rb.race));
            result.disagreements.push_back({id, "race", x, y});
        }
        result.consensus.emplace(id, rec);
    }
    std::sort(result.disagreements.begin(), result.disagreements.end(),
              [](const Disagreement& x, const Disagreement& y) {
                  return std::tie(x.sample_id, x.field) < std::tie(y.sample_id, y.field);
              });
    return result;
}

RaterTable load_rater_table(const std::filesystem::path& path) {
    csv::Table table = csv::read_table(path);
    auto id_col = table.column("sample_id");
    auto age_col = table.column("age");
    auto gender_col = table.column("gender");
    auto race_col = table.column("race");
    for (const auto& [name, col] : std::initializer_list<std::pair<const char*, bool>>{
             {"sample_id", id_col.has_value()},
             {"age", age_col.has_value()},
             {"gender", gender_col.has_value()},
             {"race", race_col.has_value()}}) {
        if (!col) throw ValidationError("missing required column '" + std::string(name) + "' in " +
                                        path.string());
    }
    RaterTable out;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        if (row.size() != table.header.size()) {
            throw ValidationError("line " + std::to_string(table.line_numbers[r]) + ": expected " +
                                  std::to_string(table.header.size()) + " fields, got " +
                                  std::to_string(row.size()) + " in " + path.string());
        }
        std::string id = csv::trim(row[*id_col]);
        if (id.empty()) {
            throw ValidationError("line " + std::to_string(table.line_numbers[r]) +
                                  ": empty sample_id in " + path.string());
        }
        RaterRecord rec;
        rec.age = parse_age_group(row[*age_col]).value_or(AgeGroup::unknown());
        rec.gender = parse_gender(row[*gender_col]).value_or(Gender::OtherUncertain);
        rec.race = parse_race(row[*race_col]).value_or(Race::Unlabeled);
        if (!out.rows.emplace(std::move(id), rec).second) {
            throw ValidationError("line " + std::to_string(table.line_numbers[r]) +
                                  ": duplicate sample_id \"" + csv::trim(row[*id_col]) + "\" in " +
                                  path.string());
        }
    }
    return out;
}

void write_consolidation(const ConsolidationResult& result, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    csv::Writer consensus(out_dir / "consensus.csv");
    consensus.write_row({"sample_id", "age", "gender", "race"});
    for (const auto& [id, rec] : result.consensus) {
        consensus.write_row({id, rec.age ? age_group_name(*rec.age) : "",
                             rec.gender ? gender_name(*rec.gender) : "",
                             rec.race ? race_name(*rec.race) : ""});
    }
    consensus.close();

    csv::Writer disagreements(out_dir / "disagreements.csv");
    disagreements.write_row({"sample_id", "field", "rater_a", "rater_b"});
    for (const auto& d : result.disagreements) {
        disagreements.write_row({d.sample_id, d.field, d.value_a, d.value_b});
    }
    disagreements.close();
}

} // namespace fairsplit
