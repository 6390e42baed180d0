#include "fairsplit/types.hpp"

#include <array>

#include "fairsplit/csv.hpp"
#include "fairsplit/errors.hpp"
#include "fairsplit/normalize.hpp"

namespace fairsplit {

namespace {

constexpr std::array<int, kAgeBinCount> kBinLower = {0, 3, 10, 20, 30, 40, 50, 60, 70};
constexpr std::array<int, kAgeBinCount> kBinUpper = {2, 9, 19, 29, 39, 49, 59, 69, -1};

} // namespace

std::string task_name(TaskKind task) {
    switch (task) {
        case TaskKind::Expression: return "expr";
        case TaskKind::ActionUnits: return "au";
        case TaskKind::ValenceArousal: return "va";
    }
    return "?";
}

std::optional<TaskKind> parse_task(std::string_view text) {
    std::string t = csv::to_lower(csv::trim(text));
    if (t == "expr" || t == "expression" || t == "expressions") return TaskKind::Expression;
    if (t == "au" || t == "aus" || t == "action_units") return TaskKind::ActionUnits;
    if (t == "va" || t == "valence_arousal") return TaskKind::ValenceArousal;
    return std::nullopt;
}

int age_bin_lower(AgeBin bin) { return kBinLower[static_cast<std::size_t>(bin)]; }
int age_bin_upper(AgeBin bin) { return kBinUpper[static_cast<std::size_t>(bin)]; }

std::string age_bin_name(AgeBin bin) {
    if (bin == AgeBin::Age70Plus) return "70+";
    return std::to_string(age_bin_lower(bin)) + "-" + std::to_string(age_bin_upper(bin));
}

std::string age_group_name(AgeGroup group) {
    if (!group.known()) return "unknown";
    if (group.hi == static_cast<std::uint8_t>(AgeBin::Age70Plus)) {
        return std::to_string(kBinLower[group.lo]) + "+";
    }
    return std::to_string(kBinLower[group.lo]) + "-" + std::to_string(kBinUpper[group.hi]);
}

std::optional<AgeGroup> parse_age_group(std::string_view text) {
    std::string t = csv::to_lower(csv::trim(text));
    if (t.empty()) return std::nullopt;
    if (t == "unknown") return AgeGroup::unknown();

    if (auto years = csv::parse_int(t)) {
        if (*years < 0) return std::nullopt;
        return AgeGroup::of(bin_age(static_cast<int>(*years)));
    }

    if (t.back() == '+') {
        auto lo = csv::parse_int(t.substr(0, t.size() - 1));
        if (!lo) return std::nullopt;
        for (int b = 0; b < kAgeBinCount; ++b) {
            if (kBinLower[b] == *lo) {
                return AgeGroup::merged(static_cast<AgeBin>(b), AgeBin::Age70Plus);
            }
        }
        return std::nullopt;
    }

    auto dash = t.find('-');
    if (dash == std::string::npos || dash == 0 || dash + 1 >= t.size()) return std::nullopt;
    auto lo = csv::parse_int(t.substr(0, dash));
    auto hi = csv::parse_int(t.substr(dash + 1));
    if (!lo || !hi || *lo > *hi) return std::nullopt;
    int lo_bin = -1;
    int hi_bin = -1;
    for (int b = 0; b < kAgeBinCount; ++b) {
        if (kBinLower[b] == *lo) lo_bin = b;
        if (kBinUpper[b] == *hi) hi_bin = b;
    }
    if (lo_bin < 0 || hi_bin < 0 || lo_bin > hi_bin) return std::nullopt;
    return AgeGroup::merged(static_cast<AgeBin>(lo_bin), static_cast<AgeBin>(hi_bin));
}

std::string gender_name(Gender gender) {
    switch (gender) {
        case Gender::Male: return "male";
        case Gender::Female: return "female";
        case Gender::OtherUncertain: return "other/uncertain";
    }
    return "?";
}

std::optional<Gender> parse_gender(std::string_view text) {
    std::string t = csv::to_lower(csv::trim(text));
    if (t == "male" || t == "m") return Gender::Male;
    if (t == "female" || t == "f") return Gender::Female;
    if (t == "other/uncertain" || t == "other-uncertain" || t == "other" || t == "uncertain") {
        return Gender::OtherUncertain;
    }
    return std::nullopt;
}

std::string race_name(Race race) {
    switch (race) {
        case Race::Asian: return "asian";
        case Race::Black: return "black";
        case Race::Indian: return "indian";
        case Race::White: return "white";
        case Race::Unlabeled: return "unlabeled";
    }
    return "?";
}

std::optional<Race> parse_race(std::string_view text) {
    std::string t = csv::to_lower(csv::trim(text));
    if (t == "asian") return Race::Asian;
    if (t == "black" || t == "black or african american" || t == "african american" ||
        t == "african-american") {
        return Race::Black;
    }
    if (t == "indian" || t == "indian or alaska native" || t == "alaska native") {
        return Race::Indian;
    }
    if (t == "white" || t == "white or caucasian" || t == "caucasian") return Race::White;
    if (t == "unlabeled") return Race::Unlabeled;
    return std::nullopt;
}

} // namespace fairsplit
