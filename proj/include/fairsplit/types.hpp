#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace fairsplit {

enum class TaskKind : std::uint8_t { Expression, ActionUnits, ValenceArousal };

std::string task_name(TaskKind task);
std::optional<TaskKind> parse_task(std::string_view text);

/// The nine age categories: 0-2, 3-9, 10-19, 20-29, 30-39, 40-49, 50-59,
/// 60-69, 70 and over.
enum class AgeBin : std::uint8_t {
    Age0To2 = 0,
    Age3To9,
    Age10To19,
    Age20To29,
    Age30To39,
    Age40To49,
    Age50To59,
    Age60To69,
    Age70Plus,
};

inline constexpr int kAgeBinCount = 9;

/// Lowest age in the bin.
int age_bin_lower(AgeBin bin);
/// Highest age in the bin; -1 for the open-ended 70+ bin.
int age_bin_upper(AgeBin bin);
std::string age_bin_name(AgeBin bin);

/// A contiguous run of age bins. Source datasets sometimes publish merged
/// groups (e.g. 3-19 covering 3-9 and 10-19); balancing and subgroup
/// statistics then operate on the groups actually present. A default
/// constructed group is "unknown" and is excluded from fairness statistics.
struct AgeGroup {
    static constexpr std::uint8_t kUnknown = 0xff;

    std::uint8_t lo = kUnknown;
    std::uint8_t hi = kUnknown;

    static AgeGroup of(AgeBin bin) {
        auto v = static_cast<std::uint8_t>(bin);
        return AgeGroup{v, v};
    }
    static AgeGroup merged(AgeBin lo, AgeBin hi) {
        return AgeGroup{static_cast<std::uint8_t>(lo), static_cast<std::uint8_t>(hi)};
    }
    static AgeGroup unknown() { return AgeGroup{}; }

    bool known() const { return lo != kUnknown; }
    bool single() const { return known() && lo == hi; }

    auto operator<=>(const AgeGroup&) const = default;
};

/// "0-2", "3-19", "70+", or "unknown".
std::string age_group_name(AgeGroup group);

/// Accepts an age in years ("42"), a bin or merged-bin label ("20-29",
/// "3-19", "70+"). Returns nullopt for anything else (including ranges whose
/// endpoints do not line up with bin boundaries).
std::optional<AgeGroup> parse_age_group(std::string_view text);

enum class Gender : std::uint8_t { Male = 0, Female, OtherUncertain };

inline constexpr int kGenderCount = 3;

std::string gender_name(Gender gender);
/// Case-insensitive. Unrecognized values return nullopt.
std::optional<Gender> parse_gender(std::string_view text);

enum class Race : std::uint8_t { Asian = 0, Black, Indian, White, Unlabeled };

inline constexpr int kRaceCount = 5;

std::string race_name(Race race);
/// Case-insensitive; accepts the long census forms ("black or african
/// american", ...). Unrecognized values return nullopt.
std::optional<Race> parse_race(std::string_view text);

} // namespace fairsplit
