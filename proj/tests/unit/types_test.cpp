#include <set>
#include <string>

#include "doctest.h"

#include "fairsplit/types.hpp"

using namespace fairsplit;

TEST_CASE("task names round-trip") {
    CHECK(parse_task("expr") == TaskKind::Expression);
    CHECK(parse_task("au") == TaskKind::ActionUnits);
    CHECK(parse_task("va") == TaskKind::ValenceArousal);
    CHECK_FALSE(parse_task("image").has_value());
    for (TaskKind task : {TaskKind::Expression, TaskKind::ActionUnits, TaskKind::ValenceArousal})
        CHECK(parse_task(task_name(task)) == task);
}

TEST_CASE("the nine age bins tile the non-negative integers") {
    CHECK(age_bin_lower(AgeBin::Age0To2) == 0);
    CHECK(age_bin_upper(AgeBin::Age0To2) == 2);
    CHECK(age_bin_lower(AgeBin::Age3To9) == 3);
    CHECK(age_bin_upper(AgeBin::Age60To69) == 69);
    CHECK(age_bin_lower(AgeBin::Age70Plus) == 70);
    CHECK(age_bin_upper(AgeBin::Age70Plus) == -1);
    // consecutive bins touch with no gap
    for (int b = 1; b < kAgeBinCount; ++b)
        CHECK(age_bin_lower(static_cast<AgeBin>(b)) ==
              age_bin_upper(static_cast<AgeBin>(b - 1)) + 1);
}

TEST_CASE("age groups parse from years, bin labels, and merged labels") {
    CHECK(parse_age_group("42") == AgeGroup::of(AgeBin::Age40To49));
    CHECK(parse_age_group("0") == AgeGroup::of(AgeBin::Age0To2));
    CHECK(parse_age_group("105") == AgeGroup::of(AgeBin::Age70Plus));
    CHECK(parse_age_group("20-29") == AgeGroup::of(AgeBin::Age20To29));
    CHECK(parse_age_group("3-19") == AgeGroup::merged(AgeBin::Age3To9, AgeBin::Age10To19));
    CHECK(parse_age_group("70+") == AgeGroup::of(AgeBin::Age70Plus));
    CHECK(parse_age_group("unknown") == AgeGroup::unknown());
    CHECK_FALSE(parse_age_group("5-12").has_value());   // endpoints off bin boundaries
    CHECK_FALSE(parse_age_group("29-20").has_value());  // reversed
    CHECK_FALSE(parse_age_group("-3").has_value());
    CHECK_FALSE(parse_age_group("young").has_value());
}

TEST_CASE("age group names round-trip") {
    for (int lo = 0; lo < kAgeBinCount; ++lo)
        for (int hi = lo; hi < kAgeBinCount; ++hi) {
            AgeGroup group = AgeGroup::merged(static_cast<AgeBin>(lo), static_cast<AgeBin>(hi));
            CHECK(parse_age_group(age_group_name(group)) == group);
        }
    CHECK(age_group_name(AgeGroup::unknown()) == "unknown");
    CHECK(age_group_name(AgeGroup::of(AgeBin::Age70Plus)) == "70+");
}

TEST_CASE("age groups order by bin range") {
    CHECK(AgeGroup::of(AgeBin::Age0To2) < AgeGroup::of(AgeBin::Age3To9));
    CHECK(AgeGroup::of(AgeBin::Age3To9) < AgeGroup::merged(AgeBin::Age3To9, AgeBin::Age10To19));
    CHECK(AgeGroup::of(AgeBin::Age70Plus) < AgeGroup::unknown()); // unknown sorts last
}

TEST_CASE("gender parsing is case-insensitive with the three protocol values") {
    CHECK(parse_gender("Male") == Gender::Male);
    CHECK(parse_gender("FEMALE") == Gender::Female);
    CHECK(parse_gender("other/uncertain") == Gender::OtherUncertain);
    CHECK(parse_gender("Other") == Gender::OtherUncertain);
    CHECK_FALSE(parse_gender("man?").has_value());
    CHECK(gender_name(Gender::Male) == "male");
    CHECK(gender_name(Gender::OtherUncertain) == "other/uncertain");
}

TEST_CASE("race parsing accepts census long forms") {
    CHECK(parse_race("Indian") == Race::Indian);
    CHECK(parse_race("asian") == Race::Asian);
    CHECK(parse_race("Black") == Race::Black);
    CHECK(parse_race("black or african american") == Race::Black);
    CHECK(parse_race("White") == Race::White);
    CHECK(parse_race("unlabeled") == Race::Unlabeled);
    CHECK_FALSE(parse_race("martian").has_value());
    for (int r = 0; r < kRaceCount; ++r) {
        const Race race = static_cast<Race>(r);
        CHECK(parse_race(race_name(race)) == race);
    }
}
