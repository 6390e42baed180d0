#include <algorithm>
#include <string>
#include <vector>

#include "doctest.h"

#include "fairsplit/errors.hpp"
#include "fairsplit/manifest.hpp"
#include "fairsplit/normalize.hpp"
#include "support/temp_dir.hpp"

using namespace fairsplit;
using testsupport::TempDir;
using testsupport::write_file;

namespace {

ManifestSchema expression_schema() {
    ManifestSchema schema;
    schema.task = TaskKind::Expression;
    return schema;
}

// true iff `action` throws ValidationError whose message mentions `needle`
template <typename Action>
bool fails_mentioning(Action action, const std::string& needle) {
    try {
        action();
    } catch (const ValidationError& error) {
        return std::string(error.what()).find(needle) != std::string::npos;
    }
    return false;
}

} // namespace

TEST_CASE("a header-only manifest loads as zero samples") {
    TempDir dir;
    write_file(dir.file("m.csv"), "sample_id,expression,age,gender,race\n");
    Manifest manifest = load_manifest(dir.file("m.csv"), expression_schema());
    CHECK(manifest.size() == 0);
}

TEST_CASE("rows parse into samples with canonical demographics") {
    TempDir dir;
    write_file(dir.file("m.csv"),
               "sample_id,subject_id,expression,age,gender,race\n"
               "img1,subj1,Happiness,25,Female,Indian\n"
               "img2,subj1,Sadness,70,MALE,black or african american\n"
               "img3,,Happiness,3-19,other,\n");
    Manifest manifest = load_manifest(dir.file("m.csv"), expression_schema());
    REQUIRE(manifest.size() == 3);
    CHECK(manifest.samples[0].race == Race::Indian);
    CHECK(manifest.samples[0].age == parse_age_group("20-29"));
    CHECK(manifest.samples[0].gender == Gender::Female);
    CHECK(manifest.samples[0].subject_id == "subj1");
    CHECK(manifest.samples[1].race == Race::Black);
    CHECK(manifest.samples[1].age == parse_age_group("70+"));
    CHECK(manifest.samples[2].age == parse_age_group("3-19"));
    CHECK(manifest.samples[2].gender == Gender::OtherUncertain);
    CHECK(manifest.samples[2].race == Race::Unlabeled);
    // vocabulary inferred sorted from the data
    CHECK(manifest.schema.expressions == std::vector<std::string>{"happiness", "sadness"});
    CHECK(manifest.samples[0].expression == 0);
    CHECK(manifest.samples[1].expression == 1);
}

TEST_CASE("duplicate sample ids fail with the offenders named") {
    TempDir dir;
    write_file(dir.file("m.csv"),
               "sample_id,expression,age,gender,race\n"
               "img_001,Happiness,25,Female,White\n"
               "img_001,Sadness,30,Male,White\n");
    CHECK(fails_mentioning([&] { load_manifest(dir.file("m.csv"), expression_schema()); },
                           "img_001"));
}

TEST_CASE("missing required columns are named in the error") {
    TempDir dir;
    write_file(dir.file("m.csv"), "expression,age\nHappiness,25\n");
    CHECK(fails_mentioning([&] { load_manifest(dir.file("m.csv"), expression_schema()); },
                           "sample_id"));
    write_file(dir.file("m2.csv"), "sample_id,age,gender,race\ns1,25,Female,White\n");
    CHECK(fails_mentioning([&] { load_manifest(dir.file("m2.csv"), expression_schema()); },
                           "expression"));
    // demographic columns are part of the contract, not optional extras
    write_file(dir.file("m3.csv"), "sample_id,expression,age,race\ns1,Happiness,25,White\n");
    CHECK(fails_mentioning([&] { load_manifest(dir.file("m3.csv"), expression_schema()); },
                           "gender"));
}

TEST_CASE("malformed rows carry their line number") {
    TempDir dir;
    write_file(dir.file("m.csv"),
               "sample_id,valence,arousal,age,gender,race\n"
               "v1,0.5,0.5,20,Female,White\n"
               "v2,not_a_number,0.0,30,Male,Asian\n");
    ManifestSchema schema;
    schema.task = TaskKind::ValenceArousal;
    CHECK(fails_mentioning([&] { load_manifest(dir.file("m.csv"), schema); }, ":3:"));
}

TEST_CASE("unrecognized demographic values become unlabeled with a warning") {
    TempDir dir;
    write_file(dir.file("m.csv"),
               "sample_id,expression,age,gender,race\n"
               "s1,Happiness,xyz,robot,martian\n");
    Manifest manifest = load_manifest(dir.file("m.csv"), expression_schema());
    CHECK(manifest.samples[0].age == AgeGroup::unknown());
    CHECK(manifest.samples[0].gender == Gender::OtherUncertain);
    CHECK(manifest.samples[0].race == Race::Unlabeled);
    CHECK(manifest.warnings.size() == 3);
}

TEST_CASE("a declared vocabulary pins category indices and rejects strangers") {
    TempDir dir;
    write_file(dir.file("m.csv"),
               "sample_id,expression,age,gender,race\n"
               "s1,surprise,20,Female,White\n");
    ManifestSchema schema = expression_schema();
    schema.expressions = {"neutral", "happiness", "surprise"};
    Manifest manifest = load_manifest(dir.file("m.csv"), schema);
    CHECK(manifest.samples[0].expression == 2);

    schema.expressions = {"neutral", "happiness"};
    CHECK(fails_mentioning([&] { load_manifest(dir.file("m.csv"), schema); }, "surprise"));
}

TEST_CASE("loading is order-independent up to sample order") {
    const std::string header = "sample_id,expression,age,gender,race\n";
    const std::string row_a = "a,Anger,20,Male,White\n";
    const std::string row_b = "b,Fear,30,Female,Asian\n";
    const std::string row_c = "c,Anger,40,Male,Black\n";
    TempDir dir;
    write_file(dir.file("fwd.csv"), header + row_a + row_b + row_c);
    write_file(dir.file("rev.csv"), header + row_c + row_b + row_a);
    Manifest forward = load_manifest(dir.file("fwd.csv"), expression_schema());
    Manifest reverse = load_manifest(dir.file("rev.csv"), expression_schema());
    CHECK(forward.schema == reverse.schema);
    auto by_id = [](const Sample& x, const Sample& y) { return x.sample_id < y.sample_id; };
    std::sort(forward.samples.begin(), forward.samples.end(), by_id);
    std::sort(reverse.samples.begin(), reverse.samples.end(), by_id);
    CHECK(forward.samples == reverse.samples);
}

TEST_CASE("manifests round-trip through write_manifest") {
    TempDir dir;
    write_file(dir.file("m.csv"),
               "sample_id,subject_id,au_1,au_2,au_12,age,gender,race\n"
               "s1,p1,0,3,5,25,Female,White\n"
               "s2,p1,1,0,0,25,Female,White\n"
               "s3,,2,2,1,70+,Male,Asian\n");
    ManifestSchema schema;
    schema.task = TaskKind::ActionUnits;
    Manifest manifest = load_manifest(dir.file("m.csv"), schema);
    CHECK(manifest.schema.au_ids == std::vector<int>{1, 2, 12});
    CHECK_FALSE(manifest.au_binarized);
    write_manifest(manifest, dir.file("out.csv"));
    Manifest reloaded = load_manifest(dir.file("out.csv"), manifest.schema);
    CHECK(reloaded.samples == manifest.samples);
    CHECK(reloaded.warnings.empty());
}

TEST_CASE("an all-binary AU manifest is recognized as already binarized") {
    TempDir dir;
    write_file(dir.file("m.csv"),
               "sample_id,au_1,au_2,age,gender,race\n"
               "s1,0,1,25,Female,White\n"
               "s2,1,0,30,Male,Asian\n");
    ManifestSchema schema;
    schema.task = TaskKind::ActionUnits;
    Manifest manifest = load_manifest(dir.file("m.csv"), schema);
    CHECK(manifest.au_binarized);
}

TEST_CASE("valence/arousal values must lie inside the declared source range") {
    TempDir dir;
    write_file(dir.file("m.csv"),
               "sample_id,valence,arousal,age,gender,race\n"
               "v1,5.0,-3.0,20,Female,White\n");
    ManifestSchema schema;
    schema.task = TaskKind::ValenceArousal;
    CHECK_THROWS_AS(load_manifest(dir.file("m.csv"), schema), ValidationError);
    schema.va_range = {-10.0, 10.0};
    Manifest manifest = load_manifest(dir.file("m.csv"), schema);
    CHECK(manifest.samples[0].valence == 5.0);
}

namespace {

Manifest normalized_expression_manifest(TempDir& dir) {
    write_file(dir.file("truth.csv"),
               "sample_id,expression,age,gender,race\n"
               "e1,Happiness,20,Female,White\n"
               "e2,Sadness,30,Male,Asian\n"
               "e3,Happiness,40,Female,Black\n");
    return normalize_manifest(load_manifest(dir.file("truth.csv"), expression_schema()));
}

} // namespace

TEST_CASE("joins align predictions with truth and report the missing") {
    TempDir dir;
    Manifest manifest = normalized_expression_manifest(dir);
    write_file(dir.file("pred.csv"),
               "sample_id,pred_expression\n"
               "e1,Sadness\n"
               "e3,happiness\n");
    PredictionSet predictions = load_predictions(dir.file("pred.csv"), TaskKind::Expression);
    JoinedEvaluationSet joined = join_predictions(manifest, predictions);
    REQUIRE(joined.size() == 2);
    CHECK(joined.sample_ids == std::vector<std::string>{"e1", "e3"});
    CHECK(joined.truth_expression == std::vector<int>{0, 0});
    CHECK(joined.pred_expression == std::vector<int>{1, 0});
    CHECK(joined.missing == std::vector<std::string>{"e2"});
    CHECK(joined.coverage() == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("full prediction coverage joins at coverage 1") {
    TempDir dir;
    Manifest manifest = normalized_expression_manifest(dir);
    write_file(dir.file("pred.csv"),
               "sample_id,pred_expression\n"
               "e1,Happiness\ne2,Sadness\ne3,Happiness\n");
    JoinedEvaluationSet joined = join_predictions(
        manifest, load_predictions(dir.file("pred.csv"), TaskKind::Expression));
    CHECK(joined.coverage() == 1.0);
    CHECK(joined.missing.empty());
}

TEST_CASE("integer expression predictions resolve as category indices") {
    TempDir dir;
    Manifest manifest = normalized_expression_manifest(dir);
    write_file(dir.file("pred.csv"),
               "sample_id,pred_expression\n"
               "e1,1\ne2,0\ne3,1\n");
    JoinedEvaluationSet joined = join_predictions(
        manifest, load_predictions(dir.file("pred.csv"), TaskKind::Expression));
    CHECK(joined.pred_expression == std::vector<int>{1, 0, 1});
    // an unknown label is rejected
    write_file(dir.file("bad.csv"), "sample_id,pred_expression\ne1,Confusion\n");
    CHECK_THROWS_AS(
        join_predictions(manifest, load_predictions(dir.file("bad.csv"), TaskKind::Expression)),
        ValidationError);
}

TEST_CASE("predictions for unknown samples are rejected") {
    TempDir dir;
    Manifest manifest = normalized_expression_manifest(dir);
    write_file(dir.file("pred.csv"), "sample_id,pred_expression\nghost,Happiness\n");
    CHECK(fails_mentioning(
        [&] {
            join_predictions(manifest,
                             load_predictions(dir.file("pred.csv"), TaskKind::Expression));
        },
        "ghost"));
}

TEST_CASE("prediction task shape must match the manifest task") {
    TempDir dir;
    Manifest manifest = normalized_expression_manifest(dir);
    write_file(dir.file("pred.csv"), "sample_id,pred_valence,pred_arousal\ne1,0.5,0.5\n");
    PredictionSet predictions = load_predictions(dir.file("pred.csv"), TaskKind::ValenceArousal);
    CHECK(fails_mentioning([&] { join_predictions(manifest, predictions); }, "task"));
}

TEST_CASE("AU predictions must cover exactly the manifest's AU columns") {
    TempDir dir;
    write_file(dir.file("truth.csv"),
               "sample_id,au_1,au_2,age,gender,race\n"
               "a1,1,0,20,Female,White\n"
               "a2,0,1,30,Male,Asian\n");
    ManifestSchema schema;
    schema.task = TaskKind::ActionUnits;
    Manifest manifest = normalize_manifest(load_manifest(dir.file("truth.csv"), schema));

    write_file(dir.file("good.csv"), "sample_id,pred_au_1,pred_au_2\na1,1,1\na2,0,1\n");
    JoinedEvaluationSet joined = join_predictions(
        manifest, load_predictions(dir.file("good.csv"), TaskKind::ActionUnits));
    CHECK(joined.au_count == 2);
    CHECK(joined.truth_aus == std::vector<std::uint8_t>{1, 0, 0, 1});
    CHECK(joined.pred_aus == std::vector<std::uint8_t>{1, 1, 0, 1});

    // wrong AU set → shape mismatch
    write_file(dir.file("bad.csv"), "sample_id,pred_au_1\na1,1\na2,0\n");
    CHECK_THROWS_AS(
        join_predictions(manifest, load_predictions(dir.file("bad.csv"), TaskKind::ActionUnits)),
        ValidationError);
}

TEST_CASE("duplicate prediction rows are rejected") {
    TempDir dir;
    write_file(dir.file("pred.csv"), "sample_id,pred_expression\ne1,Happiness\ne1,Sadness\n");
    CHECK_THROWS_AS(load_predictions(dir.file("pred.csv"), TaskKind::Expression), ValidationError);
}
