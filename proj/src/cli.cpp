#include "fairsplit/cli.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "CLI11.hpp"

#include "fairsplit/csv.hpp"
#include "fairsplit/errors.hpp"
#include "fairsplit/manifest.hpp"
#include "fairsplit/normalize.hpp"
#include "fairsplit/partition.hpp"
#include "fairsplit/report.hpp"
#include "fairsplit/types.hpp"
#include "fairsplit/version.hpp"

namespace fairsplit {
namespace {

// ---------------------------------------------------------------------------
// Shared option handling
// ---------------------------------------------------------------------------

struct SchemaOptions {
    std::string task_text;
    std::string expressions;
    std::string aus;
    std::string va_range;
    int au_threshold = 0;
};

void add_schema_options(CLI::App* cmd, SchemaOptions& opts) {
    cmd->add_option("--task", opts.task_text, "Task kind: expr, au, or va")->required();
    cmd->add_option("--expressions", opts.expressions,
                    "Comma-separated expression vocabulary (default: inferred from the data, sorted)");
    cmd->add_option("--aus", opts.aus,
                    "Comma-separated AU ids (default: taken from the manifest header)");
    cmd->add_option("--va-range", opts.va_range,
                    "Source valence/arousal annotation range as lo,hi (default -1,1)");
    cmd->add_option("--au-threshold", opts.au_threshold,
                    "AU activation threshold; an AU counts active when intensity > threshold (default 0)");
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    for (const std::string& part : csv::split_line(text)) out.push_back(csv::trim(part));
    return out;
}

std::pair<double, double> parse_va_range(const std::string& text) {
    std::vector<std::string> parts = split_list(text);
    std::optional<double> lo, hi;
    if (parts.size() == 2) {
        lo = csv::parse_double(parts[0]);
        hi = csv::parse_double(parts[1]);
    }
    if (!lo || !hi)
        throw ValidationError("invalid --va-range \"" + text + "\" (expected lo,hi)");
    if (!(*lo < *hi))
        throw ValidationError("invalid --va-range \"" + text + "\" (lo must be less than hi)");
    return {*lo, *hi};
}

ManifestSchema schema_from_options(const SchemaOptions& opts) {
    std::optional<TaskKind> task = parse_task(opts.task_text);
    if (!task)
        throw ValidationError("unknown task \"" + opts.task_text + "\" (expected expr, au, or va)");
    if (opts.au_threshold < 0 || opts.au_threshold > 4)
        throw ValidationError("--au-threshold must be between 0 and 4");

    ManifestSchema schema;
    schema.task = *task;
    if (!opts.expressions.empty()) {
        schema.expressions = split_list(opts.expressions);
        for (const std::string& name : schema.expressions)
            if (name.empty()) throw ValidationError("empty name in --expressions list");
    }
    if (!opts.aus.empty()) {
        for (const std::string& part : split_list(opts.aus)) {
            std::optional<std::int64_t> id = csv::parse_int(part);
            if (!id || *id < 0)
                throw ValidationError("invalid AU id \"" + part + "\" in --aus list");
            schema.au_ids.push_back(static_cast<int>(*id));
        }
    }
    if (!opts.va_range.empty()) schema.va_range = parse_va_range(opts.va_range);
    return schema;
}

// Loads a manifest under the given schema options, forwards load warnings to
// stderr, and normalizes it (AU binarization / VA rescale onto [-1,1]).
Manifest load_normalized(const std::string& path, const SchemaOptions& opts) {
    ManifestSchema schema = schema_from_options(opts);
    Manifest manifest = load_manifest(path, schema);
    for (const std::string& warning : manifest.warnings)
        std::cerr << "fairsplit: warning: " << warning << '\n';
    NormalizeOptions norm;
    norm.au_threshold = opts.au_threshold;
    return normalize_manifest(manifest, norm);
}

// Restricts a manifest to the samples a split file assigns to `set`. Every
// manifest sample must be covered by the split file; split rows for unknown
// samples are tolerated with a warning so a split of a superset manifest can
// still be applied.
Manifest filter_to_set(const Manifest& manifest, const std::string& split_path, int set) {
    std::vector<std::pair<std::string, int>> rows = load_split(split_path);
    std::unordered_map<std::string, int> by_id;
    by_id.reserve(rows.size());
    for (const auto& [id, assigned] : rows) by_id.emplace(id, assigned);

    Manifest out;
    out.schema = manifest.schema;
    out.au_binarized = manifest.au_binarized;
    std::size_t matched = 0;
    for (const Sample& sample : manifest.samples) {
        auto it = by_id.find(sample.sample_id);
        if (it == by_id.end())
            throw ValidationError("split file does not cover sample_id \"" + sample.sample_id + "\"");
        ++matched;
        if (it->second == set) out.samples.push_back(sample);
    }
    if (rows.size() > matched)
        std::cerr << "fairsplit: warning: split file lists " << (rows.size() - matched)
                  << " sample(s) not present in the manifest\n";
    return out;
}

const char* label_dimension_name(TaskKind task) {
    switch (task) {
        case TaskKind::Expression: return "expression";
        case TaskKind::ActionUnits: return "au_active";
        case TaskKind::ValenceArousal: return "va_cell";
    }
    return "label";
}

void print_aligned(std::ostream& out, const std::vector<std::array<std::string, 4>>& rows) {
    std::array<std::size_t, 4> width{};
    for (const auto& row : rows)
        for (std::size_t c = 0; c < 4; ++c) width[c] = std::max(width[c], row[c].size());
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < 4; ++c) {
            if (c > 0) out << "  ";
            if (c < 2) { // text columns left-aligned, numeric columns right-aligned
                out << row[c] << std::string(width[c] - row[c].size(), ' ');
            } else {
                out << std::string(width[c] - row[c].size(), ' ') << row[c];
            }
        }
        out << '\n';
    }
}

void write_text_output(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream stream(out_path, std::ios::binary);
    if (!stream) throw IoError("cannot open \"" + out_path + "\" for writing");
    stream << text;
    stream.close();
    if (stream.fail()) throw IoError("failed writing \"" + out_path + "\"");
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

struct ValidateArgs {
    std::string manifest_path;
    SchemaOptions schema;
};

void run_validate(const ValidateArgs& args) {
    Manifest manifest = load_normalized(args.manifest_path, args.schema);
    Strata strata = build_strata(manifest);
    std::vector<SubjectGroup> groups = group_subjects(manifest, strata);

    std::cout << "manifest: " << args.manifest_path << '\n'
              << "task: " << task_name(manifest.schema.task) << '\n'
              << "samples: " << manifest.size() << '\n'
              << "subjects: " << groups.size() << '\n'
              << "label categories: " << strata.label_count << "\n\n";

    const double total = static_cast<double>(strata.total_samples);
    auto share = [&](std::int64_t count) {
        return total > 0 ? format_percent(static_cast<double>(count) / total) : std::string("0.0");
    };

    std::vector<std::array<std::string, 4>> rows;
    rows.push_back({"dimension", "category", "count", "share%"});
    rows.push_back({"---------", "--------", "-----", "------"});
    const char* label_dim = label_dimension_name(manifest.schema.task);
    for (std::size_t c = 0; c < strata.label_count; ++c)
        rows.push_back({label_dim, strata.label_names[c], std::to_string(strata.global[c]),
                        share(strata.global[c])});
    std::size_t offset = strata.dimension_offset(Dimension::Age);
    for (std::size_t i = 0; i < strata.age_count(); ++i)
        rows.push_back({"age", age_group_name(strata.age_categories[i]),
                        std::to_string(strata.global[offset + i]), share(strata.global[offset + i])});
    offset = strata.dimension_offset(Dimension::Gender);
    for (int g = 0; g < kGenderCount; ++g)
        rows.push_back({"gender", gender_name(static_cast<Gender>(g)),
                        std::to_string(strata.global[offset + g]), share(strata.global[offset + g])});
    offset = strata.dimension_offset(Dimension::Race);
    for (int r = 0; r < kRaceCount; ++r)
        rows.push_back({"race", race_name(static_cast<Race>(r)),
                        std::to_string(strata.global[offset + r]), share(strata.global[offset + r])});
    print_aligned(std::cout, rows);
}

struct ConsolidateArgs {
    std::string rater_a;
    std::string rater_b;
    std::string out_dir;
};

void run_consolidate(const ConsolidateArgs& args) {
    RaterTable a = load_rater_table(args.rater_a);
    RaterTable b = load_rater_table(args.rater_b);
    ConsolidationResult result = consolidate_annotations(a, b);
    write_consolidation(result, args.out_dir);
    std::cerr << "fairsplit: " << result.consensus.size() << " sample(s), "
              << result.consensus_field_count() << " consensus field(s), "
              << result.disagreements.size() << " disagreement(s) written to " << args.out_dir
              << '\n';
}

struct SplitArgs {
    std::string manifest_path;
    SchemaOptions schema;
    std::string out_dir;
    std::string config_path;
    std::uint64_t seed = 0;
    std::string fractions;
    std::string weights;
    std::int64_t move_budget = 0;
    std::int64_t patience = 0;
    int restarts = 0;

    CLI::Option* seed_opt = nullptr;
    CLI::Option* move_budget_opt = nullptr;
    CLI::Option* patience_opt = nullptr;
    CLI::Option* restarts_opt = nullptr;
};

void run_split(const SplitArgs& args) {
    PartitionConfig config;
    if (!args.config_path.empty()) config = load_partition_config(args.config_path);
    if (args.seed_opt->count() > 0) config.seed = args.seed;
    if (!args.fractions.empty()) config.fractions = parse_fraction_list(args.fractions);
    if (!args.weights.empty()) apply_weight_list(config, args.weights);
    if (args.move_budget_opt->count() > 0) config.move_budget = args.move_budget;
    if (args.patience_opt->count() > 0) config.patience = args.patience;
    if (args.restarts_opt->count() > 0) config.restarts = args.restarts;

    Manifest manifest = load_normalized(args.manifest_path, args.schema);
    PartitionAssignment assignment = solve_partition(manifest, config);
    for (const std::string& warning : assignment.warnings)
        std::cerr << "fairsplit: warning: " << warning << '\n';
    SplitFiles files = emit_split(assignment, manifest, args.out_dir);

    std::cerr << "fairsplit: objective " << csv::format_double(assignment.objective_value)
              << ", set sizes " << assignment.set_sizes[0] << '/' << assignment.set_sizes[1] << '/'
              << assignment.set_sizes[2] << " (" << format_percent(assignment.achieved_fractions[0])
              << "%/" << format_percent(assignment.achieved_fractions[1]) << "%/"
              << format_percent(assignment.achieved_fractions[2]) << "%)\n";
    std::cerr << "fairsplit: wrote " << files.split_csv.string() << ", "
              << files.statistics_csv.string() << ", " << files.run_meta_json.string() << '\n';
}

struct EvaluateArgs {
    std::string manifest_path;
    SchemaOptions schema;
    std::string predictions_path;
    std::string split_path;
    std::string set_text = "test";
    std::string model = "model";
    bool weighted = false;
    std::string out_path;
};

void run_evaluate(const EvaluateArgs& args) {
    Manifest manifest = load_normalized(args.manifest_path, args.schema);

    std::string set_filter;
    std::unordered_set<std::string> out_of_set_ids;
    if (!args.split_path.empty()) {
        std::optional<int> set = parse_set_name(args.set_text);
        if (!set)
            throw ValidationError("unknown set \"" + args.set_text +
                                  "\" (expected train, valid, or test)");
        for (const Sample& sample : manifest.samples) out_of_set_ids.insert(sample.sample_id);
        manifest = filter_to_set(manifest, args.split_path, *set);
        for (const Sample& sample : manifest.samples) out_of_set_ids.erase(sample.sample_id);
        set_filter = set_name(*set);
    }

    PredictionSet predictions =
        load_predictions(args.predictions_path, manifest.schema.task, manifest.schema.au_ids);
    if (!set_filter.empty()) {
        // A prediction file normally covers the whole manifest; rows for
        // samples outside the chosen set are out of scope, not errors.
        std::vector<PredictionRecord> kept;
        kept.reserve(predictions.records.size());
        std::size_t skipped = 0;
        for (PredictionRecord& record : predictions.records) {
            if (out_of_set_ids.count(record.sample_id) != 0) {
                ++skipped;
            } else {
                kept.push_back(std::move(record));
            }
        }
        predictions.records = std::move(kept);
        if (skipped > 0)
            std::cerr << "fairsplit: note: ignored " << skipped
                      << " prediction(s) for samples outside the " << set_filter << " set\n";
    }
    JoinedEvaluationSet joined = join_predictions(manifest, predictions);
    if (!joined.missing.empty())
        std::cerr << "fairsplit: warning: " << joined.missing.size()
                  << " manifest sample(s) have no prediction\n";

    ReportInputs inputs;
    inputs.model = args.model;
    inputs.weighted = args.weighted;
    inputs.manifest_path = args.manifest_path;
    inputs.predictions_path = args.predictions_path;
    inputs.split_path = args.split_path;
    inputs.set_filter = set_filter;
    inputs.au_threshold = args.schema.au_threshold;
    if (!args.schema.va_range.empty()) inputs.va_range = parse_va_range(args.schema.va_range);
    EvaluationReport report = build_report(joined, inputs);

    if (args.out_path.empty()) {
        std::cout << report_to_json(report);
    } else {
        write_report(report, args.out_path);
        std::cerr << "fairsplit: wrote " << args.out_path << '\n';
    }
}

struct ReportArgs {
    std::vector<std::string> inputs;
    std::string format_text = "table";
    std::string out_path;
};

void run_report(const ReportArgs& args) {
    std::optional<RenderFormat> format = parse_render_format(args.format_text);
    if (!format)
        throw ValidationError("unknown format \"" + args.format_text +
                              "\" (expected table or json)");
    std::vector<EvaluationReport> reports;
    reports.reserve(args.inputs.size());
    for (const std::string& path : args.inputs) reports.push_back(load_report(path));
    write_text_output(render_reports(reports, *format), args.out_path);
}

} // namespace

int run(int argc, const char* const* argv) {
    CLI::App app{"Subject-independent dataset partitioning and fairness-aware evaluation"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    ValidateArgs validate_args;
    CLI::App* validate_cmd =
        app.add_subcommand("validate", "Check a manifest and print its marginal statistics");
    validate_cmd->add_option("--manifest", validate_args.manifest_path, "Manifest CSV file")
        ->required();
    add_schema_options(validate_cmd, validate_args.schema);
    validate_cmd->callback([&validate_args] { run_validate(validate_args); });

    ConsolidateArgs consolidate_args;
    CLI::App* consolidate_cmd = app.add_subcommand(
        "consolidate", "Merge two rater annotation files into consensus and disagreements");
    consolidate_cmd->add_option("--rater-a", consolidate_args.rater_a, "First rater CSV file")
        ->required();
    consolidate_cmd->add_option("--rater-b", consolidate_args.rater_b, "Second rater CSV file")
        ->required();
    consolidate_cmd->add_option("--out", consolidate_args.out_dir, "Output directory")->required();
    consolidate_cmd->callback([&consolidate_args] { run_consolidate(consolidate_args); });

    SplitArgs split_args;
    CLI::App* split_cmd = app.add_subcommand(
        "split", "Solve a subject-independent train/valid/test partition and write split files");
    split_cmd->add_option("--manifest", split_args.manifest_path, "Manifest CSV file")->required();
    add_schema_options(split_cmd, split_args.schema);
    split_cmd->add_option("--out", split_args.out_dir, "Output directory")->required();
    split_cmd->add_option("--config", split_args.config_path,
                          "Partition config file (key = value lines); flags override it");
    split_args.seed_opt = split_cmd->add_option("--seed", split_args.seed, "Solver seed (default 0)");
    split_cmd->add_option("--fractions", split_args.fractions,
                          "Target fractions as train,valid,test (default 0.55,0.15,0.30)");
    split_cmd->add_option("--weights", split_args.weights,
                          "Objective weights as name=value,... (names: size, label, age, gender, race)");
    split_args.move_budget_opt = split_cmd->add_option(
        "--move-budget", split_args.move_budget, "Local-search move budget per restart (default 100000)");
    split_args.patience_opt = split_cmd->add_option(
        "--patience", split_args.patience,
        "Consecutive rejected moves before a restart stops (default 10000)");
    split_args.restarts_opt =
        split_cmd->add_option("--restarts", split_args.restarts, "Restart count (default 8)");
    split_cmd->callback([&split_args] { run_split(split_args); });

    EvaluateArgs evaluate_args;
    CLI::App* evaluate_cmd = app.add_subcommand(
        "evaluate", "Score a prediction file against manifest truth and write a report");
    evaluate_cmd->add_option("--manifest", evaluate_args.manifest_path, "Manifest CSV file")
        ->required();
    add_schema_options(evaluate_cmd, evaluate_args.schema);
    evaluate_cmd->add_option("--predictions", evaluate_args.predictions_path, "Prediction CSV file")
        ->required();
    CLI::Option* split_opt =
        evaluate_cmd->add_option("--split", evaluate_args.split_path, "Split CSV to filter by");
    evaluate_cmd->add_option("--set", evaluate_args.set_text,
                             "Set to evaluate when --split is given (default test)")
        ->needs(split_opt);
    evaluate_cmd->add_option("--model", evaluate_args.model, "Model name recorded in the report");
    evaluate_cmd->add_flag("--weighted", evaluate_args.weighted,
                           "Sample-weighted subgroup mean instead of unweighted");
    evaluate_cmd->add_option("--out", evaluate_args.out_path,
                             "Report JSON path (default: standard output)");
    evaluate_cmd->callback([&evaluate_args] { run_evaluate(evaluate_args); });

    ReportArgs report_args;
    CLI::App* report_cmd =
        app.add_subcommand("report", "Render one or more report JSON files as a table or JSON");
    report_cmd->add_option("inputs", report_args.inputs, "Report JSON files")->required();
    report_cmd->add_option("--format", report_args.format_text, "Output format: table or json");
    report_cmd->add_option("--out", report_args.out_path, "Output path (default: standard output)");
    report_cmd->callback([&report_args] { run_report(report_args); });

    try {
        app.parse(argc, argv);
        return 0;
    } catch (const CLI::Success& e) {
        return app.exit(e); // --help / --version print to stdout and exit 0
    } catch (const CLI::ParseError& e) {
        std::cerr << "fairsplit: error: " << e.what() << '\n';
        std::cerr << "run 'fairsplit --help' for usage\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "fairsplit: error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "fairsplit: error: " << e.what() << '\n';
        return 1;
    }
}

} // namespace fairsplit
