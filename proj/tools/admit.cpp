#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "admitml/evaluation.hpp"
#include "admitml/explain.hpp"
#include "admitml/fairness.hpp"
#include "admitml/features.hpp"
#include "admitml/ingest.hpp"
#include "admitml/llm.hpp"
#include "admitml/model.hpp"
#include "admitml/pipeline.hpp"
#include "admitml/report.hpp"
#include "admitml/rng.hpp"
#include "admitml/splits.hpp"
#include "admitml/synthetic.hpp"
#include "admitml/table.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace admitml;

namespace {

constexpr const char* kTokenEnvVar = "ADMITML_SCORER_TOKEN";

struct Common {
    std::string config_path;
    std::string out_dir = ".";
    std::uint64_t seed = 0;
    CLI::Option* seed_option = nullptr;
};

void add_common(CLI::App* cmd, Common& common) {
    cmd->add_option("--config", common.config_path, "pipeline config JSON file");
    cmd->add_option("--out", common.out_dir, "output directory")
        ->capture_default_str();
    common.seed_option =
        cmd->add_option("--seed", common.seed, "random seed (overrides the config)");
}

// Config file (or built-in defaults), seed flag, and the scorer credential
// from the environment; the token never passes through config files.
PipelineConfig load_config(const Common& common) {
    PipelineConfig config = common.config_path.empty()
                                ? parse_pipeline_config("{}")
                                : parse_pipeline_config_file(common.config_path);
    if (common.seed_option != nullptr && common.seed_option->count() > 0) {
        config.seed = common.seed;
    }
    if (const char* token = std::getenv(kTokenEnvVar)) {
        config.llm.remote.auth_token = token;
    }
    return config;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot read '" + path + "'");
    }
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

fs::path prepare_out_dir(const Common& common) {
    fs::path dir(common.out_dir);
    fs::create_directories(dir);
    return dir;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out.good()) {
        throw std::runtime_error("cannot write '" + path.string() + "'");
    }
}

// Shortest representation that parses back to the same double.
std::string number_text(double value) { return json(value).dump(); }

std::string csv_field(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string quoted = "\"";
    for (char c : field) {
        quoted += c;
        if (c == '"') quoted += '"';
    }
    quoted += '"';
    return quoted;
}

void print_warnings(const std::vector<std::string>& warnings) {
    for (const std::string& warning : warnings) {
        std::cerr << "warning: " << warning << "\n";
    }
}

std::vector<int> binary_labels(const DataTable& table, const std::string& column) {
    const std::size_t idx = table.column_index(column);
    std::vector<int> labels;
    labels.reserve(table.row_count());
    for (std::size_t r = 0; r < table.row_count(); ++r) {
        const Cell& cell = table.at(r, idx);
        if (cell.is_missing() || !cell.is_number() ||
            (cell.number() != 0.0 && cell.number() != 1.0)) {
            throw std::runtime_error("column '" + column + "' must be binary 0/1 at row " +
                                     std::to_string(r));
        }
        labels.push_back(cell.number() == 1.0 ? 1 : 0);
    }
    return labels;
}

json metrics_json(const Metrics& m) {
    json out;
    out["tp"] = m.tp;
    out["fp"] = m.fp;
    out["fn"] = m.fn;
    out["tn"] = m.tn;
    out["accuracy"] = m.accuracy;
    out["precision"] = m.precision;
    out["recall"] = m.recall;
    out["f1"] = m.f1;
    out["precision_defined"] = m.precision_defined;
    out["recall_defined"] = m.recall_defined;
    out["f1_defined"] = m.f1_defined;
    out["auroc"] = m.auroc ? json(*m.auroc) : json(nullptr);
    return out;
}

json fairness_json(const FairnessReport& report) {
    json attributes = json::array();
    for (const AttributeAudit& audit : report.attributes) {
        json groups = json::array();
        for (const GroupStats& g : audit.groups) {
            json row;
            row["group"] = g.group;
            row["support"] = g.count;
            row["selection_rate"] = g.selection_rate;
            row["base_rate"] = g.base_rate;
            row["tpr"] = g.usable ? json(g.tpr) : json(nullptr);
            row["fpr"] = g.usable ? json(g.fpr) : json(nullptr);
            row["usable"] = g.usable;
            groups.push_back(std::move(row));
        }
        json entry;
        entry["attribute"] = audit.attribute;
        entry["dp_gap"] = audit.dp_gap;
        entry["eo_gap"] = audit.eo_gap;
        entry["flagged"] = audit.flagged;
        entry["warnings"] = audit.warnings;
        entry["groups"] = std::move(groups);
        attributes.push_back(std::move(entry));
    }
    json out;
    out["tau"] = report.tau;
    out["attributes"] = std::move(attributes);
    return out;
}

json explanation_json(const Explanation& explanation) {
    json entries = json::array();
    for (const ImportanceEntry& entry : explanation.entries) {
        json row;
        row["feature"] = entry.feature;
        row["importance"] = entry.importance;
        row["rank"] = entry.rank;
        row["signed_weight"] = entry.signed_weight ? json(*entry.signed_weight) : json(nullptr);
        entries.push_back(std::move(row));
    }
    json out;
    out["method"] = explanation.method;
    out["repeats"] = explanation.repeats;
    out["seed"] = explanation.seed;
    out["entries"] = std::move(entries);
    return out;
}

void print_fairness_summary(const FairnessReport& report) {
    for (const AttributeAudit& audit : report.attributes) {
        std::cout << audit.attribute << ": demographic parity gap " << number_text(audit.dp_gap)
                  << ", equalized odds gap " << number_text(audit.eo_gap)
                  << (audit.flagged ? " [flagged]" : "") << "\n";
    }
}

// ---------------------------------------------------------------------------
// Subcommands. Each consumes and produces plain files so any stage can be
// inspected or rerun on its own.

struct GenerateArgs {
    Common common;
    SyntheticConfig synthetic;
    CLI::Option* rows = nullptr;
    CLI::Option* anomalies = nullptr;
    CLI::Option* gender_bias = nullptr;
    CLI::Option* parental_bias = nullptr;
    CLI::Option* noise_sd = nullptr;
};

void run_generate(const GenerateArgs& args) {
    const PipelineConfig config = load_config(args.common);
    SyntheticConfig synthetic = config.source.synthetic.value_or(SyntheticConfig{});
    if (args.rows->count() > 0) synthetic.rows = args.synthetic.rows;
    if (args.anomalies->count() > 0) synthetic.anomaly_count = args.synthetic.anomaly_count;
    if (args.gender_bias->count() > 0) synthetic.gender_bias = args.synthetic.gender_bias;
    if (args.parental_bias->count() > 0) synthetic.parental_bias = args.synthetic.parental_bias;
    if (args.noise_sd->count() > 0) synthetic.noise_sd = args.synthetic.noise_sd;

    const DataTable table = generate_synthetic(synthetic, config.seed);
    const fs::path out = prepare_out_dir(args.common);
    write_csv_file(table, (out / "data.csv").string());
    std::cout << "wrote " << (out / "data.csv").string() << " (" << table.row_count()
              << " rows)\n";
}

struct CleanArgs {
    Common common;
    std::vector<std::string> inputs;
};

void run_clean(const CleanArgs& args) {
    PipelineConfig config = load_config(args.common);
    if (!args.inputs.empty()) {
        config.source.csv_paths = args.inputs;
        config.source.synthetic.reset();
    }
    PreparedData prep = prepare_data(config);
    print_warnings(prep.warnings);
    const CleaningResult cleaned = clean_anomalies(prep.table, config.cleaning);

    const fs::path out = prepare_out_dir(args.common);
    write_csv_file(prep.table, (out / "uncleaned.csv").string());
    write_csv_file(cleaned.table, (out / "cleaned.csv").string());
    write_text(out / "cleaning_log.json", cleaned.log.to_json_string() + "\n");
    std::cout << "removed " << (cleaned.log.rows_before - cleaned.log.rows_after) << " of "
              << cleaned.log.rows_before << " rows; cleaned data in "
              << (out / "cleaned.csv").string() << "\n";
}

struct AugmentArgs {
    Common common;
    std::string input;
    std::string scorer;
    std::string template_text;
    CLI::Option* scorer_option = nullptr;
    CLI::Option* template_option = nullptr;
};

void run_augment(const AugmentArgs& args) {
    PipelineConfig config = load_config(args.common);
    if (args.scorer_option->count() > 0) config.llm.scorer = args.scorer;
    if (args.template_option->count() > 0) config.llm.template_text = args.template_text;

    DataTable table = parse_csv_file(args.input);
    const std::string& template_text = config.llm.template_text.empty()
                                           ? default_statement_template()
                                           : config.llm.template_text;
    const std::unique_ptr<Scorer> scorer = make_scorer(config.llm, table);

    std::vector<std::string> statements;
    statements.reserve(table.row_count());
    for (std::size_t r = 0; r < table.row_count(); ++r) {
        statements.push_back(render_statement(table, r, template_text));
    }
    const std::vector<LlmScore> scores = score_statements(*scorer, table, template_text);
    print_warnings(scorer->warnings());

    std::string scores_csv = "row,score,scorer,statement\n";
    std::vector<Cell> cells;
    cells.reserve(scores.size());
    for (const LlmScore& score : scores) {
        cells.emplace_back(score.score);
        scores_csv += std::to_string(score.row) + "," + number_text(score.score) + "," +
                      csv_field(score.scorer_id) + "," + csv_field(statements[score.row]) + "\n";
    }
    table.add_column({"LLM_score", ColumnKind::Numeric}, std::move(cells));

    const fs::path out = prepare_out_dir(args.common);
    write_csv_file(table, (out / "augmented.csv").string());
    write_text(out / "scores.csv", scores_csv);
    std::cout << "scored " << scores.size() << " rows with '" << scorer->id()
              << "'; augmented data in " << (out / "augmented.csv").string() << "\n";
}

struct TrainArgs {
    Common common;
    std::string input;
};

void run_train(const TrainArgs& args) {
    const PipelineConfig config = load_config(args.common);
    const DataTable table = parse_csv_file(args.input);
    const FeatureBuild build = build_features(table, feature_spec_of(config));
    const SplitIndices split =
        stratified_split(build.matrix.labels, config.train_fraction, config.seed);
    const FeatureMatrix train = build.matrix.take_rows(split.train);

    CvConfig cv;
    cv.folds = config.cv_folds;
    cv.seed = config.seed;
    std::vector<CvReport> reports;
    for (ModelKind kind : all_model_kinds()) {
        reports.push_back(kfold_cv(train, kind, config.models, cv));
    }
    const ModelKind selected = select_best(reports);

    InferenceBundle bundle;
    bundle.scaler = fit_scaler(train.values);
    FeatureMatrix train_scaled = train;
    train_scaled.values = apply_scaler(bundle.scaler, train.values);
    bundle.model = train_model(selected, config.models, train_scaled,
                               derive_seed(config.seed, "final-train"));
    bundle.layout = build.layout;
    bundle.label_column = config.label.label_column;

    json cv_json;
    cv_json["selected"] = to_string(selected);
    json models = json::array();
    for (const CvReport& report : reports) {
        json entry;
        entry["model"] = to_string(report.kind);
        entry["folds"] = report.fold_metrics.size();
        entry["mean_accuracy"] = report.mean_accuracy;
        entry["mean_precision"] = report.mean_precision;
        entry["mean_recall"] = report.mean_recall;
        entry["mean_f1"] = report.mean_f1;
        entry["mean_auroc"] = report.mean_auroc ? json(*report.mean_auroc) : json(nullptr);
        models.push_back(std::move(entry));
    }
    cv_json["models"] = std::move(models);
    cv_json["train_rows"] = split.train.size();
    cv_json["test_rows"] = split.test.size();

    const fs::path out = prepare_out_dir(args.common);
    write_text(out / "model.json", inference_bundle_to_json(bundle) + "\n");
    write_text(out / "cv.json", cv_json.dump(2) + "\n");
    write_csv_file(table.take_rows(split.train), (out / "train.csv").string());
    write_csv_file(table.take_rows(split.test), (out / "test.csv").string());

    for (const CvReport& report : reports) {
        std::cout << to_string(report.kind) << ": mean CV accuracy "
                  << number_text(report.mean_accuracy) << "\n";
    }
    std::cout << "selected " << to_string(selected) << "; model in "
              << (out / "model.json").string() << ", holdout in " << (out / "test.csv").string()
              << "\n";
}

struct EvaluateArgs {
    Common common;
    std::string model_path;
    std::string data_path;
};

void run_evaluate(const EvaluateArgs& args) {
    const InferenceBundle bundle = inference_bundle_from_json(read_file(args.model_path));
    const DataTable table = parse_csv_file(args.data_path);
    const std::vector<double> scores = bundle_predict_proba(bundle, table);
    const std::vector<int> predictions = binarize_label(scores, bundle.threshold);
    const std::vector<int> labels = binary_labels(table, bundle.label_column);
    const Metrics metrics = compute_metrics(labels, predictions, scores);

    std::string predictions_csv = "row,probability,prediction,label\n";
    for (std::size_t r = 0; r < predictions.size(); ++r) {
        predictions_csv += std::to_string(r) + "," + number_text(scores[r]) + "," +
                           std::to_string(predictions[r]) + "," + std::to_string(labels[r]) + "\n";
    }

    const fs::path out = prepare_out_dir(args.common);
    write_text(out / "metrics.json", metrics_json(metrics).dump(2) + "\n");
    write_text(out / "predictions.csv", predictions_csv);
    std::cout << "accuracy " << number_text(metrics.accuracy) << " on " << metrics.total()
              << " rows; predictions in " << (out / "predictions.csv").string() << "\n";
}

struct AuditArgs {
    Common common;
    std::string predictions_path;
    std::string data_path;
    double tau = 0.0;
    CLI::Option* tau_option = nullptr;
};

void run_audit(const AuditArgs& args) {
    const PipelineConfig config = load_config(args.common);
    const double tau = args.tau_option->count() > 0 ? args.tau : config.tau;

    const DataTable predictions_table = parse_csv_file(args.predictions_path);
    const std::vector<int> predictions = binary_labels(predictions_table, "prediction");
    const std::vector<int> labels = binary_labels(predictions_table, "label");

    const DataTable data = parse_csv_file(args.data_path);
    if (data.row_count() != predictions_table.row_count()) {
        throw std::runtime_error("row count mismatch: " + std::to_string(data.row_count()) +
                                 " data rows vs " + std::to_string(predictions_table.row_count()) +
                                 " predictions");
    }
    if (config.sensitive.empty()) {
        throw std::runtime_error("no sensitive attributes configured");
    }
    std::map<std::string, std::vector<std::string>> attributes;
    for (const SensitiveSpec& spec : config.sensitive) {
        attributes[spec.column] = sensitive_groups(data, spec);
    }
    const FairnessReport report = fairness_audit(predictions, labels, attributes, tau);

    const fs::path out = prepare_out_dir(args.common);
    write_text(out / "fairness.json", fairness_json(report).dump(2) + "\n");
    print_fairness_summary(report);
    for (const AttributeAudit& audit : report.attributes) {
        print_warnings(audit.warnings);
    }
    std::cout << "audit in " << (out / "fairness.json").string() << "\n";
}

struct ExplainArgs {
    Common common;
    std::string model_path;
    std::string data_path;
    std::size_t repeats = 10;
};

void run_explain(const ExplainArgs& args) {
    const PipelineConfig config = load_config(args.common);
    const InferenceBundle bundle = inference_bundle_from_json(read_file(args.model_path));
    const DataTable table = parse_csv_file(args.data_path);

    FeatureMatrix X;
    X.values = bundle_features(bundle, table);
    X.feature_names = bundle.model.feature_names;
    X.labels = binary_labels(table, bundle.label_column);
    X.validate();

    json out_json;
    if (bundle.model.kind == ModelKind::LogisticRegression) {
        out_json["coefficient"] = explanation_json(coefficient_importance(bundle.model));
    } else {
        out_json["coefficient"] = nullptr;
    }
    const Explanation permutation = permutation_importance(
        bundle.model, X, args.repeats, derive_seed(config.seed, "perm-explain"));
    out_json["permutation"] = explanation_json(permutation);

    const fs::path out = prepare_out_dir(args.common);
    write_text(out / "explanation.json", out_json.dump(2) + "\n");
    const std::size_t top = std::min<std::size_t>(3, permutation.entries.size());
    for (std::size_t i = 0; i < top; ++i) {
        std::cout << permutation.entries[i].rank << ". " << permutation.entries[i].feature << " ("
                  << number_text(permutation.entries[i].importance) << ")\n";
    }
    std::cout << "explanation in " << (out / "explanation.json").string() << "\n";
}

struct RunArgs {
    Common common;
};

void run_full(const RunArgs& args) {
    const PipelineConfig config = load_config(args.common);
    const RunBundle bundle = run_pipeline(config);
    const fs::path out = prepare_out_dir(args.common);
    const std::vector<std::string> paths = export_report(bundle, out.string());

    print_warnings(bundle.warnings);
    std::cout << "rows: " << bundle.cleaning.rows_before << " -> " << bundle.cleaning.rows_after
              << " after cleaning\n";
    std::cout << "selected " << to_string(bundle.cleaned.selected) << "; test accuracy "
              << number_text(bundle.cleaned.test_metrics.accuracy) << " (cleaned) vs "
              << number_text(bundle.raw.test_metrics.accuracy) << " (raw)\n";
    print_fairness_summary(bundle.fairness);
    std::cout << "wrote " << paths.size() << " files under " << out.string() << "\n";
}

struct ReportArgs {
    Common common;
    std::string input;
};

void run_report(const ReportArgs& args) {
    const std::string text = read_file(args.input);
    const std::vector<std::string> problems = validate_report_json(text);
    if (!problems.empty()) {
        for (const std::string& problem : problems) {
            std::cerr << "problem: " << problem << "\n";
        }
        throw std::runtime_error("report failed validation with " +
                                 std::to_string(problems.size()) + " problem(s)");
    }
    const json report = json::parse(text);
    std::cout << "valid report (schema version " << report["schema_version"].get<int>()
              << ", seed " << report["seed"].get<std::uint64_t>() << ")\n";
    const json& cleaning = report["cleaning"];
    std::cout << "rows: " << cleaning["rows_before"].get<std::size_t>() << " -> "
              << cleaning["rows_after"].get<std::size_t>() << " after cleaning\n";
    for (const char* tag : {"raw", "cleaned"}) {
        const json& branch = report["branches"][tag];
        std::cout << tag << ": selected " << branch["selected_model"].get<std::string>()
                  << ", test accuracy "
                  << number_text(branch["test"]["accuracy"].get<double>()) << "\n";
    }
    for (const json& attribute : report["fairness"]["attributes"]) {
        std::cout << attribute["attribute"].get<std::string>() << ": demographic parity gap "
                  << number_text(attribute["dp_gap"].get<double>()) << ", equalized odds gap "
                  << number_text(attribute["eo_gap"].get<double>())
                  << (attribute["flagged"].get<bool>() ? " [flagged]" : "") << "\n";
    }
    const json& coefficients = report["explanations"]["coefficient"]["entries"];
    std::cout << "top features:";
    for (std::size_t i = 0; i < std::min<std::size_t>(3, coefficients.size()); ++i) {
        std::cout << " " << coefficients[i]["feature"].get<std::string>();
    }
    std::cout << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fairness-aware admission prediction pipeline"};
    app.require_subcommand(1);

    GenerateArgs generate_args;
    CLI::App* generate = app.add_subcommand("generate", "write a synthetic admissions CSV");
    add_common(generate, generate_args.common);
    generate_args.rows =
        generate->add_option("--rows", generate_args.synthetic.rows, "row count");
    generate_args.anomalies = generate->add_option(
        "--anomalies", generate_args.synthetic.anomaly_count, "label-contradiction rows to inject");
    generate_args.gender_bias = generate->add_option(
        "--gender-bias", generate_args.synthetic.gender_bias, "label bias by gender");
    generate_args.parental_bias =
        generate->add_option("--parental-bias", generate_args.synthetic.parental_bias,
                             "label bias by parental education");
    generate_args.noise_sd =
        generate->add_option("--noise-sd", generate_args.synthetic.noise_sd, "label noise stddev");
    generate->callback([&] { run_generate(generate_args); });

    CleanArgs clean_args;
    CLI::App* clean = app.add_subcommand(
        "clean", "merge, impute, binarize the label and drop anomalous rows");
    add_common(clean, clean_args.common);
    clean->add_option("--input", clean_args.inputs, "input CSV (repeat to merge several)");
    clean->callback([&] { run_clean(clean_args); });

    AugmentArgs augment_args;
    CLI::App* augment =
        app.add_subcommand("augment", "score row statements and append an LLM_score column");
    add_common(augment, augment_args.common);
    augment->add_option("--input", augment_args.input, "input CSV")->required();
    augment_args.scorer_option =
        augment->add_option("--scorer", augment_args.scorer, "mock or remote");
    augment_args.template_option =
        augment->add_option("--template", augment_args.template_text, "statement template");
    augment->callback([&] { run_augment(augment_args); });

    TrainArgs train_args;
    CLI::App* train =
        app.add_subcommand("train", "cross-validate all models, select and fit the best");
    add_common(train, train_args.common);
    train->add_option("--input", train_args.input, "labeled CSV")->required();
    train->callback([&] { run_train(train_args); });

    EvaluateArgs evaluate_args;
    CLI::App* evaluate = app.add_subcommand("evaluate", "score a labeled CSV with a trained model");
    add_common(evaluate, evaluate_args.common);
    evaluate->add_option("--model", evaluate_args.model_path, "model.json from train")->required();
    evaluate->add_option("--data", evaluate_args.data_path, "labeled CSV")->required();
    evaluate->callback([&] { run_evaluate(evaluate_args); });

    AuditArgs audit_args;
    CLI::App* audit = app.add_subcommand("audit", "fairness audit of saved predictions");
    add_common(audit, audit_args.common);
    audit->add_option("--predictions", audit_args.predictions_path, "predictions.csv from evaluate")
        ->required();
    audit->add_option("--data", audit_args.data_path, "CSV with the sensitive attribute columns")
        ->required();
    audit_args.tau_option =
        audit->add_option("--tau", audit_args.tau, "fairness flag threshold");
    audit->callback([&] { run_audit(audit_args); });

    ExplainArgs explain_args;
    CLI::App* explain = app.add_subcommand("explain", "feature importance for a trained model");
    add_common(explain, explain_args.common);
    explain->add_option("--model", explain_args.model_path, "model.json from train")->required();
    explain->add_option("--data", explain_args.data_path, "labeled CSV")->required();
    explain->add_option("--repeats", explain_args.repeats, "permutation repeats")
        ->capture_default_str();
    explain->callback([&] { run_explain(explain_args); });

    RunArgs run_args;
    CLI::App* run = app.add_subcommand("run", "full pipeline plus report export");
    add_common(run, run_args.common);
    run->callback([&] { run_full(run_args); });

    ReportArgs report_args;
    CLI::App* report = app.add_subcommand("report", "validate and summarize a report.json");
    add_common(report, report_args.common);
    report->add_option("--input", report_args.input, "report.json path")->required();
    report->callback([&] { run_report(report_args); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n\n" << app.help() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "admit: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
