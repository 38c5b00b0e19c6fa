#include <atomic>
#include <filesystem>
#include <fstream>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <unistd.h>

#include "doctest.h"

#include "admitml/pipeline.hpp"
#include "admitml/report.hpp"

using namespace admitml;

namespace {

std::filesystem::path fresh_temp_dir(const std::string& tag) {
    static std::atomic<unsigned> counter{0};
    const auto dir = std::filesystem::temp_directory_path() /
                     ("admitml-" + tag + "-" + std::to_string(::getpid()) + "-" +
                      std::to_string(counter.fetch_add(1)));
    std::filesystem::remove_all(dir);
    return dir;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

PipelineConfig synthetic_config() {
    PipelineConfig config;
    SyntheticConfig synthetic;
    synthetic.rows = 220;
    synthetic.anomaly_count = 20;
    config.source.synthetic = synthetic;
    config.seed = 7;
    config.cv_folds = 5;
    config.sensitive = parse_pipeline_config("{}").sensitive;  // defaults
    return config;
}

// One full run shared by the inspection tests below; the determinism test
// reruns the pipeline itself.
const RunBundle& shared_bundle() {
    static const RunBundle bundle = run_pipeline(synthetic_config());
    return bundle;
}

// Small numeric table with a binary label, for inference-bundle tests.
DataTable labeled_table() {
    std::vector<Column> columns = {{"GRE", ColumnKind::Numeric},
                                   {"TOEFL", ColumnKind::Numeric},
                                   {"CGPA", ColumnKind::Numeric},
                                   {"Research", ColumnKind::Numeric},
                                   {"Admission_Status", ColumnKind::Numeric}};
    std::vector<std::vector<Cell>> rows;
    for (int i = 0; i < 16; ++i) {
        const int label = i % 2;
        const double shift = label == 1 ? 12.0 : -12.0;
        rows.push_back({Cell(310.0 + shift + i), Cell(100.0 + shift / 2.0 + i),
                        Cell(8.5 + shift / 30.0), Cell(static_cast<double>(i % 3 == 0)),
                        Cell(static_cast<double>(label))});
    }
    return DataTable(std::move(columns), std::move(rows));
}

InferenceBundle manual_bundle(const DataTable& table) {
    FeatureSpec spec;
    spec.label_column = "Admission_Status";
    FeatureBuild build = build_features(table, spec);
    InferenceBundle bundle;
    bundle.scaler = fit_scaler(build.matrix.values);
    FeatureMatrix scaled = build.matrix;
    scaled.values = apply_scaler(bundle.scaler, scaled.values);
    bundle.model = train_logistic(scaled);
    bundle.layout = build.layout;
    return bundle;
}

}  // namespace

TEST_CASE("pipeline config defaults") {
    const PipelineConfig config = parse_pipeline_config("{}");
    CHECK(config.seed == 0);
    CHECK(config.label.source_column == "Admit_Chance");
    CHECK(config.label.label_column == "Admission_Status");
    CHECK(config.label.threshold == 0.5);
    CHECK(config.missingness_limit == 0.30);
    CHECK(config.train_fraction == 0.8);
    CHECK(config.cv_folds == 10);
    CHECK(config.tau == 0.05);
    CHECK_FALSE(config.include_sensitive_features);
    CHECK_FALSE(config.llm.enabled);
    REQUIRE(config.sensitive.size() == 2);
    CHECK(config.sensitive[0].column == "Gender");
    CHECK(config.sensitive[1].column == "Parental_Education");
    REQUIRE(config.sensitive[1].default_group.has_value());
    CHECK(*config.sensitive[1].default_group == "low");
}

TEST_CASE("pipeline config parses explicit settings") {
    const std::string text = R"({
        "source": {"synthetic": {"rows": 50, "anomaly_count": 5}},
        "seed": 99,
        "rename": {"Sex": "Gender"},
        "label": {"source_column": "Chance", "column": "Admit", "threshold": 0.6},
        "missingness_limit": 0.5,
        "exclude_columns": ["Serial"],
        "sensitive": [{"column": "Gender", "groups": {"M": "male"}, "default_group": "other"}],
        "models": {"forest": {"n_trees": 10, "max_depth": 3}},
        "train_fraction": 0.75,
        "cv_folds": 4,
        "tau": 0.1,
        "llm": {"enabled": true, "scorer": "mock", "template": "GRE {GRE}"}
    })";
    const PipelineConfig config = parse_pipeline_config(text);
    REQUIRE(config.source.synthetic.has_value());
    CHECK(config.source.synthetic->rows == 50);
    CHECK(config.source.synthetic->anomaly_count == 5);
    CHECK(config.seed == 99);
    CHECK(config.rename.at("Sex") == "Gender");
    CHECK(config.label.source_column == "Chance");
    CHECK(config.label.label_column == "Admit");
    CHECK(config.label.threshold == 0.6);
    CHECK(config.missingness_limit == 0.5);
    CHECK(config.exclude_columns == std::vector<std::string>{"Serial"});
    REQUIRE(config.sensitive.size() == 1);
    CHECK(config.sensitive[0].group_of.at("M") == "male");
    CHECK(config.models.forest.n_trees == 10);
    CHECK(config.models.forest.max_depth == 3);
    CHECK(config.train_fraction == 0.75);
    CHECK(config.cv_folds == 4);
    CHECK(config.tau == 0.1);
    CHECK(config.llm.enabled);
    CHECK(config.llm.template_text == "GRE {GRE}");
}

TEST_CASE("pipeline config rejects unknown keys and bad JSON") {
    CHECK_THROWS_WITH_AS(parse_pipeline_config(R"({"sead": 3})"),
                         doctest::Contains("unknown key 'sead'"), std::runtime_error);
    CHECK_THROWS_WITH_AS(parse_pipeline_config(R"({"models": {"tree": {}}})"),
                         doctest::Contains("unknown key 'tree'"), std::runtime_error);
    CHECK_THROWS_AS(parse_pipeline_config("not json"), std::runtime_error);
    CHECK_THROWS_AS(parse_pipeline_config(R"({"tau": "high"})"), std::runtime_error);
    CHECK_THROWS_AS(parse_pipeline_config("[1, 2]"), std::runtime_error);
}

TEST_CASE("pipeline config echo reparses to the same canonical form") {
    PipelineConfig config = synthetic_config();
    config.llm.enabled = true;
    const std::string echo = pipeline_config_to_json(config);
    const PipelineConfig reparsed = parse_pipeline_config(echo);
    CHECK(pipeline_config_to_json(reparsed) == echo);
}

TEST_CASE("pipeline config never serializes credentials") {
    PipelineConfig config = synthetic_config();
    config.llm.enabled = true;
    config.llm.scorer = "remote";
    config.llm.remote.endpoint = "http://127.0.0.1:9";
    config.llm.remote.auth_token = "secret123";
    CHECK(pipeline_config_to_json(config).find("secret123") == std::string::npos);
    CHECK_THROWS_WITH_AS(
        parse_pipeline_config(R"({"llm": {"remote": {"auth_token": "x"}}})"),
        doctest::Contains("unknown key 'auth_token'"), std::runtime_error);
}

TEST_CASE("run_pipeline needs exactly one data source") {
    PipelineConfig none;
    CHECK_THROWS_WITH_AS(run_pipeline(none), doctest::Contains("exactly one data source"),
                         std::runtime_error);
    PipelineConfig both = synthetic_config();
    both.source.csv_paths = {"somewhere.csv"};
    CHECK_THROWS_AS(run_pipeline(both), std::runtime_error);
}

TEST_CASE("run_pipeline produces both treatment arms") {
    const RunBundle& bundle = shared_bundle();
    CHECK(bundle.seed == 7);
    CHECK(bundle.cleaning.rows_before == 220);
    CHECK(bundle.cleaning.rows_after == 200);
    CHECK(bundle.cleaning.removed_row_ids.size() == 20);
    CHECK(bundle.raw.tag == "raw");
    CHECK(bundle.raw.rows == 220);
    CHECK(bundle.cleaned.tag == "cleaned");
    CHECK(bundle.cleaned.rows == 200);

    const std::vector<ModelKind> kinds = all_model_kinds();
    REQUIRE(bundle.raw.cv_reports.size() == kinds.size());
    REQUIRE(bundle.cleaned.cv_reports.size() == kinds.size());
    for (std::size_t i = 0; i < kinds.size(); ++i) {
        CHECK(bundle.raw.cv_reports[i].kind == kinds[i]);
        CHECK(bundle.cleaned.cv_reports[i].kind == kinds[i]);
        CHECK(bundle.cleaned.cv_reports[i].fold_metrics.size() == 5);
        CHECK(bundle.cleaned.cv_reports[i].mean_accuracy > 0.5);
    }
    CHECK(bundle.model.kind == bundle.cleaned.selected);
    CHECK(bundle.cleaned.test_metrics.total() == 40);
    CHECK(bundle.raw.test_metrics.total() == 44);
}

TEST_CASE("run_pipeline audits the configured sensitive attributes") {
    const RunBundle& bundle = shared_bundle();
    CHECK(bundle.fairness.tau == 0.05);
    REQUIRE(bundle.fairness.attributes.size() == 2);
    CHECK(bundle.fairness.attributes[0].attribute == "Gender");
    CHECK(bundle.fairness.attributes[1].attribute == "Parental_Education");
    for (const AttributeAudit& audit : bundle.fairness.attributes) {
        CHECK(audit.groups.size() >= 2);
        long long total = 0;
        for (const GroupStats& g : audit.groups) total += g.count;
        CHECK(total == 40);
    }
}

TEST_CASE("run_pipeline explains the deployable model") {
    const RunBundle& bundle = shared_bundle();
    CHECK(bundle.coefficients.method == "coefficient");
    CHECK_FALSE(bundle.coefficients.entries.empty());
    CHECK(bundle.permutation.method == "permutation");
    CHECK(bundle.permutation.repeats == 10);
    CHECK(bundle.permutation.entries.size() == bundle.model.feature_names.size());
    // Sensitive columns stay out of the feature set by default.
    for (const std::string& name : bundle.model.feature_names) {
        CHECK(name.find("Gender") == std::string::npos);
        CHECK(name.find("Parental_Education") == std::string::npos);
    }
    // Correlation covers the features plus the label column.
    CHECK(bundle.correlation_features.size() == bundle.model.feature_names.size() + 1);
    CHECK(bundle.correlation_features.back() == "Admission_Status");
    CHECK(bundle.correlation.rows() == bundle.correlation_features.size());
    CHECK(bundle.correlation.cols() == bundle.correlation_features.size());
    for (std::size_t i = 0; i < bundle.correlation.rows(); ++i) {
        CHECK(bundle.correlation(i, i) == doctest::Approx(1.0));
    }
}

TEST_CASE("run_pipeline is deterministic") {
    const std::string once = report_to_json(shared_bundle());
    const std::string twice = report_to_json(run_pipeline(synthetic_config()));
    CHECK(once == twice);
}

TEST_CASE("stage failures carry the stage tag") {
    PipelineConfig config;
    SyntheticConfig synthetic;
    synthetic.rows = 12;
    config.source.synthetic = synthetic;
    config.cv_folds = 10;
    CHECK_THROWS_WITH_AS(run_pipeline(config), doctest::Contains("stage 'cross-validation"),
                         std::runtime_error);
}

TEST_CASE("report JSON validates against its own schema") {
    const std::string report = report_to_json(shared_bundle());
    CHECK(validate_report_json(report).empty());

    const std::vector<std::string> unparseable = validate_report_json("{]");
    CHECK(unparseable.size() == 1);

    std::string broken = report;
    const auto pos = broken.find("\"schema_version\"");
    REQUIRE(pos != std::string::npos);
    broken.replace(pos, 16, "\"schema_verzion\"");
    CHECK_FALSE(validate_report_json(broken).empty());

    CHECK_FALSE(validate_report_json("[]").empty());
}

TEST_CASE("export_report writes the full artifact set deterministically") {
    const auto dir = fresh_temp_dir("export");
    const std::vector<std::string> paths = export_report(shared_bundle(), dir.string());
    REQUIRE(paths.size() == 7);
    std::set<std::string> names;
    for (const std::string& path : paths) {
        CHECK(std::filesystem::exists(path));
        names.insert(std::filesystem::path(path).filename().string());
    }
    const std::set<std::string> expected = {
        "report.json",          "model.json",           "correlation.csv",
        "accuracy_before_after.csv", "importance.csv",  "fairness_groups.csv",
        "model_accuracy.csv"};
    CHECK(names == expected);
    CHECK(read_file(dir / "report.json") == report_to_json(shared_bundle()) + "\n");

    const std::string accuracy_csv = read_file(dir / "accuracy_before_after.csv");
    CHECK(accuracy_csv.find("model,accuracy_raw,accuracy_cleaned") == 0);
    CHECK(accuracy_csv.find("stacked_ensemble") != std::string::npos);

    const auto dir2 = fresh_temp_dir("export");
    export_report(shared_bundle(), dir2.string());
    CHECK(read_file(dir / "report.json") == read_file(dir2 / "report.json"));
    CHECK(read_file(dir / "model.json") == read_file(dir2 / "model.json"));
    std::filesystem::remove_all(dir);
    std::filesystem::remove_all(dir2);
}

TEST_CASE("exported model bundle reproduces the run's test predictions") {
    const auto dir = fresh_temp_dir("bundle");
    export_report(shared_bundle(), dir.string());
    const InferenceBundle bundle = inference_bundle_from_json(read_file(dir / "model.json"));
    CHECK(bundle.model.kind == shared_bundle().model.kind);
    CHECK(bundle.model.feature_names == shared_bundle().model.feature_names);
    CHECK(bundle.label_column == "Admission_Status");
    CHECK(bundle.scaler.width() == shared_bundle().scaler.width());
    std::filesystem::remove_all(dir);
}

TEST_CASE("inference bundle scores tables like the underlying model") {
    const DataTable table = labeled_table();
    const InferenceBundle bundle = manual_bundle(table);

    FeatureSpec spec;
    spec.label_column = "Admission_Status";
    const FeatureBuild build = build_features(table, spec);
    FeatureMatrix scaled = build.matrix;
    scaled.values = apply_scaler(bundle.scaler, scaled.values);
    const std::vector<double> expected = predict_proba(bundle.model, scaled);

    CHECK(bundle_predict_proba(bundle, table) == expected);
    CHECK(bundle_predict(bundle, table) == binarize_label(expected));

    // The label column is not needed at inference time.
    DataTable unlabeled = table;
    unlabeled.drop_column(unlabeled.column_index("Admission_Status"));
    CHECK(bundle_predict_proba(bundle, unlabeled) == expected);
}

TEST_CASE("inference bundle JSON round trip preserves predictions") {
    const DataTable table = labeled_table();
    const InferenceBundle bundle = manual_bundle(table);
    const std::string json_text = inference_bundle_to_json(bundle);
    const InferenceBundle reloaded = inference_bundle_from_json(json_text);
    CHECK(bundle_predict_proba(reloaded, table) == bundle_predict_proba(bundle, table));
    CHECK(inference_bundle_to_json(reloaded) == json_text);
}

TEST_CASE("inference bundle errors name the missing column") {
    const DataTable table = labeled_table();
    const InferenceBundle bundle = manual_bundle(table);
    DataTable missing = table;
    missing.drop_column(missing.column_index("GRE"));
    CHECK_THROWS_WITH_AS(bundle_predict_proba(bundle, missing), doctest::Contains("GRE"),
                         std::invalid_argument);
}

TEST_CASE("inference bundle rejects malformed JSON") {
    CHECK_THROWS_AS(inference_bundle_from_json("not json"), std::runtime_error);
    CHECK_THROWS_AS(inference_bundle_from_json(R"({"schema_version": 2})"), std::runtime_error);
}

TEST_CASE("llm augmentation flows through training and inference") {
    PipelineConfig config;
    SyntheticConfig synthetic;
    synthetic.rows = 120;
    config.source.synthetic = synthetic;
    config.seed = 11;
    config.cv_folds = 3;
    config.llm.enabled = true;

    const RunBundle bundle = run_pipeline(config);
    REQUIRE_FALSE(bundle.model.feature_names.empty());
    CHECK(bundle.model.feature_names.back() == "LLM_score");
    CHECK(bundle.llm.enabled);
    CHECK(bundle.llm.template_text == default_statement_template());
    CHECK(bundle.scaler.width() == bundle.model.feature_names.size());
    // The layout tracks source columns only; the score column is appended on
    // top of it at inference time.
    for (const std::string& column : bundle.layout.source_columns) {
        CHECK(column != "LLM_score");
    }

    InferenceBundle inference;
    inference.model = bundle.model;
    inference.scaler = bundle.scaler;
    inference.layout = bundle.layout;
    inference.label_column = bundle.label.label_column;
    inference.llm = bundle.llm;
    const std::string json_text = inference_bundle_to_json(inference);
    const InferenceBundle reloaded = inference_bundle_from_json(json_text);
    CHECK(reloaded.llm.enabled);
    CHECK(reloaded.llm.template_text == bundle.llm.template_text);
}

TEST_CASE("llm pipeline rejects unknown scorers") {
    PipelineConfig config;
    SyntheticConfig synthetic;
    synthetic.rows = 60;
    config.source.synthetic = synthetic;
    config.llm.enabled = true;
    config.llm.scorer = "oracle";
    CHECK_THROWS_WITH_AS(run_pipeline(config), doctest::Contains("stage 'augment"),
                         std::runtime_error);
}
