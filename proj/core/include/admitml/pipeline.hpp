#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "admitml/evaluation.hpp"
#include "admitml/explain.hpp"
#include "admitml/fairness.hpp"
#include "admitml/features.hpp"
#include "admitml/ingest.hpp"
#include "admitml/llm.hpp"
#include "admitml/model.hpp"
#include "admitml/synthetic.hpp"
#include "admitml/table.hpp"

namespace admitml {

// Exactly one of the two sources supplies the rows: CSV files (merged with a
// per-file context flag when there is more than one) or the bundled
// generator.
struct DataSourceConfig {
    std::vector<std::string> csv_paths;
    std::optional<SyntheticConfig> synthetic;
};

// The probability column `source_column` is binarized at `threshold` into the
// 0/1 `label_column`; the source column then leaves the table. When the two
// names match, the column must already be binary.
struct LabelConfig {
    std::string source_column = "Admit_Chance";
    std::string label_column = "Admission_Status";
    double threshold = 0.5;
};

struct LlmConfig {
    bool enabled = false;
    std::string scorer = "mock";  // "mock" or "remote"
    std::string template_text;    // empty picks the built-in template
    RemoteScorerConfig remote;
};

struct PipelineConfig {
    DataSourceConfig source;
    std::uint64_t seed = 0;
    std::map<std::string, std::string> rename;  // applied before all other stages
    LabelConfig label;
    CleaningRule cleaning;
    double missingness_limit = 0.30;
    std::vector<std::string> exclude_columns;
    std::vector<SensitiveSpec> sensitive;
    bool include_sensitive_features = false;
    ModelConfigs models;
    double train_fraction = 0.8;
    std::size_t cv_folds = 10;
    double tau = 0.05;
    LlmConfig llm;
};

// Strict JSON parsing: unknown keys are errors so config typos surface
// instead of silently running with defaults.
PipelineConfig parse_pipeline_config(const std::string& json_text);
PipelineConfig parse_pipeline_config_file(const std::string& path);

// Canonical JSON with every effective field materialized; embedding this in
// a report makes the run reproducible. Credentials never appear.
std::string pipeline_config_to_json(const PipelineConfig& config);

// The config's rows after load, harmonization, imputation, sparse-column
// drops and label binarization: ready for anomaly cleaning and feature
// building. Warnings report dropped columns.
struct PreparedData {
    DataTable table;
    std::vector<std::string> warnings;
};
PreparedData prepare_data(const PipelineConfig& config);

// The feature-extraction settings the config implies.
FeatureSpec feature_spec_of(const PipelineConfig& config);

// The statement scorer the config requests. The mock scorer standardizes
// over `table`; the remote scorer ignores it.
std::unique_ptr<Scorer> make_scorer(const LlmConfig& llm, const DataTable& table);

// One treatment arm: "raw" skips anomaly cleaning, "cleaned" applies it.
// Both arms share the seed and every other setting.
struct BranchResult {
    std::string tag;
    std::size_t rows = 0;  // rows entering the feature build
    std::vector<CvReport> cv_reports;  // one per model kind, fixed order
    ModelKind selected = ModelKind::LogisticRegression;
    Metrics test_metrics;  // selected model, retrained on the train split
};

struct RunBundle {
    std::uint64_t seed = 0;
    std::string config_echo;  // canonical config JSON
    CleaningLog cleaning;
    BranchResult raw;
    BranchResult cleaned;
    FairnessReport fairness;     // cleaned branch, test-split predictions
    Explanation coefficients;    // logistic fit on the cleaned train split
    Explanation permutation;     // selected model on the cleaned test split
    TrainedClassifier model;     // the deployable classifier (cleaned branch)
    Scaler scaler;
    FeatureLayout layout;
    LabelConfig label;
    LlmConfig llm;               // as applied, template resolved
    Matrix correlation;          // features plus label, cleaned branch
    std::vector<std::string> correlation_features;
    std::vector<std::string> warnings;
};

// Runs the full pipeline: load, harmonize, impute, drop sparse columns,
// binarize the label, then both treatment arms (cross-validate all model
// kinds, select, retrain, evaluate), plus fairness and explanations on the
// cleaned arm. Errors carry a stage tag.
RunBundle run_pipeline(const PipelineConfig& config);

}  // namespace admitml
