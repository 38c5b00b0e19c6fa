#pragma once

#include <string>
#include <vector>

#include "admitml/features.hpp"
#include "admitml/model.hpp"
#include "admitml/pipeline.hpp"
#include "admitml/table.hpp"

namespace admitml {

// Everything needed to score new rows: the classifier plus the feature
// layout and scaler it was trained behind, the label's name/threshold, and
// the augmentation step when one was part of training. Mock augmentation
// standardizes over the presented table, so exact reproduction needs the
// same table the training run scored.
struct InferenceBundle {
    TrainedClassifier model;
    Scaler scaler;
    FeatureLayout layout;
    std::string label_column = "Admission_Status";
    double threshold = 0.5;
    LlmConfig llm;
};

std::string inference_bundle_to_json(const InferenceBundle& bundle);
InferenceBundle inference_bundle_from_json(const std::string& json_text);

// Applies the stored layout and scaler to a table (which need not carry the
// label column) and returns model-ready rows.
Matrix bundle_features(const InferenceBundle& bundle, const DataTable& table);
std::vector<double> bundle_predict_proba(const InferenceBundle& bundle, const DataTable& table);
std::vector<int> bundle_predict(const InferenceBundle& bundle, const DataTable& table);

// Deterministic, schema-versioned JSON of the whole run; no timestamps.
std::string report_to_json(const RunBundle& bundle);

// Structural schema check of a report; returns the problems found (empty
// means valid). Unparseable input is reported, not thrown.
std::vector<std::string> validate_report_json(const std::string& json_text);

// Writes report.json, model.json, correlation.csv, accuracy_before_after.csv,
// importance.csv, fairness_groups.csv and model_accuracy.csv under out_dir,
// returning the paths. A failed write removes the files already written.
std::vector<std::string> export_report(const RunBundle& bundle, const std::string& out_dir);

}  // namespace admitml
