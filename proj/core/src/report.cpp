#include "admitml/report.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <memory>
#include <stdexcept>

#include "json.hpp"

namespace admitml {
namespace {

using nlohmann::json;

// Shortest round-trip decimal form; keeps CSV exports deterministic and
// reload-exact.
std::string format_double(double value) {
    char buf[32];
    const auto result = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, result.ptr);
}

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

json metrics_to_json(const Metrics& m) {
    json j = {{"tp", m.tp},
              {"fp", m.fp},
              {"fn", m.fn},
              {"tn", m.tn},
              {"accuracy", m.accuracy},
              {"precision", m.precision},
              {"recall", m.recall},
              {"f1", m.f1},
              {"precision_defined", m.precision_defined},
              {"recall_defined", m.recall_defined},
              {"f1_defined", m.f1_defined}};
    j["auroc"] = m.auroc ? json(*m.auroc) : json(nullptr);
    return j;
}

json cv_to_json(const CvReport& report) {
    json folds = json::array();
    for (const Metrics& m : report.fold_metrics) {
        folds.push_back(metrics_to_json(m));
    }
    return {{"model", to_string(report.kind)},
            {"mean_accuracy", report.mean_accuracy},
            {"mean_precision", report.mean_precision},
            {"mean_recall", report.mean_recall},
            {"mean_f1", report.mean_f1},
            {"mean_auroc", report.mean_auroc ? json(*report.mean_auroc) : json(nullptr)},
            {"pooled", metrics_to_json(report.pooled)},
            {"folds", folds}};
}

json branch_to_json(const BranchResult& branch) {
    json cv = json::array();
    for (const CvReport& report : branch.cv_reports) {
        cv.push_back(cv_to_json(report));
    }
    return {{"tag", branch.tag},
            {"rows", branch.rows},
            {"selected_model", to_string(branch.selected)},
            {"cv", cv},
            {"test", metrics_to_json(branch.test_metrics)}};
}

json fairness_to_json(const FairnessReport& report) {
    json attributes = json::array();
    for (const AttributeAudit& audit : report.attributes) {
        json groups = json::array();
        for (const GroupStats& g : audit.groups) {
            json entry = {{"group", g.group},
                          {"support", g.count},
                          {"selection_rate", g.selection_rate},
                          {"base_rate", g.base_rate},
                          {"tp", g.tp},
                          {"fp", g.fp},
                          {"fn", g.fn},
                          {"tn", g.tn},
                          {"usable", g.usable}};
            entry["tpr"] = g.usable ? json(g.tpr) : json(nullptr);
            entry["fpr"] = g.usable ? json(g.fpr) : json(nullptr);
            groups.push_back(std::move(entry));
        }
        attributes.push_back({{"attribute", audit.attribute},
                              {"dp_gap", audit.dp_gap},
                              {"eo_gap", audit.eo_gap},
                              {"flagged", audit.flagged},
                              {"warnings", audit.warnings},
                              {"groups", groups}});
    }
    return {{"tau", report.tau}, {"attributes", attributes}};
}

json explanation_to_json(const Explanation& explanation) {
    json entries = json::array();
    for (const ImportanceEntry& e : explanation.entries) {
        json entry = {{"feature", e.feature}, {"importance", e.importance}, {"rank", e.rank}};
        entry["signed_weight"] = e.signed_weight ? json(*e.signed_weight) : json(nullptr);
        entries.push_back(std::move(entry));
    }
    return {{"method", explanation.method},
            {"repeats", explanation.repeats},
            {"seed", explanation.seed},
            {"entries", entries}};
}

json layout_to_json(const FeatureLayout& layout) {
    json encoders = json::array();
    for (const OneHotEncoder& encoder : layout.encoders) {
        encoders.push_back({{"column", encoder.column()}, {"categories", encoder.categories()}});
    }
    return {{"source_columns", layout.source_columns}, {"encoders", encoders}};
}

// --- schema validation helpers ---

enum class Kind { Object, Array, String, Number, Boolean, NumberOrNull };

bool kind_matches(const json& value, Kind kind) {
    switch (kind) {
        case Kind::Object: return value.is_object();
        case Kind::Array: return value.is_array();
        case Kind::String: return value.is_string();
        case Kind::Number: return value.is_number();
        case Kind::Boolean: return value.is_boolean();
        case Kind::NumberOrNull: return value.is_number() || value.is_null();
    }
    return false;
}

const char* kind_name(Kind kind) {
    switch (kind) {
        case Kind::Object: return "object";
        case Kind::Array: return "array";
        case Kind::String: return "string";
        case Kind::Number: return "number";
        case Kind::Boolean: return "boolean";
        case Kind::NumberOrNull: return "number or null";
    }
    return "?";
}

const json* require(const json& object, const std::string& key, Kind kind, const std::string& path,
                    std::vector<std::string>& problems) {
    if (!object.contains(key)) {
        problems.push_back(path + ": missing key \"" + key + "\"");
        return nullptr;
    }
    const json& value = object[key];
    if (!kind_matches(value, kind)) {
        problems.push_back(path + "." + key + ": expected " + kind_name(kind));
        return nullptr;
    }
    return &value;
}

void validate_metrics(const json& value, const std::string& path,
                      std::vector<std::string>& problems) {
    for (const char* key : {"tp", "fp", "fn", "tn"}) {
        require(value, key, Kind::Number, path, problems);
    }
    for (const char* key : {"accuracy", "precision", "recall", "f1"}) {
        require(value, key, Kind::Number, path, problems);
    }
    for (const char* key : {"precision_defined", "recall_defined", "f1_defined"}) {
        require(value, key, Kind::Boolean, path, problems);
    }
    require(value, "auroc", Kind::NumberOrNull, path, problems);
}

void validate_branch(const json& value, const std::string& path,
                     std::vector<std::string>& problems) {
    require(value, "tag", Kind::String, path, problems);
    require(value, "rows", Kind::Number, path, problems);
    if (const json* selected = require(value, "selected_model", Kind::String, path, problems)) {
        try {
            model_kind_from_string(selected->get<std::string>());
        } catch (const std::exception&) {
            problems.push_back(path + ".selected_model: unknown model \"" +
                               selected->get<std::string>() + "\"");
        }
    }
    if (const json* cv = require(value, "cv", Kind::Array, path, problems)) {
        for (std::size_t i = 0; i < cv->size(); ++i) {
            const std::string cv_path = path + ".cv[" + std::to_string(i) + "]";
            const json& entry = (*cv)[i];
            if (!entry.is_object()) {
                problems.push_back(cv_path + ": expected object");
                continue;
            }
            require(entry, "model", Kind::String, cv_path, problems);
            require(entry, "mean_accuracy", Kind::Number, cv_path, problems);
            require(entry, "mean_auroc", Kind::NumberOrNull, cv_path, problems);
            if (const json* pooled = require(entry, "pooled", Kind::Object, cv_path, problems)) {
                validate_metrics(*pooled, cv_path + ".pooled", problems);
            }
            if (const json* folds = require(entry, "folds", Kind::Array, cv_path, problems)) {
                for (std::size_t f = 0; f < folds->size(); ++f) {
                    if (!(*folds)[f].is_object()) {
                        problems.push_back(cv_path + ".folds[" + std::to_string(f) +
                                           "]: expected object");
                        continue;
                    }
                    validate_metrics((*folds)[f], cv_path + ".folds[" + std::to_string(f) + "]",
                                     problems);
                }
            }
        }
    }
    if (const json* test = require(value, "test", Kind::Object, path, problems)) {
        validate_metrics(*test, path + ".test", problems);
    }
}

}  // namespace

std::string inference_bundle_to_json(const InferenceBundle& bundle) {
    json root;
    root["schema_version"] = 1;
    root["model"] = json::parse(model_to_json_string(bundle.model));
    root["scaler"] = {{"means", bundle.scaler.means}, {"stddevs", bundle.scaler.stddevs}};
    root["layout"] = layout_to_json(bundle.layout);
    root["label_column"] = bundle.label_column;
    root["threshold"] = bundle.threshold;
    json llm = {{"enabled", bundle.llm.enabled},
                {"scorer", bundle.llm.scorer},
                {"template", bundle.llm.template_text}};
    if (bundle.llm.enabled && bundle.llm.scorer == "remote") {
        const RemoteScorerConfig& rc = bundle.llm.remote;
        json remote = {{"endpoint", rc.endpoint},       {"path", rc.path},
                       {"rubric", rc.rubric},           {"timeout_seconds", rc.timeout_seconds},
                       {"max_attempts", rc.max_attempts}, {"backoff_ms", rc.backoff_ms},
                       {"max_in_flight", rc.max_in_flight}};
        if (rc.cache_dir) {
            remote["cache_dir"] = *rc.cache_dir;
        }
        llm["remote"] = remote;
    }
    root["llm"] = llm;
    return root.dump(2);
}

InferenceBundle inference_bundle_from_json(const std::string& json_text) {
    try {
        const json root = json::parse(json_text);
        if (root.value("schema_version", 0) != 1) {
            throw std::runtime_error("unsupported schema_version");
        }
        InferenceBundle bundle;
        bundle.model = model_from_json_string(root.at("model").dump());
        bundle.scaler.means = root.at("scaler").at("means").get<std::vector<double>>();
        bundle.scaler.stddevs = root.at("scaler").at("stddevs").get<std::vector<double>>();
        const json& layout = root.at("layout");
        bundle.layout.source_columns =
            layout.at("source_columns").get<std::vector<std::string>>();
        for (const json& encoder : layout.at("encoders")) {
            bundle.layout.encoders.push_back(
                OneHotEncoder::from_parts(encoder.at("column").get<std::string>(),
                                          encoder.at("categories").get<std::vector<std::string>>()));
        }
        bundle.label_column = root.at("label_column").get<std::string>();
        bundle.threshold = root.at("threshold").get<double>();
        if (root.contains("llm")) {
            const json& llm = root["llm"];
            bundle.llm.enabled = llm.value("enabled", false);
            bundle.llm.scorer = llm.value("scorer", bundle.llm.scorer);
            bundle.llm.template_text = llm.value("template", bundle.llm.template_text);
            if (llm.contains("remote")) {
                const json& remote = llm["remote"];
                RemoteScorerConfig& rc = bundle.llm.remote;
                rc.endpoint = remote.value("endpoint", rc.endpoint);
                rc.path = remote.value("path", rc.path);
                rc.rubric = remote.value("rubric", rc.rubric);
                rc.timeout_seconds = remote.value("timeout_seconds", rc.timeout_seconds);
                rc.max_attempts = remote.value("max_attempts", rc.max_attempts);
                rc.backoff_ms = remote.value("backoff_ms", rc.backoff_ms);
                rc.max_in_flight = remote.value("max_in_flight", rc.max_in_flight);
                if (remote.contains("cache_dir")) {
                    rc.cache_dir = remote["cache_dir"].get<std::string>();
                }
            }
        }
        return bundle;
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("inference bundle: ") + e.what());
    }
}

Matrix bundle_features(const InferenceBundle& bundle, const DataTable& table) {
    const FeatureLayout& layout = bundle.layout;
    // Column resolution mirrors the training-time feature build: every layout
    // column must exist with the kind it had at fit time.
    std::vector<std::size_t> indices;
    std::vector<const OneHotEncoder*> encoders;
    std::size_t width = 0;
    for (const std::string& name : layout.source_columns) {
        const auto idx = table.find_column(name);
        if (!idx) {
            throw std::invalid_argument("inference: table lacks feature column '" + name + "'");
        }
        const OneHotEncoder* encoder = nullptr;
        for (const OneHotEncoder& candidate : layout.encoders) {
            if (candidate.column() == name) {
                encoder = &candidate;
                break;
            }
        }
        const bool is_categorical = table.columns()[*idx].kind == ColumnKind::Categorical;
        if (encoder && !is_categorical) {
            throw std::invalid_argument("inference: column '" + name +
                                        "' was categorical at fit time but is numeric here");
        }
        if (!encoder && is_categorical) {
            throw std::invalid_argument("inference: column '" + name +
                                        "' was numeric at fit time but is categorical here");
        }
        indices.push_back(*idx);
        encoders.push_back(encoder);
        width += encoder ? encoder->categories().size() : 1;
    }

    Matrix values(table.row_count(), width);
    for (std::size_t r = 0; r < table.row_count(); ++r) {
        std::size_t c = 0;
        for (std::size_t k = 0; k < indices.size(); ++k) {
            const Cell& cell = table.at(r, indices[k]);
            if (cell.is_missing()) {
                throw std::runtime_error("inference: column '" + layout.source_columns[k] +
                                         "' has missing values (impute first)");
            }
            if (encoders[k]) {
                for (double v : encoders[k]->transform_value(cell.category())) {
                    values(r, c++) = v;
                }
            } else {
                values(r, c++) = cell.number();
            }
        }
    }

    if (bundle.llm.enabled) {
        std::unique_ptr<Scorer> scorer;
        if (bundle.llm.scorer == "mock") {
            scorer = std::make_unique<MockScorer>(table);
        } else if (bundle.llm.scorer == "remote") {
            scorer = std::make_unique<RemoteScorer>(bundle.llm.remote);
        } else {
            throw std::invalid_argument("inference: unknown scorer '" + bundle.llm.scorer + "'");
        }
        const std::vector<LlmScore> scores =
            score_statements(*scorer, table, bundle.llm.template_text);
        Matrix widened(values.rows(), values.cols() + 1);
        for (std::size_t r = 0; r < values.rows(); ++r) {
            for (std::size_t c = 0; c < values.cols(); ++c) {
                widened(r, c) = values(r, c);
            }
            widened(r, values.cols()) = scores[r].score;
        }
        values = std::move(widened);
    }
    return apply_scaler(bundle.scaler, values);
}

std::vector<double> bundle_predict_proba(const InferenceBundle& bundle, const DataTable& table) {
    return predict_proba_values(bundle.model, bundle_features(bundle, table));
}

std::vector<int> bundle_predict(const InferenceBundle& bundle, const DataTable& table) {
    return binarize_label(bundle_predict_proba(bundle, table), bundle.threshold);
}

std::string report_to_json(const RunBundle& bundle) {
    json root;
    root["schema_version"] = 1;
    root["seed"] = bundle.seed;
    root["config"] = json::parse(bundle.config_echo);
    root["cleaning"] = json::parse(bundle.cleaning.to_json_string());
    root["branches"] = {{"raw", branch_to_json(bundle.raw)},
                        {"cleaned", branch_to_json(bundle.cleaned)}};
    root["fairness"] = fairness_to_json(bundle.fairness);
    root["explanations"] = {{"coefficient", explanation_to_json(bundle.coefficients)},
                            {"permutation", explanation_to_json(bundle.permutation)}};
    root["warnings"] = bundle.warnings;
    return root.dump(2);
}

std::vector<std::string> validate_report_json(const std::string& json_text) {
    std::vector<std::string> problems;
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::exception& e) {
        problems.push_back(std::string("report: unparseable JSON: ") + e.what());
        return problems;
    }
    if (!root.is_object()) {
        problems.push_back("report: top level must be an object");
        return problems;
    }
    if (const json* version = require(root, "schema_version", Kind::Number, "report", problems)) {
        if (version->get<int>() != 1) {
            problems.push_back("report.schema_version: expected 1");
        }
    }
    require(root, "seed", Kind::Number, "report", problems);
    require(root, "config", Kind::Object, "report", problems);
    if (const json* cleaning = require(root, "cleaning", Kind::Object, "report", problems)) {
        require(*cleaning, "rows_before", Kind::Number, "report.cleaning", problems);
        require(*cleaning, "rows_after", Kind::Number, "report.cleaning", problems);
        require(*cleaning, "removed_row_ids", Kind::Array, "report.cleaning", problems);
        require(*cleaning, "rule_hits", Kind::Object, "report.cleaning", problems);
    }
    if (const json* branches = require(root, "branches", Kind::Object, "report", problems)) {
        for (const char* name : {"raw", "cleaned"}) {
            if (const json* branch =
                    require(*branches, name, Kind::Object, "report.branches", problems)) {
                validate_branch(*branch, std::string("report.branches.") + name, problems);
            }
        }
    }
    if (const json* fairness = require(root, "fairness", Kind::Object, "report", problems)) {
        require(*fairness, "tau", Kind::Number, "report.fairness", problems);
        if (const json* attributes =
                require(*fairness, "attributes", Kind::Array, "report.fairness", problems)) {
            for (std::size_t i = 0; i < attributes->size(); ++i) {
                const std::string path = "report.fairness.attributes[" + std::to_string(i) + "]";
                const json& attribute = (*attributes)[i];
                if (!attribute.is_object()) {
                    problems.push_back(path + ": expected object");
                    continue;
                }
                require(attribute, "attribute", Kind::String, path, problems);
                require(attribute, "dp_gap", Kind::Number, path, problems);
                require(attribute, "eo_gap", Kind::Number, path, problems);
                require(attribute, "flagged", Kind::Boolean, path, problems);
                if (const json* groups = require(attribute, "groups", Kind::Array, path, problems)) {
                    for (std::size_t g = 0; g < groups->size(); ++g) {
                        const std::string group_path = path + ".groups[" + std::to_string(g) + "]";
                        const json& group = (*groups)[g];
                        if (!group.is_object()) {
                            problems.push_back(group_path + ": expected object");
                            continue;
                        }
                        require(group, "group", Kind::String, group_path, problems);
                        require(group, "support", Kind::Number, group_path, problems);
                        require(group, "selection_rate", Kind::Number, group_path, problems);
                        require(group, "base_rate", Kind::Number, group_path, problems);
                        require(group, "tpr", Kind::NumberOrNull, group_path, problems);
                        require(group, "fpr", Kind::NumberOrNull, group_path, problems);
                        require(group, "usable", Kind::Boolean, group_path, problems);
                    }
                }
            }
        }
    }
    if (const json* explanations = require(root, "explanations", Kind::Object, "report", problems)) {
        for (const char* name : {"coefficient", "permutation"}) {
            if (const json* explanation =
                    require(*explanations, name, Kind::Object, "report.explanations", problems)) {
                const std::string path = std::string("report.explanations.") + name;
                require(*explanation, "method", Kind::String, path, problems);
                if (const json* entries =
                        require(*explanation, "entries", Kind::Array, path, problems)) {
                    for (std::size_t i = 0; i < entries->size(); ++i) {
                        const std::string entry_path = path + ".entries[" + std::to_string(i) + "]";
                        const json& entry = (*entries)[i];
                        if (!entry.is_object()) {
                            problems.push_back(entry_path + ": expected object");
                            continue;
                        }
                        require(entry, "feature", Kind::String, entry_path, problems);
                        require(entry, "importance", Kind::Number, entry_path, problems);
                        require(entry, "rank", Kind::Number, entry_path, problems);
                    }
                }
            }
        }
    }
    require(root, "warnings", Kind::Array, "report", problems);
    return problems;
}

std::vector<std::string> export_report(const RunBundle& bundle, const std::string& out_dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) {
        throw std::runtime_error("export: cannot create directory '" + out_dir +
                                 "': " + ec.message());
    }

    std::vector<std::pair<std::string, std::string>> files;
    files.emplace_back("report.json", report_to_json(bundle) + "\n");

    InferenceBundle inference;
    inference.model = bundle.model;
    inference.scaler = bundle.scaler;
    inference.layout = bundle.layout;
    inference.label_column = bundle.label.label_column;
    inference.threshold = 0.5;
    inference.llm = bundle.llm;
    files.emplace_back("model.json", inference_bundle_to_json(inference) + "\n");

    {
        std::string csv = "feature";
        for (const std::string& name : bundle.correlation_features) {
            csv += "," + csv_escape(name);
        }
        csv += "\n";
        for (std::size_t r = 0; r < bundle.correlation.rows(); ++r) {
            csv += csv_escape(bundle.correlation_features[r]);
            for (std::size_t c = 0; c < bundle.correlation.cols(); ++c) {
                csv += "," + format_double(bundle.correlation(r, c));
            }
            csv += "\n";
        }
        files.emplace_back("correlation.csv", std::move(csv));
    }
    {
        std::string csv = "model,accuracy_raw,accuracy_cleaned\n";
        for (std::size_t i = 0; i < bundle.cleaned.cv_reports.size(); ++i) {
            csv += to_string(bundle.cleaned.cv_reports[i].kind) + "," +
                   format_double(bundle.raw.cv_reports[i].mean_accuracy) + "," +
                   format_double(bundle.cleaned.cv_reports[i].mean_accuracy) + "\n";
        }
        files.emplace_back("accuracy_before_after.csv", std::move(csv));
    }
    {
        std::string csv = "feature,importance,rank,signed_weight\n";
        for (const ImportanceEntry& entry : bundle.coefficients.entries) {
            csv += csv_escape(entry.feature) + "," + format_double(entry.importance) + "," +
                   std::to_string(entry.rank) + "," +
                   (entry.signed_weight ? format_double(*entry.signed_weight) : "") + "\n";
        }
        files.emplace_back("importance.csv", std::move(csv));
    }
    {
        std::string csv = "attribute,group,support,selection_rate,base_rate,tpr,fpr,usable\n";
        for (const AttributeAudit& audit : bundle.fairness.attributes) {
            for (const GroupStats& g : audit.groups) {
                csv += csv_escape(audit.attribute) + "," + csv_escape(g.group) + "," +
                       std::to_string(g.count) + "," + format_double(g.selection_rate) + "," +
                       format_double(g.base_rate) + "," +
                       (g.usable ? format_double(g.tpr) : "") + "," +
                       (g.usable ? format_double(g.fpr) : "") + "," +
                       (g.usable ? "true" : "false") + "\n";
            }
        }
        files.emplace_back("fairness_groups.csv", std::move(csv));
    }
    {
        std::string csv = "model,accuracy\n";
        for (const CvReport& report : bundle.cleaned.cv_reports) {
            csv += to_string(report.kind) + "," + format_double(report.mean_accuracy) + "\n";
        }
        files.emplace_back("model_accuracy.csv", std::move(csv));
    }

    std::vector<std::string> written;
    for (const auto& [name, content] : files) {
        const std::string path = (fs::path(out_dir) / name).string();
        std::ofstream out(path, std::ios::binary);
        if (out) {
            out << content;
            out.close();
        }
        if (!out) {
            for (const std::string& existing : written) {
                fs::remove(existing, ec);
            }
            throw std::runtime_error("export: cannot write '" + path + "'");
        }
        written.push_back(path);
    }
    return written;
}

}  // namespace admitml
