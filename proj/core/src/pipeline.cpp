#include "admitml/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "admitml/rng.hpp"
#include "admitml/splits.hpp"

namespace admitml {
namespace {

using nlohmann::json;

template <typename F>
auto stage(const std::string& name, F&& fn) {
    try {
        return fn();
    } catch (const std::exception& e) {
        throw std::runtime_error("stage '" + name + "': " + e.what());
    }
}

void check_keys(const json& object, const std::string& where,
                std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : object.items()) {
        (void)value;
        if (std::find_if(allowed.begin(), allowed.end(),
                         [&](const char* a) { return key == a; }) == allowed.end()) {
            throw std::runtime_error("pipeline config: unknown key '" + key + "' in " + where);
        }
    }
}

SyntheticConfig parse_synthetic(const json& object) {
    check_keys(object, "source.synthetic",
               {"rows", "anomaly_count", "gender_bias", "parental_bias", "noise_sd"});
    SyntheticConfig config;
    config.rows = object.value("rows", config.rows);
    config.anomaly_count = object.value("anomaly_count", config.anomaly_count);
    config.gender_bias = object.value("gender_bias", config.gender_bias);
    config.parental_bias = object.value("parental_bias", config.parental_bias);
    config.noise_sd = object.value("noise_sd", config.noise_sd);
    return config;
}

SensitiveSpec parse_sensitive(const json& object, std::size_t index) {
    check_keys(object, "sensitive[" + std::to_string(index) + "]",
               {"column", "groups", "default_group"});
    SensitiveSpec spec;
    if (!object.contains("column")) {
        throw std::runtime_error("pipeline config: sensitive attribute needs a \"column\"");
    }
    spec.column = object["column"].get<std::string>();
    if (object.contains("groups")) {
        for (const auto& [raw, group] : object["groups"].items()) {
            spec.group_of[raw] = group.get<std::string>();
        }
    }
    if (object.contains("default_group")) {
        spec.default_group = object["default_group"].get<std::string>();
    }
    return spec;
}

void parse_models(const json& object, ModelConfigs& models) {
    check_keys(object, "models", {"logistic", "naive_bayes", "forest", "mlp", "stack"});
    if (object.contains("logistic")) {
        const json& lr = object["logistic"];
        check_keys(lr, "models.logistic", {"l2_strength", "learning_rate", "max_iters", "tolerance"});
        models.logistic.l2_strength = lr.value("l2_strength", models.logistic.l2_strength);
        models.logistic.learning_rate = lr.value("learning_rate", models.logistic.learning_rate);
        models.logistic.max_iters = lr.value("max_iters", models.logistic.max_iters);
        models.logistic.tolerance = lr.value("tolerance", models.logistic.tolerance);
    }
    if (object.contains("naive_bayes")) {
        const json& nb = object["naive_bayes"];
        check_keys(nb, "models.naive_bayes", {"variance_floor_factor"});
        models.naive_bayes.variance_floor_factor =
            nb.value("variance_floor_factor", models.naive_bayes.variance_floor_factor);
    }
    if (object.contains("forest")) {
        const json& rf = object["forest"];
        check_keys(rf, "models.forest",
                   {"n_trees", "max_depth", "features_per_split", "min_samples_split"});
        models.forest.n_trees = rf.value("n_trees", models.forest.n_trees);
        models.forest.max_depth = rf.value("max_depth", models.forest.max_depth);
        models.forest.features_per_split =
            rf.value("features_per_split", models.forest.features_per_split);
        models.forest.min_samples_split =
            rf.value("min_samples_split", models.forest.min_samples_split);
    }
    if (object.contains("mlp")) {
        const json& mlp = object["mlp"];
        check_keys(mlp, "models.mlp",
                   {"hidden_units", "learning_rate", "max_epochs", "patience", "validation_fraction"});
        models.mlp.hidden_units = mlp.value("hidden_units", models.mlp.hidden_units);
        models.mlp.learning_rate = mlp.value("learning_rate", models.mlp.learning_rate);
        models.mlp.max_epochs = mlp.value("max_epochs", models.mlp.max_epochs);
        models.mlp.patience = mlp.value("patience", models.mlp.patience);
        models.mlp.validation_fraction =
            mlp.value("validation_fraction", models.mlp.validation_fraction);
    }
    if (object.contains("stack")) {
        const json& st = object["stack"];
        check_keys(st, "models.stack", {"oof_folds"});
        models.stack.oof_folds = st.value("oof_folds", models.stack.oof_folds);
    }
}

// Default sensitive attributes over the bundled schema: gender as-is and
// parental education coarsened to high/low.
std::vector<SensitiveSpec> default_sensitive() {
    std::vector<SensitiveSpec> sensitive;
    SensitiveSpec gender;
    gender.column = "Gender";
    sensitive.push_back(std::move(gender));
    SensitiveSpec parental;
    parental.column = "Parental_Education";
    for (const std::string& level : high_parental_education_levels()) {
        parental.group_of[level] = "high";
    }
    parental.default_group = "low";
    sensitive.push_back(std::move(parental));
    return sensitive;
}

DataTable load_source(const PipelineConfig& config) {
    const bool has_csv = !config.source.csv_paths.empty();
    const bool has_synthetic = config.source.synthetic.has_value();
    if (has_csv == has_synthetic) {
        throw std::invalid_argument(
            "pipeline needs exactly one data source: csv paths or synthetic settings");
    }
    if (has_synthetic) {
        return generate_synthetic(*config.source.synthetic, config.seed);
    }
    if (config.source.csv_paths.size() == 1) {
        return parse_csv_file(config.source.csv_paths.front());
    }
    std::vector<std::pair<DataTable, std::string>> tables;
    for (const std::string& path : config.source.csv_paths) {
        tables.emplace_back(parse_csv_file(path), std::filesystem::path(path).stem().string());
    }
    return merge_outer(tables);
}

DataTable binarize_label_column(DataTable table, const LabelConfig& label) {
    const std::size_t source = table.column_index(label.source_column);
    if (table.columns()[source].kind != ColumnKind::Numeric) {
        throw std::invalid_argument("label column '" + label.source_column + "' must be numeric");
    }
    if (label.source_column == label.label_column) {
        for (std::size_t r = 0; r < table.row_count(); ++r) {
            const Cell& cell = table.at(r, source);
            if (cell.is_missing() || (cell.number() != 0.0 && cell.number() != 1.0)) {
                throw std::runtime_error("label column '" + label.label_column +
                                         "' must be binary 0/1 at row " + std::to_string(r));
            }
        }
        return table;
    }
    if (table.has_column(label.label_column)) {
        throw std::invalid_argument("label column '" + label.label_column +
                                    "' already exists; cannot binarize '" + label.source_column +
                                    "' into it");
    }
    std::vector<Cell> cells;
    cells.reserve(table.row_count());
    for (std::size_t r = 0; r < table.row_count(); ++r) {
        const Cell& cell = table.at(r, source);
        if (cell.is_missing()) {
            throw std::runtime_error("label source column '" + label.source_column +
                                     "' has a missing value at row " + std::to_string(r) +
                                     " (impute first)");
        }
        cells.emplace_back(cell.number() >= label.threshold ? 1.0 : 0.0);
    }
    table.add_column({label.label_column, ColumnKind::Numeric}, std::move(cells));
    table.drop_column(source);
    return table;
}

struct BranchArtifacts {
    BranchResult result;
    FeatureMatrix features;      // full matrix, unscaled
    FeatureLayout layout;
    SplitIndices split;
    FeatureMatrix train_scaled;  // final-model inputs
    FeatureMatrix test_scaled;
    Scaler scaler;
    TrainedClassifier model;
    std::vector<double> test_scores;
    std::vector<int> test_predictions;
};

BranchArtifacts run_branch(const DataTable& table, const PipelineConfig& config, std::string tag,
                           std::vector<std::string>& warnings) {
    BranchArtifacts branch;
    branch.result.tag = tag;
    branch.result.rows = table.row_count();

    stage("features (" + tag + ")", [&] {
        FeatureBuild build = build_features(table, feature_spec_of(config));
        branch.features = std::move(build.matrix);
        branch.layout = std::move(build.layout);
        return 0;
    });

    if (config.llm.enabled) {
        stage("augment (" + tag + ")", [&] {
            const std::string& template_text = config.llm.template_text.empty()
                                                   ? default_statement_template()
                                                   : config.llm.template_text;
            std::unique_ptr<Scorer> scorer = make_scorer(config.llm, table);
            const std::vector<LlmScore> scores = score_statements(*scorer, table, template_text);
            branch.features = augment_features(branch.features, scores);
            for (const std::string& warning : scorer->warnings()) {
                warnings.push_back("augment (" + tag + "): " + warning);
            }
            return 0;
        });
    }

    stage("split (" + tag + ")", [&] {
        branch.split = stratified_split(branch.features.labels, config.train_fraction, config.seed);
        return 0;
    });
    const FeatureMatrix train = branch.features.take_rows(branch.split.train);
    const FeatureMatrix test = branch.features.take_rows(branch.split.test);

    stage("cross-validation (" + tag + ")", [&] {
        CvConfig cv;
        cv.folds = config.cv_folds;
        cv.seed = config.seed;
        for (ModelKind kind : all_model_kinds()) {
            branch.result.cv_reports.push_back(kfold_cv(train, kind, config.models, cv));
        }
        branch.result.selected = select_best(branch.result.cv_reports);
        return 0;
    });

    stage("train (" + tag + ")", [&] {
        branch.scaler = fit_scaler(train.values);
        branch.train_scaled = train;
        branch.train_scaled.values = apply_scaler(branch.scaler, train.values);
        branch.test_scaled = test;
        branch.test_scaled.values = apply_scaler(branch.scaler, test.values);
        branch.model = train_model(branch.result.selected, config.models, branch.train_scaled,
                                   derive_seed(config.seed, "final-train"));
        return 0;
    });

    stage("evaluate (" + tag + ")", [&] {
        branch.test_scores = predict_proba(branch.model, branch.test_scaled);
        branch.test_predictions = binarize_label(branch.test_scores);
        branch.result.test_metrics =
            compute_metrics(branch.test_scaled.labels, branch.test_predictions, branch.test_scores);
        return 0;
    });

    return branch;
}

}  // namespace

namespace {

PipelineConfig parse_pipeline_config_impl(const std::string& json_text) {
    const json root = json::parse(json_text);
    if (!root.is_object()) {
        throw std::runtime_error("pipeline config: top level must be an object");
    }
    check_keys(root, "the top level",
               {"source", "seed", "rename", "label", "cleaning", "missingness_limit",
                "exclude_columns", "sensitive", "include_sensitive_features", "models",
                "train_fraction", "cv_folds", "tau", "llm"});

    PipelineConfig config;
    if (root.contains("source")) {
        const json& source = root["source"];
        check_keys(source, "source", {"csv", "synthetic"});
        if (source.contains("csv")) {
            for (const auto& path : source["csv"]) {
                config.source.csv_paths.push_back(path.get<std::string>());
            }
        }
        if (source.contains("synthetic")) {
            config.source.synthetic = parse_synthetic(source["synthetic"]);
        }
    }
    config.seed = root.value("seed", config.seed);
    if (root.contains("rename")) {
        for (const auto& [from, to] : root["rename"].items()) {
            config.rename[from] = to.get<std::string>();
        }
    }
    if (root.contains("label")) {
        const json& label = root["label"];
        check_keys(label, "label", {"source_column", "column", "threshold"});
        config.label.source_column = label.value("source_column", config.label.source_column);
        config.label.label_column = label.value("column", config.label.label_column);
        config.label.threshold = label.value("threshold", config.label.threshold);
    }
    if (root.contains("cleaning")) {
        const json& cleaning = root["cleaning"];
        check_keys(cleaning, "cleaning",
                   {"gre_column", "cgpa_column", "strong_gre_min", "strong_cgpa_min", "weak_gre_max",
                    "weak_cgpa_max"});
        config.cleaning.gre_column = cleaning.value("gre_column", config.cleaning.gre_column);
        config.cleaning.cgpa_column = cleaning.value("cgpa_column", config.cleaning.cgpa_column);
        config.cleaning.strong_gre_min =
            cleaning.value("strong_gre_min", config.cleaning.strong_gre_min);
        config.cleaning.strong_cgpa_min =
            cleaning.value("strong_cgpa_min", config.cleaning.strong_cgpa_min);
        config.cleaning.weak_gre_max = cleaning.value("weak_gre_max", config.cleaning.weak_gre_max);
        config.cleaning.weak_cgpa_max =
            cleaning.value("weak_cgpa_max", config.cleaning.weak_cgpa_max);
    }
    config.missingness_limit = root.value("missingness_limit", config.missingness_limit);
    if (root.contains("exclude_columns")) {
        for (const auto& name : root["exclude_columns"]) {
            config.exclude_columns.push_back(name.get<std::string>());
        }
    }
    if (root.contains("sensitive")) {
        for (std::size_t i = 0; i < root["sensitive"].size(); ++i) {
            config.sensitive.push_back(parse_sensitive(root["sensitive"][i], i));
        }
    } else {
        config.sensitive = default_sensitive();
    }
    config.include_sensitive_features =
        root.value("include_sensitive_features", config.include_sensitive_features);
    if (root.contains("models")) {
        parse_models(root["models"], config.models);
    }
    config.train_fraction = root.value("train_fraction", config.train_fraction);
    config.cv_folds = root.value("cv_folds", config.cv_folds);
    config.tau = root.value("tau", config.tau);
    if (root.contains("llm")) {
        const json& llm = root["llm"];
        check_keys(llm, "llm", {"enabled", "scorer", "template", "remote"});
        config.llm.enabled = llm.value("enabled", config.llm.enabled);
        config.llm.scorer = llm.value("scorer", config.llm.scorer);
        config.llm.template_text = llm.value("template", config.llm.template_text);
        if (llm.contains("remote")) {
            const json& remote = llm["remote"];
            check_keys(remote, "llm.remote",
                       {"endpoint", "path", "rubric", "timeout_seconds", "max_attempts",
                        "backoff_ms", "max_in_flight", "cache_dir"});
            RemoteScorerConfig& rc = config.llm.remote;
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
    return config;
}

}  // namespace

PipelineConfig parse_pipeline_config(const std::string& json_text) {
    try {
        return parse_pipeline_config_impl(json_text);
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("pipeline config: ") + e.what());
    }
}

PipelineConfig parse_pipeline_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("pipeline config: cannot open '" + path + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_pipeline_config(buffer.str());
}

std::string pipeline_config_to_json(const PipelineConfig& config) {
    json root;
    json source = json::object();
    if (!config.source.csv_paths.empty()) {
        source["csv"] = config.source.csv_paths;
    }
    if (config.source.synthetic) {
        const SyntheticConfig& s = *config.source.synthetic;
        source["synthetic"] = {{"rows", s.rows},
                               {"anomaly_count", s.anomaly_count},
                               {"gender_bias", s.gender_bias},
                               {"parental_bias", s.parental_bias},
                               {"noise_sd", s.noise_sd}};
    }
    root["source"] = source;
    root["seed"] = config.seed;
    root["rename"] = config.rename;
    root["label"] = {{"source_column", config.label.source_column},
                     {"column", config.label.label_column},
                     {"threshold", config.label.threshold}};
    root["cleaning"] = {{"gre_column", config.cleaning.gre_column},
                        {"cgpa_column", config.cleaning.cgpa_column},
                        {"strong_gre_min", config.cleaning.strong_gre_min},
                        {"strong_cgpa_min", config.cleaning.strong_cgpa_min},
                        {"weak_gre_max", config.cleaning.weak_gre_max},
                        {"weak_cgpa_max", config.cleaning.weak_cgpa_max}};
    root["missingness_limit"] = config.missingness_limit;
    root["exclude_columns"] = config.exclude_columns;
    json sensitive = json::array();
    for (const SensitiveSpec& spec : config.sensitive) {
        json entry = {{"column", spec.column}, {"groups", spec.group_of}};
        if (spec.default_group) {
            entry["default_group"] = *spec.default_group;
        }
        sensitive.push_back(std::move(entry));
    }
    root["sensitive"] = sensitive;
    root["include_sensitive_features"] = config.include_sensitive_features;
    root["models"] = {
        {"logistic",
         {{"l2_strength", config.models.logistic.l2_strength},
          {"learning_rate", config.models.logistic.learning_rate},
          {"max_iters", config.models.logistic.max_iters},
          {"tolerance", config.models.logistic.tolerance}}},
        {"naive_bayes", {{"variance_floor_factor", config.models.naive_bayes.variance_floor_factor}}},
        {"forest",
         {{"n_trees", config.models.forest.n_trees},
          {"max_depth", config.models.forest.max_depth},
          {"features_per_split", config.models.forest.features_per_split},
          {"min_samples_split", config.models.forest.min_samples_split}}},
        {"mlp",
         {{"hidden_units", config.models.mlp.hidden_units},
          {"learning_rate", config.models.mlp.learning_rate},
          {"max_epochs", config.models.mlp.max_epochs},
          {"patience", config.models.mlp.patience},
          {"validation_fraction", config.models.mlp.validation_fraction}}},
        {"stack", {{"oof_folds", config.models.stack.oof_folds}}}};
    root["train_fraction"] = config.train_fraction;
    root["cv_folds"] = config.cv_folds;
    root["tau"] = config.tau;
    json llm = {{"enabled", config.llm.enabled},
                {"scorer", config.llm.scorer},
                {"template", config.llm.template_text}};
    if (config.llm.scorer == "remote") {
        json remote = {{"endpoint", config.llm.remote.endpoint},
                       {"path", config.llm.remote.path},
                       {"rubric", config.llm.remote.rubric},
                       {"timeout_seconds", config.llm.remote.timeout_seconds},
                       {"max_attempts", config.llm.remote.max_attempts},
                       {"backoff_ms", config.llm.remote.backoff_ms},
                       {"max_in_flight", config.llm.remote.max_in_flight}};
        if (config.llm.remote.cache_dir) {
            remote["cache_dir"] = *config.llm.remote.cache_dir;
        }
        llm["remote"] = remote;
    }
    root["llm"] = llm;
    return root.dump(2);
}

PreparedData prepare_data(const PipelineConfig& config) {
    PreparedData prep;
    prep.table = stage("load", [&] { return load_source(config); });
    stage("rename", [&] {
        for (const auto& [from, to] : config.rename) {
            prep.table.rename_column(from, to);
        }
        return 0;
    });
    prep.table = stage("impute", [&] { return impute(prep.table); });
    stage("missingness", [&] {
        std::vector<std::string> exempt = {config.label.source_column, config.label.label_column};
        for (const SensitiveSpec& spec : config.sensitive) {
            exempt.push_back(spec.column);
        }
        DropResult dropped = drop_high_missingness(prep.table, config.missingness_limit, exempt);
        prep.table = std::move(dropped.table);
        for (const std::string& column : dropped.dropped) {
            prep.warnings.push_back("dropped column '" + column + "': more than " +
                                    std::to_string(config.missingness_limit * 100.0) + "% missing");
        }
        return 0;
    });
    prep.table =
        stage("label", [&] { return binarize_label_column(std::move(prep.table), config.label); });
    return prep;
}

FeatureSpec feature_spec_of(const PipelineConfig& config) {
    FeatureSpec spec;
    spec.label_column = config.label.label_column;
    spec.label_threshold = 0.5;
    spec.exclude_columns = config.exclude_columns;
    spec.sensitive = config.sensitive;
    spec.include_sensitive_features = config.include_sensitive_features;
    return spec;
}

std::unique_ptr<Scorer> make_scorer(const LlmConfig& llm, const DataTable& table) {
    if (llm.scorer == "mock") {
        return std::make_unique<MockScorer>(table);
    }
    if (llm.scorer == "remote") {
        return std::make_unique<RemoteScorer>(llm.remote);
    }
    throw std::invalid_argument("unknown scorer '" + llm.scorer +
                                "' (expected \"mock\" or \"remote\")");
}

RunBundle run_pipeline(const PipelineConfig& config) {
    RunBundle bundle;
    bundle.seed = config.seed;
    bundle.label = config.label;
    bundle.llm = config.llm;
    if (bundle.llm.enabled && bundle.llm.template_text.empty()) {
        bundle.llm.template_text = default_statement_template();
    }
    bundle.config_echo = pipeline_config_to_json(config);

    PreparedData prep = prepare_data(config);
    bundle.warnings = std::move(prep.warnings);
    DataTable table = std::move(prep.table);

    const DataTable cleaned_table = stage("clean", [&] {
        CleaningResult cleaned = clean_anomalies(table, config.cleaning);
        bundle.cleaning = std::move(cleaned.log);
        return std::move(cleaned.table);
    });

    BranchArtifacts raw = run_branch(table, config, "raw", bundle.warnings);
    BranchArtifacts cleaned = run_branch(cleaned_table, config, "cleaned", bundle.warnings);
    bundle.raw = std::move(raw.result);
    bundle.cleaned = std::move(cleaned.result);
    bundle.model = std::move(cleaned.model);
    bundle.scaler = std::move(cleaned.scaler);
    bundle.layout = std::move(cleaned.layout);

    stage("fairness", [&] {
        if (cleaned.test_scaled.sensitive.empty()) {
            bundle.fairness.tau = config.tau;
            bundle.warnings.push_back(
                "fairness: no sensitive attributes configured, audit skipped");
            return 0;
        }
        bundle.fairness = fairness_audit(cleaned.test_predictions, cleaned.test_scaled.labels,
                                         cleaned.test_scaled.sensitive, config.tau);
        return 0;
    });

    stage("explain", [&] {
        const TrainedClassifier* logistic = &bundle.model;
        TrainedClassifier fitted;
        if (bundle.model.kind != ModelKind::LogisticRegression) {
            fitted = train_logistic(cleaned.train_scaled, config.models.logistic);
            logistic = &fitted;
        }
        bundle.coefficients = coefficient_importance(*logistic);
        bundle.permutation = permutation_importance(bundle.model, cleaned.test_scaled, 10,
                                                    derive_seed(config.seed, "perm-explain"));
        return 0;
    });

    stage("correlation", [&] {
        const FeatureMatrix& X = cleaned.features;
        Matrix with_label(X.values.rows(), X.values.cols() + 1);
        for (std::size_t r = 0; r < X.values.rows(); ++r) {
            for (std::size_t c = 0; c < X.values.cols(); ++c) {
                with_label(r, c) = X.values(r, c);
            }
            with_label(r, X.values.cols()) = static_cast<double>(X.labels[r]);
        }
        bundle.correlation = correlation_matrix(with_label);
        bundle.correlation_features = X.feature_names;
        bundle.correlation_features.push_back(config.label.label_column);
        return 0;
    });

    return bundle;
}

}  // namespace admitml
