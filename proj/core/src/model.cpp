#include "admitml/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "model_internal.hpp"

namespace admitml {

using nlohmann::json;

namespace {
constexpr int kModelSchemaVersion = 1;
}

std::string to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::LogisticRegression: return "logistic_regression";
        case ModelKind::NaiveBayes: return "naive_bayes";
        case ModelKind::RandomForest: return "random_forest";
        case ModelKind::NeuralNetwork: return "neural_network";
        case ModelKind::StackedEnsemble: return "stacked_ensemble";
    }
    throw std::logic_error("to_string: unknown ModelKind");
}

ModelKind model_kind_from_string(const std::string& name) {
    for (ModelKind kind : all_model_kinds()) {
        if (to_string(kind) == name) return kind;
    }
    throw std::invalid_argument("unknown model kind '" + name + "'");
}

const std::vector<ModelKind>& all_model_kinds() {
    static const std::vector<ModelKind> kinds = {
        ModelKind::LogisticRegression, ModelKind::NaiveBayes,     ModelKind::RandomForest,
        ModelKind::NeuralNetwork,      ModelKind::StackedEnsemble,
    };
    return kinds;
}

TrainedClassifier train_model(ModelKind kind, const ModelConfigs& configs, const FeatureMatrix& X,
                              std::uint64_t seed) {
    switch (kind) {
        case ModelKind::LogisticRegression: return train_logistic(X, configs.logistic);
        case ModelKind::NaiveBayes: return train_naive_bayes(X, configs.naive_bayes);
        case ModelKind::RandomForest: return train_random_forest(X, configs.forest, seed);
        case ModelKind::NeuralNetwork: return train_mlp(X, configs.mlp, seed);
        case ModelKind::StackedEnsemble: return train_stacked(X, configs, seed);
    }
    throw std::logic_error("train_model: unknown ModelKind");
}

// ---------------------------------------------------------------------------
// Prediction

namespace {

double nb_positive_proba(const GaussianNbParams& nb, std::span<const double> row) {
    double log0 = std::log(nb.prior0);
    double log1 = std::log(nb.prior1);
    for (std::size_t j = 0; j < row.size(); ++j) {
        const double d0 = row[j] - nb.mean0[j];
        const double d1 = row[j] - nb.mean1[j];
        log0 += -0.5 * std::log(2.0 * std::numbers::pi * nb.var0[j]) - d0 * d0 / (2.0 * nb.var0[j]);
        log1 += -0.5 * std::log(2.0 * std::numbers::pi * nb.var1[j]) - d1 * d1 / (2.0 * nb.var1[j]);
    }
    return detail::sigmoid(log1 - log0);
}

}  // namespace

std::vector<double> predict_proba_values(const TrainedClassifier& model, const Matrix& values) {
    if (values.cols() != model.feature_names.size()) {
        throw std::invalid_argument("predict: matrix has " + std::to_string(values.cols()) +
                                    " columns, model was trained on " +
                                    std::to_string(model.feature_names.size()));
    }
    const std::size_t n = values.rows();
    std::vector<double> probs(n, 0.0);

    if (const auto* lr = std::get_if<LogisticParams>(&model.params)) {
        for (std::size_t i = 0; i < n; ++i) {
            probs[i] = detail::logistic_proba(*lr, values.row(i));
        }
    } else if (const auto* nb = std::get_if<GaussianNbParams>(&model.params)) {
        for (std::size_t i = 0; i < n; ++i) {
            probs[i] = nb_positive_proba(*nb, values.row(i));
        }
    } else if (const auto* forest = std::get_if<ForestParams>(&model.params)) {
        for (std::size_t i = 0; i < n; ++i) {
            double total = 0.0;
            for (const Tree& tree : forest->trees) {
                total += tree.predict(values.row(i));
            }
            probs[i] = total / static_cast<double>(forest->trees.size());
        }
    } else if (const auto* mlp = std::get_if<MlpParams>(&model.params)) {
        for (std::size_t i = 0; i < n; ++i) {
            probs[i] = detail::sigmoid(detail::mlp_logit(mlp->weights, values.row(i)));
        }
    } else if (const auto* stack = std::get_if<StackParams>(&model.params)) {
        Matrix meta(n, stack->base_models.size());
        for (std::size_t m = 0; m < stack->base_models.size(); ++m) {
            const auto base = predict_proba_values(stack->base_models[m], values);
            for (std::size_t i = 0; i < n; ++i) {
                meta(i, m) = base[i];
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            probs[i] = detail::logistic_proba(stack->meta, meta.row(i));
        }
    } else {
        throw std::logic_error("predict: unhandled model parameters");
    }
    return probs;
}

std::vector<double> predict_proba(const TrainedClassifier& model, const FeatureMatrix& X) {
    if (X.feature_names != model.feature_names) {
        std::set<std::string> trained(model.feature_names.begin(), model.feature_names.end());
        std::set<std::string> given(X.feature_names.begin(), X.feature_names.end());
        std::ostringstream msg;
        msg << "predict: feature names do not match training";
        bool any = false;
        for (const auto& name : trained) {
            if (!given.count(name)) {
                msg << (any ? ", " : "; missing: ") << name;
                any = true;
            }
        }
        bool any_extra = false;
        for (const auto& name : given) {
            if (!trained.count(name)) {
                msg << (any_extra ? ", " : "; unexpected: ") << name;
                any_extra = true;
            }
        }
        if (!any && !any_extra) {
            msg << "; same features in a different order";
        }
        throw std::invalid_argument(msg.str());
    }
    return predict_proba_values(model, X.values);
}

std::vector<int> predict(const TrainedClassifier& model, const FeatureMatrix& X,
                         double threshold) {
    const auto probs = predict_proba(model, X);
    std::vector<int> labels(probs.size());
    for (std::size_t i = 0; i < probs.size(); ++i) {
        labels[i] = probs[i] >= threshold ? 1 : 0;
    }
    return labels;
}

// ---------------------------------------------------------------------------
// JSON serialization

namespace {

json logistic_to_json(const LogisticParams& p) {
    return json{{"weights", p.weights},
                {"intercept", p.intercept},
                {"config",
                 {{"l2_strength", p.config.l2_strength},
                  {"learning_rate", p.config.learning_rate},
                  {"max_iters", p.config.max_iters},
                  {"tolerance", p.config.tolerance}}}};
}

LogisticParams logistic_from_json(const json& j) {
    LogisticParams p;
    p.weights = j.at("weights").get<std::vector<double>>();
    p.intercept = j.at("intercept").get<double>();
    const json& c = j.at("config");
    p.config.l2_strength = c.at("l2_strength").get<double>();
    p.config.learning_rate = c.at("learning_rate").get<double>();
    p.config.max_iters = c.at("max_iters").get<std::size_t>();
    p.config.tolerance = c.at("tolerance").get<double>();
    return p;
}

json params_to_json(const TrainedClassifier& model);

json model_to_json(const TrainedClassifier& model) {
    return json{{"schema_version", kModelSchemaVersion},
                {"kind", to_string(model.kind)},
                {"feature_names", model.feature_names},
                {"training_seed", model.training_seed},
                {"params", params_to_json(model)}};
}

json params_to_json(const TrainedClassifier& model) {
    if (const auto* lr = std::get_if<LogisticParams>(&model.params)) {
        return logistic_to_json(*lr);
    }
    if (const auto* nb = std::get_if<GaussianNbParams>(&model.params)) {
        return json{{"prior0", nb->prior0},
                    {"prior1", nb->prior1},
                    {"mean0", nb->mean0},
                    {"mean1", nb->mean1},
                    {"var0", nb->var0},
                    {"var1", nb->var1},
                    {"variance_floor", nb->variance_floor},
                    {"config", {{"variance_floor_factor", nb->config.variance_floor_factor}}}};
    }
    if (const auto* forest = std::get_if<ForestParams>(&model.params)) {
        json trees = json::array();
        for (const Tree& tree : forest->trees) {
            json nodes = json::array();
            for (const TreeNode& node : tree.nodes) {
                nodes.push_back(json{{"feature", node.feature},
                                     {"threshold", node.threshold},
                                     {"left", node.left},
                                     {"right", node.right},
                                     {"positive_probability", node.positive_probability}});
            }
            trees.push_back(json{{"nodes", std::move(nodes)}});
        }
        return json{{"trees", std::move(trees)},
                    {"config",
                     {{"n_trees", forest->config.n_trees},
                      {"max_depth", forest->config.max_depth},
                      {"features_per_split", forest->config.features_per_split},
                      {"min_samples_split", forest->config.min_samples_split}}}};
    }
    if (const auto* mlp = std::get_if<MlpParams>(&model.params)) {
        json w1 = json::array();
        for (std::size_t h = 0; h < mlp->weights.w1.rows(); ++h) {
            const auto row = mlp->weights.w1.row(h);
            w1.push_back(std::vector<double>(row.begin(), row.end()));
        }
        return json{{"weights",
                     {{"w1", std::move(w1)},
                      {"b1", mlp->weights.b1},
                      {"w2", mlp->weights.w2},
                      {"b2", mlp->weights.b2}}},
                    {"best_epoch", mlp->best_epoch},
                    {"config",
                     {{"hidden_units", mlp->config.hidden_units},
                      {"learning_rate", mlp->config.learning_rate},
                      {"max_epochs", mlp->config.max_epochs},
                      {"patience", mlp->config.patience},
                      {"validation_fraction", mlp->config.validation_fraction}}}};
    }
    if (const auto* stack = std::get_if<StackParams>(&model.params)) {
        json bases = json::array();
        for (const TrainedClassifier& base : stack->base_models) {
            bases.push_back(model_to_json(base));
        }
        return json{{"base_models", std::move(bases)},
                    {"meta", logistic_to_json(stack->meta)},
                    {"config", {{"oof_folds", stack->config.oof_folds}}}};
    }
    throw std::logic_error("model_to_json: unhandled model parameters");
}

TrainedClassifier model_from_json(const json& j) {
    const int version = j.at("schema_version").get<int>();
    if (version != kModelSchemaVersion) {
        throw std::runtime_error("unsupported model schema_version " + std::to_string(version));
    }
    TrainedClassifier model;
    model.kind = model_kind_from_string(j.at("kind").get<std::string>());
    model.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    model.training_seed = j.at("training_seed").get<std::uint64_t>();
    const json& p = j.at("params");

    switch (model.kind) {
        case ModelKind::LogisticRegression: {
            model.params = logistic_from_json(p);
            break;
        }
        case ModelKind::NaiveBayes: {
            GaussianNbParams nb;
            nb.prior0 = p.at("prior0").get<double>();
            nb.prior1 = p.at("prior1").get<double>();
            nb.mean0 = p.at("mean0").get<std::vector<double>>();
            nb.mean1 = p.at("mean1").get<std::vector<double>>();
            nb.var0 = p.at("var0").get<std::vector<double>>();
            nb.var1 = p.at("var1").get<std::vector<double>>();
            nb.variance_floor = p.at("variance_floor").get<double>();
            nb.config.variance_floor_factor =
                p.at("config").at("variance_floor_factor").get<double>();
            model.params = std::move(nb);
            break;
        }
        case ModelKind::RandomForest: {
            ForestParams forest;
            const json& c = p.at("config");
            forest.config.n_trees = c.at("n_trees").get<std::size_t>();
            forest.config.max_depth = c.at("max_depth").get<std::size_t>();
            forest.config.features_per_split = c.at("features_per_split").get<std::size_t>();
            forest.config.min_samples_split = c.at("min_samples_split").get<std::size_t>();
            for (const json& jt : p.at("trees")) {
                Tree tree;
                for (const json& jn : jt.at("nodes")) {
                    TreeNode node;
                    node.feature = jn.at("feature").get<int>();
                    node.threshold = jn.at("threshold").get<double>();
                    node.left = jn.at("left").get<int>();
                    node.right = jn.at("right").get<int>();
                    node.positive_probability = jn.at("positive_probability").get<double>();
                    tree.nodes.push_back(node);
                }
                forest.trees.push_back(std::move(tree));
            }
            model.params = std::move(forest);
            break;
        }
        case ModelKind::NeuralNetwork: {
            MlpParams mlp;
            const json& c = p.at("config");
            mlp.config.hidden_units = c.at("hidden_units").get<std::size_t>();
            mlp.config.learning_rate = c.at("learning_rate").get<double>();
            mlp.config.max_epochs = c.at("max_epochs").get<std::size_t>();
            mlp.config.patience = c.at("patience").get<std::size_t>();
            mlp.config.validation_fraction = c.at("validation_fraction").get<double>();
            mlp.best_epoch = p.at("best_epoch").get<std::size_t>();
            const json& w = p.at("weights");
            const auto w1 = w.at("w1").get<std::vector<std::vector<double>>>();
            mlp.weights.w1 = Matrix::from_rows(w1);
            mlp.weights.b1 = w.at("b1").get<std::vector<double>>();
            mlp.weights.w2 = w.at("w2").get<std::vector<double>>();
            mlp.weights.b2 = w.at("b2").get<double>();
            model.params = std::move(mlp);
            break;
        }
        case ModelKind::StackedEnsemble: {
            StackParams stack;
            stack.config.oof_folds = p.at("config").at("oof_folds").get<std::size_t>();
            stack.meta = logistic_from_json(p.at("meta"));
            for (const json& jb : p.at("base_models")) {
                stack.base_models.push_back(model_from_json(jb));
            }
            model.params = std::move(stack);
            break;
        }
    }
    return model;
}

}  // namespace

std::string model_to_json_string(const TrainedClassifier& model) {
    return model_to_json(model).dump(2);
}

TrainedClassifier model_from_json_string(const std::string& json_text) {
    try {
        return model_from_json(json::parse(json_text));
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("model_from_json_string: ") + e.what());
    }
}

}  // namespace admitml
