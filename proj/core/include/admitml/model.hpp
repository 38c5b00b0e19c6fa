#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "admitml/features.hpp"
#include "admitml/matrix.hpp"

namespace admitml {

enum class ModelKind {
    LogisticRegression,
    NaiveBayes,
    RandomForest,
    NeuralNetwork,
    StackedEnsemble,
};

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);
const std::vector<ModelKind>& all_model_kinds();

// ---------------------------------------------------------------------------
// Per-model parameters. Hyperparameters ride along with the learned values so
// a serialized model is self-describing.

struct LogisticConfig {
    double l2_strength = 1.0;
    double learning_rate = 0.1;
    std::size_t max_iters = 1000;
    double tolerance = 1e-6;  // gradient infinity-norm stop
};

struct LogisticParams {
    std::vector<double> weights;
    double intercept = 0.0;
    LogisticConfig config;
};

struct GaussianNbConfig {
    // variance floor = factor * (largest per-feature variance)
    double variance_floor_factor = 1e-9;
};

struct GaussianNbParams {
    double prior0 = 0.5, prior1 = 0.5;
    std::vector<double> mean0, mean1;
    std::vector<double> var0, var1;  // clamped to >= variance_floor
    double variance_floor = 0.0;
    GaussianNbConfig config;
};

struct ForestConfig {
    std::size_t n_trees = 100;
    std::size_t max_depth = 5;
    std::size_t features_per_split = 0;  // 0 = ceil(sqrt(feature count))
    std::size_t min_samples_split = 2;
};

// Flat binary tree; a node with feature < 0 is a leaf carrying the
// positive-class probability. Rows with value <= threshold go left.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double positive_probability = 0.0;

    bool is_leaf() const { return feature < 0; }
};

struct Tree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root
    std::size_t depth() const;
    double predict(std::span<const double> row) const;
};

struct ForestParams {
    std::vector<Tree> trees;
    ForestConfig config;
};

struct MlpConfig {
    std::size_t hidden_units = 16;
    double learning_rate = 0.01;
    std::size_t max_epochs = 500;
    std::size_t patience = 10;
    double validation_fraction = 0.1;
};

struct MlpWeights {
    Matrix w1;                // hidden x input
    std::vector<double> b1;   // hidden
    std::vector<double> w2;   // hidden
    double b2 = 0.0;
};

struct MlpParams {
    MlpWeights weights;
    MlpConfig config;
    std::size_t best_epoch = 0;
};

struct StackConfig {
    std::size_t oof_folds = 5;
};

struct TrainedClassifier;

struct StackParams {
    std::vector<TrainedClassifier> base_models;  // LR, NB, RF, MLP order
    LogisticParams meta;
    StackConfig config;
};

// ---------------------------------------------------------------------------

struct TrainedClassifier {
    ModelKind kind = ModelKind::LogisticRegression;
    std::vector<std::string> feature_names;
    std::uint64_t training_seed = 0;
    std::variant<LogisticParams, GaussianNbParams, ForestParams, MlpParams, StackParams> params;
};

struct ModelConfigs {
    LogisticConfig logistic;
    GaussianNbConfig naive_bayes;
    ForestConfig forest;
    MlpConfig mlp;
    StackConfig stack;
};

// ---------------------------------------------------------------------------
// Training. Each trainer binds X's feature names and derives every random
// decision from `seed` through named sub-streams.

TrainedClassifier train_logistic(const FeatureMatrix& X, const LogisticConfig& config = {});
TrainedClassifier train_naive_bayes(const FeatureMatrix& X, const GaussianNbConfig& config = {});
TrainedClassifier train_random_forest(const FeatureMatrix& X, const ForestConfig& config,
                                      std::uint64_t seed);
TrainedClassifier train_mlp(const FeatureMatrix& X, const MlpConfig& config, std::uint64_t seed);
TrainedClassifier train_stacked(const FeatureMatrix& X, const ModelConfigs& configs,
                                std::uint64_t seed);

TrainedClassifier train_model(ModelKind kind, const ModelConfigs& configs, const FeatureMatrix& X,
                              std::uint64_t seed);

// Out-of-fold meta-features for the stacked ensemble; exposed so the
// no-leakage property can be verified independently of train_stacked.
struct OofMeta {
    std::vector<int> fold_of_row;
    Matrix meta_features;  // one column per base model, one row per input row
};
OofMeta compute_stack_oof(const FeatureMatrix& X, const ModelConfigs& configs, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Prediction. Feature names must match the names bound at fit time.

std::vector<double> predict_proba(const TrainedClassifier& model, const FeatureMatrix& X);
std::vector<int> predict(const TrainedClassifier& model, const FeatureMatrix& X,
                         double threshold = 0.5);

// Raw-matrix variant for callers that already guarantee column layout.
std::vector<double> predict_proba_values(const TrainedClassifier& model, const Matrix& values);

// Mean binary cross-entropy of the network on (values, labels) and its
// analytic gradient, exposed so the gradient can be checked numerically.
double mlp_loss(const MlpWeights& w, const Matrix& values, const std::vector<int>& labels);
MlpWeights mlp_loss_gradient(const MlpWeights& w, const Matrix& values,
                             const std::vector<int>& labels);

// ---------------------------------------------------------------------------
// Versioned JSON serialization; reloading preserves predictions bit-exactly.

std::string model_to_json_string(const TrainedClassifier& model);
TrainedClassifier model_from_json_string(const std::string& json_text);

}  // namespace admitml
