#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "admitml/features.hpp"
#include "admitml/model.hpp"

namespace admitml {

// Binary-classification counts plus derived fractions. Zero-denominator
// precision/recall/F1 are reported as 0 with the matching flag cleared.
struct Metrics {
    long long tp = 0;
    long long fp = 0;
    long long fn = 0;
    long long tn = 0;
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    bool precision_defined = false;
    bool recall_defined = false;
    bool f1_defined = false;
    std::optional<double> auroc;

    long long total() const { return tp + fp + fn + tn; }

    bool operator==(const Metrics&) const = default;
};

// Mann-Whitney AUROC: the fraction of (positive, negative) pairs where the
// positive scores higher, ties credited 0.5. Needs both classes present.
double auroc(const std::vector<int>& labels, const std::vector<double>& scores);

Metrics compute_metrics(const std::vector<int>& labels, const std::vector<int>& predictions);

// Adds AUROC computed from `scores`; absent when labels are single-class.
Metrics compute_metrics(const std::vector<int>& labels, const std::vector<int>& predictions,
                        const std::vector<double>& scores);

struct CvConfig {
    std::size_t folds = 10;
    std::uint64_t seed = 0;
};

// Cross-validation outcome for one model kind. Fraction means average the
// per-fold values; mean_auroc averages the folds where AUROC is defined.
// `pooled` recomputes the fractions from the summed confusion counts.
struct CvReport {
    ModelKind kind = ModelKind::LogisticRegression;
    std::vector<Metrics> fold_metrics;
    double mean_accuracy = 0.0;
    double mean_precision = 0.0;
    double mean_recall = 0.0;
    double mean_f1 = 0.0;
    std::optional<double> mean_auroc;
    Metrics pooled;

    bool operator==(const CvReport&) const = default;
};

// Stratified k-fold cross-validation on unscaled features. The scaler and the
// model are refit on each fold's training part only; folds run in parallel
// with seeds derived per fold.
CvReport kfold_cv(const FeatureMatrix& X, ModelKind kind, const ModelConfigs& configs,
                  const CvConfig& cv);

// Highest mean CV accuracy wins; exact ties fall back to a fixed precedence
// (StackedEnsemble, LogisticRegression, NaiveBayes, RandomForest,
// NeuralNetwork). Invariant under input reordering.
ModelKind select_best(const std::vector<std::pair<ModelKind, double>>& mean_accuracies);
ModelKind select_best(const std::vector<CvReport>& reports);

}  // namespace admitml
