#include "admitml/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "admitml/parallel.hpp"
#include "admitml/rng.hpp"
#include "admitml/splits.hpp"

namespace admitml {
namespace {

void check_binary(const std::vector<int>& values, const char* what) {
    for (int v : values) {
        if (v != 0 && v != 1) {
            throw std::invalid_argument(std::string(what) + " must contain only 0 or 1, got " +
                                        std::to_string(v));
        }
    }
}

Metrics metrics_from_counts(long long tp, long long fp, long long fn, long long tn) {
    Metrics m;
    m.tp = tp;
    m.fp = fp;
    m.fn = fn;
    m.tn = tn;
    const double total = static_cast<double>(m.total());
    m.accuracy = total > 0 ? static_cast<double>(tp + tn) / total : 0.0;
    m.precision_defined = tp + fp > 0;
    m.precision = m.precision_defined ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    m.recall_defined = tp + fn > 0;
    m.recall = m.recall_defined ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    m.f1_defined = m.precision_defined && m.recall_defined;
    const double pr = m.precision + m.recall;
    m.f1 = pr > 0 ? 2.0 * m.precision * m.recall / pr : 0.0;
    return m;
}

int selection_precedence(ModelKind kind) {
    switch (kind) {
        case ModelKind::StackedEnsemble: return 0;
        case ModelKind::LogisticRegression: return 1;
        case ModelKind::NaiveBayes: return 2;
        case ModelKind::RandomForest: return 3;
        case ModelKind::NeuralNetwork: return 4;
    }
    throw std::invalid_argument("select_best: unknown model kind");
}

}  // namespace

double auroc(const std::vector<int>& labels, const std::vector<double>& scores) {
    if (labels.size() != scores.size()) {
        throw std::invalid_argument("auroc: labels and scores differ in length");
    }
    if (labels.empty()) {
        throw std::invalid_argument("auroc: empty input");
    }
    check_binary(labels, "auroc: labels");
    for (double s : scores) {
        if (!std::isfinite(s)) {
            throw std::invalid_argument("auroc: scores must be finite");
        }
    }
    std::size_t positives = 0;
    for (int y : labels) positives += static_cast<std::size_t>(y == 1);
    const std::size_t negatives = labels.size() - positives;
    if (positives == 0 || negatives == 0) {
        throw std::invalid_argument("auroc: labels contain a single class");
    }

    std::vector<std::size_t> order(labels.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Rank-sum form of pairwise counting: tied blocks share their average
    // 1-based rank, which credits each tied pair exactly 0.5.
    double positive_rank_sum = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
        const double rank = 0.5 * static_cast<double>(i + 1 + j);
        for (std::size_t t = i; t < j; ++t) {
            if (labels[order[t]] == 1) positive_rank_sum += rank;
        }
        i = j;
    }
    const double np = static_cast<double>(positives);
    const double nn = static_cast<double>(negatives);
    return (positive_rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

Metrics compute_metrics(const std::vector<int>& labels, const std::vector<int>& predictions) {
    if (labels.size() != predictions.size()) {
        throw std::invalid_argument("compute_metrics: labels and predictions differ in length");
    }
    if (labels.empty()) {
        throw std::invalid_argument("compute_metrics: empty input");
    }
    check_binary(labels, "compute_metrics: labels");
    check_binary(predictions, "compute_metrics: predictions");
    long long tp = 0, fp = 0, fn = 0, tn = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == 1) {
            (predictions[i] == 1 ? tp : fn)++;
        } else {
            (predictions[i] == 1 ? fp : tn)++;
        }
    }
    return metrics_from_counts(tp, fp, fn, tn);
}

Metrics compute_metrics(const std::vector<int>& labels, const std::vector<int>& predictions,
                        const std::vector<double>& scores) {
    Metrics m = compute_metrics(labels, predictions);
    if (m.tp + m.fn > 0 && m.fp + m.tn > 0) {
        m.auroc = auroc(labels, scores);
    }
    return m;
}

CvReport kfold_cv(const FeatureMatrix& X, ModelKind kind, const ModelConfigs& configs,
                  const CvConfig& cv) {
    X.validate();
    const std::vector<int> fold_of_row =
        stratified_fold_assignment(X.labels, cv.folds, derive_seed(cv.seed, "cv-folds"));

    CvReport report;
    report.kind = kind;
    report.fold_metrics.resize(cv.folds);
    parallel_for(cv.folds, [&](std::size_t f) {
        std::vector<std::size_t> train_rows;
        std::vector<std::size_t> val_rows;
        for (std::size_t i = 0; i < fold_of_row.size(); ++i) {
            (fold_of_row[i] == static_cast<int>(f) ? val_rows : train_rows).push_back(i);
        }
        FeatureMatrix train = X.take_rows(train_rows);
        FeatureMatrix val = X.take_rows(val_rows);
        const Scaler scaler = fit_scaler(train.values);
        train.values = apply_scaler(scaler, train.values);
        val.values = apply_scaler(scaler, val.values);
        const TrainedClassifier model =
            train_model(kind, configs, train, derive_seed(cv.seed, "cv-train", f));
        const std::vector<double> scores = predict_proba(model, val);
        report.fold_metrics[f] = compute_metrics(val.labels, binarize_label(scores), scores);
    });

    double acc = 0.0, prec = 0.0, rec = 0.0, f1 = 0.0, auc = 0.0;
    std::size_t auc_folds = 0;
    long long tp = 0, fp = 0, fn = 0, tn = 0;
    for (const Metrics& m : report.fold_metrics) {
        acc += m.accuracy;
        prec += m.precision;
        rec += m.recall;
        f1 += m.f1;
        if (m.auroc) {
            auc += *m.auroc;
            ++auc_folds;
        }
        tp += m.tp;
        fp += m.fp;
        fn += m.fn;
        tn += m.tn;
    }
    const double k = static_cast<double>(cv.folds);
    report.mean_accuracy = acc / k;
    report.mean_precision = prec / k;
    report.mean_recall = rec / k;
    report.mean_f1 = f1 / k;
    if (auc_folds > 0) {
        report.mean_auroc = auc / static_cast<double>(auc_folds);
    }
    report.pooled = metrics_from_counts(tp, fp, fn, tn);
    return report;
}

ModelKind select_best(const std::vector<std::pair<ModelKind, double>>& mean_accuracies) {
    if (mean_accuracies.empty()) {
        throw std::invalid_argument("select_best: no models evaluated");
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < mean_accuracies.size(); ++i) {
        const auto& [kind, acc] = mean_accuracies[i];
        const auto& [best_kind, best_acc] = mean_accuracies[best];
        if (acc > best_acc ||
            (acc == best_acc && selection_precedence(kind) < selection_precedence(best_kind))) {
            best = i;
        }
    }
    return mean_accuracies[best].first;
}

ModelKind select_best(const std::vector<CvReport>& reports) {
    std::vector<std::pair<ModelKind, double>> accuracies;
    accuracies.reserve(reports.size());
    for (const CvReport& r : reports) {
        accuracies.emplace_back(r.kind, r.mean_accuracy);
    }
    return select_best(accuracies);
}

}  // namespace admitml
