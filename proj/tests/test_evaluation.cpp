#include <cmath>
#include <numeric>
#include <stdexcept>

#include "doctest.h"

#include "admitml/evaluation.hpp"
#include "admitml/rng.hpp"
#include "admitml/splits.hpp"
#include "oracles.hpp"

using namespace admitml;

namespace {

// Hard-margin two-class data: class 0 in [-2,-1]^p, class 1 in [1,2]^p.
FeatureMatrix separated_features(std::size_t n, std::size_t p, std::uint64_t seed) {
    Rng rng(seed);
    FeatureMatrix X;
    X.values = Matrix(n, p);
    for (std::size_t j = 0; j < p; ++j) X.feature_names.push_back("f" + std::to_string(j));
    X.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const int label = static_cast<int>(i % 2);
        X.labels[i] = label;
        for (std::size_t j = 0; j < p; ++j) {
            const double base = label == 1 ? 1.0 : -2.0;
            X.values(i, j) = base + rng.next_double();
        }
    }
    return X;
}

// 70 negatives, 30 positives with one constant feature; posteriors collapse
// to the class priors, so every model that sees it predicts the majority.
FeatureMatrix prior_only_features() {
    FeatureMatrix X;
    X.values = Matrix(100, 1, 3.5);
    X.feature_names = {"constant"};
    X.labels.assign(100, 0);
    for (std::size_t i = 70; i < 100; ++i) X.labels[i] = 1;
    return X;
}

}  // namespace

TEST_CASE("compute_metrics reproduces confusion arithmetic") {
    const std::vector<int> labels = {1, 1, 1, 0, 0};
    const std::vector<int> predictions = {1, 1, 0, 1, 0};
    const Metrics m = compute_metrics(labels, predictions);
    CHECK(m.tp == 2);
    CHECK(m.fp == 1);
    CHECK(m.fn == 1);
    CHECK(m.tn == 1);
    CHECK(m.total() == 5);
    CHECK(m.accuracy == doctest::Approx(0.6));
    CHECK(m.precision == doctest::Approx(2.0 / 3.0));
    CHECK(m.recall == doctest::Approx(2.0 / 3.0));
    CHECK(m.f1 == doctest::Approx(2.0 / 3.0));
    CHECK(m.precision_defined);
    CHECK(m.recall_defined);
    CHECK(m.f1_defined);
    CHECK_FALSE(m.auroc.has_value());
}

TEST_CASE("compute_metrics flags zero denominators instead of dividing") {
    const Metrics no_positives_predicted = compute_metrics({1, 0}, {0, 0});
    CHECK_FALSE(no_positives_predicted.precision_defined);
    CHECK(no_positives_predicted.precision == 0.0);
    CHECK(no_positives_predicted.recall_defined);

    const Metrics no_positive_labels = compute_metrics({0, 0}, {0, 1});
    CHECK_FALSE(no_positive_labels.recall_defined);
    CHECK(no_positive_labels.recall == 0.0);
}

TEST_CASE("compute_metrics reports AUROC as absent for single-class labels") {
    const Metrics m = compute_metrics({1, 1}, {1, 0}, {0.9, 0.4});
    CHECK_FALSE(m.auroc.has_value());
    const Metrics both = compute_metrics({1, 0}, {1, 0}, {0.9, 0.4});
    CHECK(both.auroc.has_value());
}

TEST_CASE("compute_metrics input validation") {
    CHECK_THROWS_AS(compute_metrics({1, 0}, {1}), std::invalid_argument);
    CHECK_THROWS_AS(compute_metrics({}, {}), std::invalid_argument);
    CHECK_THROWS_AS(compute_metrics({2, 0}, {1, 0}), std::invalid_argument);
    CHECK_THROWS_AS(compute_metrics({1, 0}, {1, 3}), std::invalid_argument);
}

TEST_CASE("auroc on the four-pair example") {
    CHECK(auroc({1, 0, 1, 0}, {0.9, 0.8, 0.7, 0.1}) == 0.75);
}

TEST_CASE("auroc endpoints") {
    CHECK(auroc({0, 0, 1, 1}, {0.1, 0.2, 0.8, 0.9}) == 1.0);
    CHECK(auroc({0, 0, 1, 1}, {0.9, 0.8, 0.2, 0.1}) == 0.0);
    CHECK(auroc({0, 1, 0, 1}, {0.5, 0.5, 0.5, 0.5}) == 0.5);
}

TEST_CASE("auroc input validation") {
    CHECK_THROWS_AS(auroc({1, 1}, {0.5, 0.6}), std::invalid_argument);
    CHECK_THROWS_AS(auroc({0, 0}, {0.5, 0.6}), std::invalid_argument);
    CHECK_THROWS_AS(auroc({1, 0}, {0.5}), std::invalid_argument);
    CHECK_THROWS_AS(auroc({}, {}), std::invalid_argument);
    CHECK_THROWS_AS(auroc({1, 0}, {std::nan(""), 0.5}), std::invalid_argument);
}

TEST_CASE("auroc agrees with the pairwise and trapezoid oracles") {
    Rng rng(20240817);
    for (int instance = 0; instance < 100; ++instance) {
        const std::size_t n = 2 + rng.next_below(29);
        std::vector<int> labels(n);
        std::vector<double> scores(n);
        for (std::size_t i = 0; i < n; ++i) {
            labels[i] = static_cast<int>(rng.next_below(2));
            // Coarse grid makes score ties common.
            scores[i] = static_cast<double>(rng.next_below(5)) / 4.0;
        }
        labels[0] = 0;
        labels[n - 1] = 1;
        const double fast = auroc(labels, scores);
        CHECK(std::abs(fast - oracle::auroc_pairwise(labels, scores)) <= 1e-9);
        CHECK(std::abs(fast - oracle::auroc_trapezoid(labels, scores)) <= 1e-9);
    }
}

TEST_CASE("metrics are invariant under consistent row reordering") {
    Rng rng(99);
    std::vector<int> labels(40);
    std::vector<int> predictions(40);
    std::vector<double> scores(40);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        labels[i] = static_cast<int>(rng.next_below(2));
        predictions[i] = static_cast<int>(rng.next_below(2));
        scores[i] = static_cast<double>(rng.next_below(10)) / 9.0;
    }
    labels[0] = 0;
    labels[1] = 1;
    const Metrics before = compute_metrics(labels, predictions, scores);

    std::vector<std::size_t> perm(labels.size());
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm);
    std::vector<int> labels2, predictions2;
    std::vector<double> scores2;
    for (std::size_t i : perm) {
        labels2.push_back(labels[i]);
        predictions2.push_back(predictions[i]);
        scores2.push_back(scores[i]);
    }
    CHECK(compute_metrics(labels2, predictions2, scores2) == before);
}

TEST_CASE("kfold_cv is perfect on hard-margin data") {
    const FeatureMatrix X = separated_features(100, 4, 7);
    CvConfig cv;
    cv.folds = 10;
    cv.seed = 21;
    const CvReport report = kfold_cv(X, ModelKind::LogisticRegression, ModelConfigs{}, cv);
    CHECK(report.kind == ModelKind::LogisticRegression);
    CHECK(report.fold_metrics.size() == 10);
    CHECK(report.mean_accuracy == 1.0);
    CHECK(report.pooled.total() == 100);
    long long covered = 0;
    for (const Metrics& m : report.fold_metrics) covered += m.total();
    CHECK(covered == 100);
    CHECK(report.mean_auroc.has_value());
    CHECK(*report.mean_auroc == 1.0);
}

TEST_CASE("kfold_cv of a prior-only model equals the majority fraction") {
    const FeatureMatrix X = prior_only_features();
    CvConfig cv;
    cv.folds = 10;
    cv.seed = 3;
    const CvReport report = kfold_cv(X, ModelKind::NaiveBayes, ModelConfigs{}, cv);
    // 100 rows split 70/30 stratified into 10 folds of exactly 7/3.
    CHECK(report.mean_accuracy == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(report.pooled.tp == 0);
    CHECK(report.pooled.tn == 70);
}

TEST_CASE("kfold_cv rejects more folds than minority rows") {
    FeatureMatrix X = separated_features(100, 2, 1);
    X.labels.assign(100, 0);
    for (std::size_t i = 0; i < 5; ++i) X.labels[i] = 1;
    CvConfig cv;
    cv.folds = 10;
    CHECK_THROWS_AS(kfold_cv(X, ModelKind::LogisticRegression, ModelConfigs{}, cv),
                    std::invalid_argument);
}

TEST_CASE("kfold_cv is deterministic for a fixed seed") {
    const FeatureMatrix X = separated_features(60, 3, 11);
    CvConfig cv;
    cv.folds = 5;
    cv.seed = 42;
    const CvReport a = kfold_cv(X, ModelKind::RandomForest, ModelConfigs{}, cv);
    const CvReport b = kfold_cv(X, ModelKind::RandomForest, ModelConfigs{}, cv);
    CHECK(a == b);
}

TEST_CASE("kfold_cv refits the scaler on each fold's training part only") {
    const FeatureMatrix X = separated_features(50, 3, 5);
    CvConfig cv;
    cv.folds = 5;
    cv.seed = 17;
    const CvReport report = kfold_cv(X, ModelKind::LogisticRegression, ModelConfigs{}, cv);

    // Recompute fold 0 by hand with the same derived seeds.
    const std::vector<int> folds =
        stratified_fold_assignment(X.labels, cv.folds, derive_seed(cv.seed, "cv-folds"));
    std::vector<std::size_t> train_rows, val_rows;
    for (std::size_t i = 0; i < folds.size(); ++i) {
        (folds[i] == 0 ? val_rows : train_rows).push_back(i);
    }
    FeatureMatrix train = X.take_rows(train_rows);
    FeatureMatrix val = X.take_rows(val_rows);
    const Scaler scaler = fit_scaler(train.values);
    train.values = apply_scaler(scaler, train.values);
    val.values = apply_scaler(scaler, val.values);
    const TrainedClassifier model = train_model(ModelKind::LogisticRegression, ModelConfigs{}, train,
                                                derive_seed(cv.seed, "cv-train", 0));
    const std::vector<double> scores = predict_proba(model, val);
    const Metrics expected = compute_metrics(val.labels, binarize_label(scores), scores);
    CHECK(report.fold_metrics[0] == expected);
}

TEST_CASE("select_best picks the highest mean accuracy") {
    const std::vector<std::pair<ModelKind, double>> table = {
        {ModelKind::LogisticRegression, 89.5}, {ModelKind::NaiveBayes, 88.1},
        {ModelKind::RandomForest, 87.6},       {ModelKind::NeuralNetwork, 85.2},
        {ModelKind::StackedEnsemble, 91.0},
    };
    CHECK(select_best(table) == ModelKind::StackedEnsemble);
}

TEST_CASE("select_best of a single model returns it") {
    CHECK(select_best({{ModelKind::RandomForest, 0.5}}) == ModelKind::RandomForest);
}

TEST_CASE("select_best breaks exact ties by fixed precedence") {
    CHECK(select_best({{ModelKind::NaiveBayes, 0.9}, {ModelKind::LogisticRegression, 0.9}}) ==
          ModelKind::LogisticRegression);
    CHECK(select_best({{ModelKind::NeuralNetwork, 0.9}, {ModelKind::RandomForest, 0.9}}) ==
          ModelKind::RandomForest);
    CHECK(select_best({{ModelKind::LogisticRegression, 0.9}, {ModelKind::StackedEnsemble, 0.9}}) ==
          ModelKind::StackedEnsemble);
}

TEST_CASE("select_best is invariant under input order") {
    std::vector<std::pair<ModelKind, double>> table = {
        {ModelKind::LogisticRegression, 0.81}, {ModelKind::NaiveBayes, 0.86},
        {ModelKind::RandomForest, 0.86},       {ModelKind::NeuralNetwork, 0.79},
        {ModelKind::StackedEnsemble, 0.84},
    };
    const ModelKind expected = select_best(table);
    CHECK(expected == ModelKind::NaiveBayes);
    Rng rng(8);
    for (int i = 0; i < 10; ++i) {
        rng.shuffle(table);
        CHECK(select_best(table) == expected);
    }
}

TEST_CASE("select_best rejects an empty table") {
    CHECK_THROWS_AS(select_best(std::vector<std::pair<ModelKind, double>>{}),
                    std::invalid_argument);
    CHECK_THROWS_AS(select_best(std::vector<CvReport>{}), std::invalid_argument);
}

TEST_CASE("select_best accepts CvReports") {
    CvReport a;
    a.kind = ModelKind::NaiveBayes;
    a.mean_accuracy = 0.9;
    CvReport b;
    b.kind = ModelKind::RandomForest;
    b.mean_accuracy = 0.95;
    CHECK(select_best(std::vector<CvReport>{a, b}) == ModelKind::RandomForest);
}
