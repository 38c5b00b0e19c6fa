// Acceptance gate: one PASS/FAIL line per numbered criterion, nonzero exit
// when any criterion fails. Tolerances and runtime budgets are pinned here
// so behavior drift surfaces as a FAIL line instead of silent change.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <unistd.h>

#include "admitml/evaluation.hpp"
#include "admitml/explain.hpp"
#include "admitml/fairness.hpp"
#include "admitml/features.hpp"
#include "admitml/ingest.hpp"
#include "admitml/model.hpp"
#include "admitml/pipeline.hpp"
#include "admitml/report.hpp"
#include "admitml/rng.hpp"
#include "admitml/splits.hpp"
#include "admitml/synthetic.hpp"
#include "admitml/table.hpp"
#include "oracles.hpp"

using namespace admitml;

namespace {

// Assign kNotFrozen to a pin below to re-record it on the next run.
[[maybe_unused]] constexpr double kNotFrozen = std::numeric_limits<double>::quiet_NaN();

// Mean CV accuracies recorded from the first build of the seed-20 fixtures
// (2000 rows, default noise; all_model_kinds() order), then the uncleaned and
// cleaned logistic accuracies on the 10% label-flip variant. Deterministic,
// so the tolerance only absorbs float reassociation across toolchains.
constexpr double kRegressionTolerance = 1e-9;
constexpr double kFixtureCvAccuracy[5] = {0.94100000000000006, 0.9365, 0.94149999999999989,
                                          0.92499999999999982, 0.94049999999999989};
constexpr double kFlipUncleanedLogistic = 0.75350000000000006;
constexpr double kFlipCleanedLogistic = 0.93777777777777782;

std::string fmt(double value) {
    std::ostringstream out;
    out << std::setprecision(17) << value;
    return out.str();
}

struct Checker {
    std::vector<std::string> failures;
    std::string suffix;

    void require(bool ok, const std::string& message) {
        if (!ok) failures.push_back(message);
    }
};

struct Criterion {
    int number;
    std::string label;
    double budget_seconds;  // 0 disables the runtime check
    std::function<void(Checker&)> body;
};

std::string format_duration(double seconds) {
    std::ostringstream out;
    if (seconds < 1.0) {
        out << std::fixed << std::setprecision(0) << seconds * 1000.0 << " ms";
    } else {
        out << std::fixed << std::setprecision(1) << seconds << " s";
    }
    return out.str();
}

PipelineConfig default_config() { return parse_pipeline_config("{}"); }

PipelineConfig synthetic_config(std::size_t rows, std::size_t anomalies, std::uint64_t seed) {
    PipelineConfig config = default_config();
    SyntheticConfig synthetic;
    synthetic.rows = rows;
    synthetic.anomaly_count = anomalies;
    config.source.synthetic = synthetic;
    config.seed = seed;
    return config;
}

FeatureMatrix make_blobs(std::size_t n, std::size_t p, double separation, std::uint64_t seed) {
    Rng rng(seed);
    FeatureMatrix m;
    m.values = Matrix(n, p);
    m.labels.resize(n);
    for (std::size_t j = 0; j < p; ++j) {
        m.feature_names.push_back("f" + std::to_string(j));
    }
    for (std::size_t i = 0; i < n; ++i) {
        m.labels[i] = static_cast<int>(i % 2);
        for (std::size_t j = 0; j < p; ++j) {
            m.values(i, j) = rng.next_normal() + separation * m.labels[i];
        }
    }
    return m;
}

std::vector<double> flatten(const MlpWeights& w) {
    std::vector<double> out;
    for (std::size_t h = 0; h < w.w1.rows(); ++h) {
        const auto row = w.w1.row(h);
        out.insert(out.end(), row.begin(), row.end());
    }
    out.insert(out.end(), w.b1.begin(), w.b1.end());
    out.insert(out.end(), w.w2.begin(), w.w2.end());
    out.push_back(w.b2);
    return out;
}

std::string read_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    if (!in) throw std::runtime_error("cannot read " + path.string());
    return out.str();
}

// 1. Group positive-rate gaps match the reference arithmetic exactly.
void criterion_gap_arithmetic(Checker& c) {
    const double gender_gap = demographic_parity_gap({0.67, 0.76});
    c.require(std::abs(gender_gap - 0.09) <= 1e-12,
              "gap of rates {0.67, 0.76} is " + fmt(gender_gap) + ", expected 0.09");
    const double parental_gap = demographic_parity_gap({0.78, 0.67});
    c.require(std::abs(parental_gap - 0.11) <= 1e-12,
              "gap of rates {0.78, 0.67} is " + fmt(parental_gap) + ", expected 0.11");
}

// 2. Selection over the reference accuracy set picks the stacked ensemble.
void criterion_model_selection(Checker& c) {
    const std::vector<std::pair<ModelKind, double>> reference = {
        {ModelKind::LogisticRegression, 89.5},
        {ModelKind::NaiveBayes, 88.1},
        {ModelKind::RandomForest, 87.6},
        {ModelKind::NeuralNetwork, 85.2},
        {ModelKind::StackedEnsemble, 91.0},
    };
    const ModelKind winner = select_best(reference);
    c.require(winner == ModelKind::StackedEnsemble,
              "selected " + to_string(winner) + ", expected stacked_ensemble");
}

// 3. Cleaning removes exactly the injected contradictions: 400 - 39 = 361.
void criterion_cleaning_count(Checker& c) {
    const PipelineConfig config = synthetic_config(400, 39, 9);
    const PreparedData prep = prepare_data(config);
    c.require(prep.table.row_count() == 400,
              "prepared fixture has " + std::to_string(prep.table.row_count()) + " rows");
    const CleaningResult cleaned = clean_anomalies(prep.table, config.cleaning);
    c.require(cleaned.table.row_count() == 361,
              "cleaned fixture has " + std::to_string(cleaned.table.row_count()) +
                  " rows, expected 361");
    c.require(cleaned.log.removed_row_ids.size() == 39,
              "cleaning removed " + std::to_string(cleaned.log.removed_row_ids.size()) +
                  " rows, expected 39");
}

// 4. Accuracy levels on the seeded 2000-row fixture: every model holds >= 80%
// CV accuracy, stacking stays within one point of the best base model, and
// cleaning beats not cleaning once 10% label flips are injected. Exact values
// are pinned as regression numbers.
void criterion_fixture_accuracy(Checker& c) {
    const PipelineConfig config = synthetic_config(2000, 0, 20);
    const FeatureBuild build =
        build_features(prepare_data(config).table, feature_spec_of(config));
    CvConfig cv;
    cv.folds = config.cv_folds;
    cv.seed = config.seed;

    std::vector<double> accuracies;
    double best_base = 0.0;
    double stack = 0.0;
    for (ModelKind kind : all_model_kinds()) {
        const CvReport report = kfold_cv(build.matrix, kind, config.models, cv);
        accuracies.push_back(report.mean_accuracy);
        c.require(report.mean_accuracy >= 0.80, to_string(kind) + " CV accuracy " +
                                                    fmt(report.mean_accuracy) + " below 0.80");
        if (kind == ModelKind::StackedEnsemble) {
            stack = report.mean_accuracy;
        } else {
            best_base = std::max(best_base, report.mean_accuracy);
        }
    }
    c.require(stack >= best_base - 0.010, "stacked CV accuracy " + fmt(stack) +
                                              " trails best base " + fmt(best_base) +
                                              " by more than one point");

    const PipelineConfig flipped = synthetic_config(2000, 200, 20);
    const DataTable table = prepare_data(flipped).table;
    const FeatureBuild raw = build_features(table, feature_spec_of(flipped));
    const CleaningResult cleaned = clean_anomalies(table, flipped.cleaning);
    c.require(cleaned.table.row_count() == 1800,
              "label-flip fixture cleaned to " + std::to_string(cleaned.table.row_count()) +
                  " rows, expected 1800");
    const FeatureBuild cleaned_build = build_features(cleaned.table, feature_spec_of(flipped));
    const double uncleaned_lr =
        kfold_cv(raw.matrix, ModelKind::LogisticRegression, flipped.models, cv).mean_accuracy;
    const double cleaned_lr =
        kfold_cv(cleaned_build.matrix, ModelKind::LogisticRegression, flipped.models, cv)
            .mean_accuracy;
    c.require(cleaned_lr > uncleaned_lr, "cleaned logistic accuracy " + fmt(cleaned_lr) +
                                             " does not exceed uncleaned " + fmt(uncleaned_lr));

    bool frozen = !std::isnan(kFlipUncleanedLogistic) && !std::isnan(kFlipCleanedLogistic);
    for (double pin : kFixtureCvAccuracy) frozen = frozen && !std::isnan(pin);
    if (!frozen) {
        std::ostringstream observed;
        observed << std::setprecision(17) << "regression pins not frozen; observed {";
        for (std::size_t k = 0; k < accuracies.size(); ++k) {
            observed << (k ? ", " : "") << accuracies[k];
        }
        observed << "}, uncleaned " << uncleaned_lr << ", cleaned " << cleaned_lr;
        c.require(false, observed.str());
        return;
    }
    for (std::size_t k = 0; k < accuracies.size(); ++k) {
        c.require(std::abs(accuracies[k] - kFixtureCvAccuracy[k]) <= kRegressionTolerance,
                  to_string(all_model_kinds()[k]) + " CV accuracy drifted from pinned " +
                      fmt(kFixtureCvAccuracy[k]) + " to " + fmt(accuracies[k]));
    }
    c.require(std::abs(uncleaned_lr - kFlipUncleanedLogistic) <= kRegressionTolerance,
              "uncleaned logistic drifted from pinned " + fmt(kFlipUncleanedLogistic) + " to " +
                  fmt(uncleaned_lr));
    c.require(std::abs(cleaned_lr - kFlipCleanedLogistic) <= kRegressionTolerance,
              "cleaned logistic drifted from pinned " + fmt(kFlipCleanedLogistic) + " to " +
                  fmt(cleaned_lr));
}

// 5. Conditional: when the classic 400-row admissions CSV is provided, the
// cleaned-data CV accuracies must land inside the reference bands. Skipped
// cleanly when the file is absent (it is not redistributable).
void criterion_reference_dataset(Checker& c) {
    std::filesystem::path path;
    const char* env = std::getenv("ADMITML_REFERENCE_CSV");
    if (env) {
        path = env;
    } else {
        path = std::filesystem::path(ADMITML_DATA_DIR) / "admission_predict.csv";
    }
    if (!std::filesystem::exists(path)) {
        c.suffix = "skipped: no reference CSV at " + path.string() +
                   (env ? "" : " (set ADMITML_REFERENCE_CSV to enable)");
        return;
    }

    PipelineConfig config = default_config();
    config.seed = 42;
    config.source.csv_paths = {path.string()};
    config.sensitive.clear();

    // Harmonize the classic published header names; the serial number is an
    // identifier, never a feature.
    const DataTable raw = parse_csv_file(path.string());
    const std::map<std::string, std::string> known_renames = {
        {"GRE Score", "GRE"},
        {"TOEFL Score", "TOEFL"},
        {"University Rating", "University_Rating"},
        {"Chance of Admit", "Admit_Chance"},
    };
    for (const auto& [from, to] : known_renames) {
        if (raw.has_column(from)) config.rename[from] = to;
    }
    if (raw.has_column("Serial No.")) config.exclude_columns.push_back("Serial No.");

    const PreparedData prep = prepare_data(config);
    const CleaningResult cleaned = clean_anomalies(prep.table, config.cleaning);
    const FeatureBuild build = build_features(cleaned.table, feature_spec_of(config));
    CvConfig cv;
    cv.folds = config.cv_folds;
    cv.seed = config.seed;
    const double logistic =
        kfold_cv(build.matrix, ModelKind::LogisticRegression, config.models, cv).mean_accuracy;
    const double stack =
        kfold_cv(build.matrix, ModelKind::StackedEnsemble, config.models, cv).mean_accuracy;
    c.require(std::abs(logistic - 0.895) <= 0.030,
              "cleaned logistic CV accuracy " + fmt(logistic) + " outside 0.895 +/- 0.030");
    c.require(std::abs(stack - 0.910) <= 0.030,
              "cleaned stacked CV accuracy " + fmt(stack) + " outside 0.910 +/- 0.030");
}

// 6. Library metrics agree with independent reference implementations.
void criterion_oracle_equivalence(Checker& c) {
    {
        Rng rng(derive_seed(6, "auroc"));
        int disagreements = 0;
        double worst = 0.0;
        for (int t = 0; t < 100; ++t) {
            const std::size_t n = 3 + rng.next_below(38);
            std::vector<int> labels(n);
            std::vector<double> scores(n);
            const bool coarse = t % 2 == 0;  // coarse grids force score ties
            labels[0] = 0;
            labels[1] = 1;
            for (std::size_t i = 0; i < n; ++i) {
                if (i > 1) labels[i] = rng.bernoulli(0.5) ? 1 : 0;
                scores[i] = coarse ? 0.1 + 0.2 * static_cast<double>(rng.next_below(5))
                                   : rng.next_double();
            }
            const double pairwise = oracle::auroc_pairwise(labels, scores);
            const double trapezoid = oracle::auroc_trapezoid(labels, scores);
            const double library = auroc(labels, scores);
            const double diff =
                std::max(std::abs(pairwise - trapezoid), std::abs(library - pairwise));
            worst = std::max(worst, diff);
            if (diff > 1e-9) ++disagreements;
        }
        c.require(disagreements == 0, "auroc definitions disagree on " +
                                          std::to_string(disagreements) +
                                          " of 100 instances, worst gap " + fmt(worst));
    }

    {
        Rng rng(derive_seed(6, "naive-bayes"));
        int disagreements = 0;
        double worst = 0.0;
        for (int t = 0; t < 20; ++t) {
            const std::size_t n = 30 + rng.next_below(31);
            const std::size_t p = 2 + rng.next_below(3);
            const auto train = make_blobs(n, p, 1.5, derive_seed(6, "nb-train", t));
            const auto queries = make_blobs(30, p, 1.5, derive_seed(6, "nb-query", t));
            const auto model = train_naive_bayes(train);
            const auto& params = std::get<GaussianNbParams>(model.params);
            const auto probs = predict_proba_values(model, queries.values);
            for (std::size_t i = 0; i < queries.row_count(); ++i) {
                const double direct = oracle::nb_posterior_direct(params, queries.values.row(i));
                const double diff = std::abs(probs[i] - direct);
                worst = std::max(worst, diff);
                if (diff > 1e-9) ++disagreements;
            }
        }
        c.require(disagreements == 0, "naive bayes posteriors disagree with the direct density " +
                                          std::to_string(disagreements) + " times, worst gap " +
                                          fmt(worst));
    }

    {
        Rng rng(derive_seed(6, "mlp"));
        int disagreements = 0;
        double worst = 0.0;
        for (int t = 0; t < 20; ++t) {
            const std::size_t inputs = 2 + rng.next_below(3);
            const std::size_t hidden = 2 + rng.next_below(5);
            const auto X = make_blobs(10 + rng.next_below(11), inputs, 1.0,
                                      derive_seed(6, "mlp-data", t));
            MlpWeights w;
            w.w1 = Matrix(hidden, inputs);
            for (std::size_t h = 0; h < hidden; ++h) {
                for (std::size_t j = 0; j < inputs; ++j) w.w1(h, j) = rng.uniform(-0.8, 0.8);
            }
            w.b1.resize(hidden);
            w.w2.resize(hidden);
            for (std::size_t h = 0; h < hidden; ++h) {
                w.b1[h] = rng.uniform(-0.3, 0.3);
                w.w2[h] = rng.uniform(-0.8, 0.8);
            }
            w.b2 = rng.uniform(-0.3, 0.3);

            const auto analytic = flatten(mlp_loss_gradient(w, X.values, X.labels));
            const auto numeric = flatten(oracle::mlp_gradient_fd(w, X.values, X.labels));
            double diff = 0.0;
            double scale = 0.0;
            for (std::size_t i = 0; i < analytic.size(); ++i) {
                diff += (analytic[i] - numeric[i]) * (analytic[i] - numeric[i]);
                scale += analytic[i] * analytic[i] + numeric[i] * numeric[i];
            }
            const double rel = std::sqrt(diff) / (std::sqrt(scale) + 1e-12);
            worst = std::max(worst, rel);
            if (rel >= 1e-4) ++disagreements;
        }
        c.require(disagreements == 0, "mlp gradient misses finite differences on " +
                                          std::to_string(disagreements) +
                                          " of 20 nets, worst rel err " + fmt(worst));
    }

    {
        Rng rng(derive_seed(6, "equalized-odds"));
        int disagreements = 0;
        double worst = 0.0;
        for (int t = 0; t < 50; ++t) {
            const std::size_t n = 20;
            std::vector<std::string> groups(n);
            std::vector<int> labels(n);
            std::vector<int> predictions(n);
            for (std::size_t i = 0; i < n; ++i) {
                groups[i] = i < n / 2 ? "a" : "b";
                labels[i] = rng.bernoulli(0.5) ? 1 : 0;
                predictions[i] = rng.bernoulli(0.5) ? 1 : 0;
            }
            // Both classes present in both groups keeps every group usable.
            labels[0] = 0;
            labels[1] = 1;
            labels[n / 2] = 0;
            labels[n / 2 + 1] = 1;
            const double library = equalized_odds_gap(predictions, labels, groups);
            const double brute = oracle::eo_gap_bruteforce(labels, predictions, groups);
            const double diff = std::abs(library - brute);
            worst = std::max(worst, diff);
            if (diff > 1e-12) ++disagreements;
        }
        c.require(disagreements == 0, "equalized odds gap disagrees with brute force on " +
                                          std::to_string(disagreements) +
                                          " of 50 fixtures, worst gap " + fmt(worst));
    }
}

// 7. Structural invariants: tree count and depth bound, hidden width,
// stratified split and fold shapes, out-of-fold meta-features.
void criterion_structure(Checker& c) {
    {
        const auto X = make_blobs(150, 6, 1.0, 21);
        const auto model = train_random_forest(X, ForestConfig{}, 21);
        const auto& params = std::get<ForestParams>(model.params);
        c.require(params.trees.size() == 100,
                  "forest grew " + std::to_string(params.trees.size()) + " trees, expected 100");
        std::size_t deepest = 0;
        for (const Tree& tree : params.trees) deepest = std::max(deepest, tree.depth());
        c.require(deepest <= 5, "deepest tree has depth " + std::to_string(deepest));
    }

    {
        MlpConfig config;
        config.max_epochs = 40;
        const auto model = train_mlp(make_blobs(40, 3, 1.5, 22), config, 22);
        const auto& params = std::get<MlpParams>(model.params);
        c.require(params.weights.w1.rows() == 16 && params.weights.b1.size() == 16,
                  "hidden layer width is " + std::to_string(params.weights.w1.rows()) +
                      ", expected 16");
    }

    {
        std::vector<int> labels(137, 0);
        std::fill(labels.begin() + 89, labels.end(), 1);
        const SplitIndices split = stratified_split(labels, 0.8, 23);
        std::vector<char> seen(labels.size(), 0);
        bool partition = split.train.size() + split.test.size() == labels.size();
        for (const auto& side : {split.train, split.test}) {
            for (std::size_t idx : side) {
                partition = partition && idx < labels.size() && !seen[idx];
                if (idx < labels.size()) seen[idx] = 1;
            }
        }
        c.require(partition, "train and test do not partition the rows");
        std::size_t test_by_class[2] = {0, 0};
        for (std::size_t idx : split.test) ++test_by_class[labels[idx]];
        c.require(std::abs(static_cast<double>(test_by_class[0]) - 89 * 0.2) <= 1.0,
                  "class-0 test count " + std::to_string(test_by_class[0]) +
                      " off the 0.2 share of 89 by more than one row");
        c.require(std::abs(static_cast<double>(test_by_class[1]) - 48 * 0.2) <= 1.0,
                  "class-1 test count " + std::to_string(test_by_class[1]) +
                      " off the 0.2 share of 48 by more than one row");
    }

    {
        std::vector<int> labels(103, 0);
        std::fill(labels.begin() + 61, labels.end(), 1);
        const std::vector<int> folds = stratified_fold_assignment(labels, 10, 24);
        c.require(folds.size() == labels.size(), "fold assignment misses rows");
        std::map<std::pair<int, int>, std::size_t> class_fold_counts;
        bool ids_in_range = true;
        for (std::size_t i = 0; i < folds.size(); ++i) {
            ids_in_range = ids_in_range && folds[i] >= 0 && folds[i] < 10;
            ++class_fold_counts[{labels[i], folds[i]}];
        }
        c.require(ids_in_range, "fold ids leave [0, 10)");
        for (int cls : {0, 1}) {
            std::size_t lo = labels.size();
            std::size_t hi = 0;
            for (int f = 0; f < 10; ++f) {
                const std::size_t count = class_fold_counts[{cls, f}];
                lo = std::min(lo, count);
                hi = std::max(hi, count);
            }
            c.require(hi - lo <= 1, "class " + std::to_string(cls) +
                                        " fold sizes spread more than one row");
        }
    }

    {
        const auto X = make_blobs(60, 3, 2.0, 17);
        ModelConfigs configs;
        configs.forest.n_trees = 10;
        configs.mlp.max_epochs = 30;
        const OofMeta oof = compute_stack_oof(X, configs, 99);

        // Perturbing one row must leave every other row of its fold
        // untouched: the models scoring that fold never saw the row.
        const std::size_t target = 4;
        const int fold = oof.fold_of_row[target];
        auto X2 = X;
        for (std::size_t j = 0; j < X2.values.cols(); ++j) X2.values(target, j) = 1e6;
        const OofMeta oof2 = compute_stack_oof(X2, configs, 99);

        c.require(oof2.fold_of_row == oof.fold_of_row, "fold assignment depends on features");
        bool target_changed = false;
        bool others_stable = true;
        for (std::size_t m = 0; m < oof.meta_features.cols(); ++m) {
            target_changed |= oof.meta_features(target, m) != oof2.meta_features(target, m);
        }
        for (std::size_t i = 0; i < X.row_count(); ++i) {
            if (i == target || oof.fold_of_row[i] != fold) continue;
            for (std::size_t m = 0; m < oof.meta_features.cols(); ++m) {
                others_stable =
                    others_stable && oof.meta_features(i, m) == oof2.meta_features(i, m);
            }
        }
        c.require(target_changed, "perturbed row kept its own meta-features");
        c.require(others_stable, "meta-features of unperturbed same-fold rows changed");
    }
}

// 8. Two identically configured full runs export byte-identical bundles.
void criterion_determinism(Checker& c) {
    const std::string config_json = R"({
        "seed": 11,
        "source": {"synthetic": {"rows": 300, "anomaly_count": 24}},
        "cv_folds": 5,
        "llm": {"enabled": true, "scorer": "mock"}
    })";
    const auto base = std::filesystem::temp_directory_path() /
                      ("admitml-acceptance-" + std::to_string(::getpid()));
    const std::filesystem::path dirs[2] = {base.string() + "-a", base.string() + "-b"};

    std::map<std::string, std::string> contents[2];
    for (int round = 0; round < 2; ++round) {
        std::filesystem::remove_all(dirs[round]);
        std::filesystem::create_directories(dirs[round]);
        const RunBundle bundle = run_pipeline(parse_pipeline_config(config_json));
        for (const std::string& path : export_report(bundle, dirs[round].string())) {
            contents[round][std::filesystem::path(path).filename().string()] = read_bytes(path);
        }
    }

    std::size_t identical = 0;
    bool same_names = true;
    for (const auto& [name, bytes] : contents[0]) {
        const auto other = contents[1].find(name);
        if (other == contents[1].end()) {
            same_names = false;
            continue;
        }
        identical += other->second == bytes;
    }
    same_names = same_names && contents[0].size() == contents[1].size();
    c.require(same_names, "the two runs exported different file sets");
    c.require(!contents[0].empty(), "no files exported");
    c.require(identical == contents[0].size(),
              std::to_string(contents[0].size() - identical) + " of " +
                  std::to_string(contents[0].size()) + " exported files differ between runs");
    for (const auto& dir : dirs) std::filesystem::remove_all(dir);
}

// 9. The engineered dominant signals rank top-three by coefficient, and an
// injected pure-noise feature carries no permutation importance.
void criterion_explanations(Checker& c) {
    const PipelineConfig config = synthetic_config(1500, 0, 33);
    DataTable table = prepare_data(config).table;

    Rng noise_rng(derive_seed(config.seed, "noise-feature"));
    std::vector<Cell> noise;
    noise.reserve(table.row_count());
    for (std::size_t i = 0; i < table.row_count(); ++i) {
        noise.emplace_back(noise_rng.next_normal());
    }
    table.add_column(Column{"Noise", ColumnKind::Numeric}, std::move(noise));

    const FeatureBuild build = build_features(table, feature_spec_of(config));
    FeatureMatrix scaled = build.matrix;
    scaled.values = apply_scaler(fit_scaler(build.matrix.values), build.matrix.values);
    const TrainedClassifier model = train_logistic(scaled);

    const Explanation coefficients = coefficient_importance(model);
    c.require(coefficients.entries.size() >= 4, "expected at least four ranked features");
    std::set<std::string> top3;
    for (std::size_t k = 0; k < 3 && k < coefficients.entries.size(); ++k) {
        top3.insert(coefficients.entries[k].feature);
    }
    c.require(top3 == std::set<std::string>{"CGPA", "GRE", "TOEFL"},
              "top three coefficients are {" +
                  [&] {
                      std::string joined;
                      for (const auto& name : top3) joined += (joined.empty() ? "" : ", ") + name;
                      return joined;
                  }() +
                  "}, expected {CGPA, GRE, TOEFL}");

    const Explanation permutation =
        permutation_importance(model, scaled, 10, derive_seed(config.seed, "perm-acceptance"));
    bool found = false;
    for (const ImportanceEntry& entry : permutation.entries) {
        if (entry.feature != "Noise") continue;
        found = true;
        c.require(std::abs(entry.importance) <= 0.01,
                  "noise feature importance " + fmt(entry.importance) + " outside +/- 0.01");
    }
    c.require(found, "noise feature missing from the permutation ranking");
}

}  // namespace

int main(int argc, char** argv) {
    std::set<int> only;
    for (int i = 1; i < argc; ++i) {
        only.insert(std::atoi(argv[i]));
    }

    const std::vector<Criterion> criteria = {
        {1, "group positive-rate gap arithmetic", 10.0, criterion_gap_arithmetic},
        {2, "model selection on the reference accuracy set", 10.0, criterion_model_selection},
        {3, "anomaly cleaning removes exactly the injected rows", 1.0, criterion_cleaning_count},
        {4, "accuracy properties of the seeded 2000-row fixture", 120.0,
         criterion_fixture_accuracy},
        {5, "reference-dataset accuracy bands (conditional)", 0.0, criterion_reference_dataset},
        {6, "metrics match independent oracle implementations", 60.0,
         criterion_oracle_equivalence},
        {7, "structural invariants of models and splits", 10.0, criterion_structure},
        {8, "repeated full runs export byte-identical bundles", 120.0, criterion_determinism},
        {9, "dominant signals rank first, injected noise scores zero", 60.0,
         criterion_explanations},
    };

    int failed = 0;
    int ran = 0;
    for (const Criterion& criterion : criteria) {
        if (!only.empty() && !only.count(criterion.number)) continue;
        ++ran;
        Checker checker;
        const auto start = std::chrono::steady_clock::now();
        try {
            criterion.body(checker);
        } catch (const std::exception& e) {
            checker.failures.push_back(std::string("unexpected exception: ") + e.what());
        }
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (criterion.budget_seconds > 0.0 && seconds > criterion.budget_seconds) {
            checker.failures.push_back("runtime " + format_duration(seconds) +
                                       " exceeds the " +
                                       format_duration(criterion.budget_seconds) + " budget");
        }

        const bool passed = checker.failures.empty();
        failed += !passed;
        std::cout << (passed ? "PASS" : "FAIL") << " criterion " << criterion.number << ": "
                  << criterion.label;
        if (!checker.suffix.empty()) std::cout << " (" << checker.suffix << ")";
        std::cout << " [" << format_duration(seconds) << "]\n";
        for (const std::string& failure : checker.failures) {
            std::cout << "     - " << failure << "\n";
        }
    }

    std::cout << "acceptance: " << (ran - failed) << " of " << ran << " criteria passed\n";
    return failed == 0 ? 0 : 1;
}
