#include "admitml/explain.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "admitml/parallel.hpp"
#include "admitml/rng.hpp"

namespace admitml {
namespace {

void rank_entries(std::vector<ImportanceEntry>& entries) {
    std::sort(entries.begin(), entries.end(), [](const ImportanceEntry& a, const ImportanceEntry& b) {
        if (a.importance != b.importance) return a.importance > b.importance;
        return a.feature < b.feature;
    });
    for (std::size_t i = 0; i < entries.size(); ++i) {
        entries[i].rank = static_cast<int>(i + 1);
    }
}

double prediction_accuracy(const std::vector<int>& labels, const std::vector<int>& predictions) {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        hits += static_cast<std::size_t>(labels[i] == predictions[i]);
    }
    return static_cast<double>(hits) / static_cast<double>(labels.size());
}

}  // namespace

Explanation coefficient_importance(const TrainedClassifier& model) {
    if (model.kind != ModelKind::LogisticRegression) {
        throw std::invalid_argument("coefficient_importance: model is " + to_string(model.kind) +
                                    "; only logistic regression exposes coefficients, use "
                                    "permutation importance instead");
    }
    const auto& params = std::get<LogisticParams>(model.params);
    Explanation explanation;
    explanation.method = "coefficient";
    explanation.entries.reserve(params.weights.size());
    for (std::size_t i = 0; i < params.weights.size(); ++i) {
        ImportanceEntry entry;
        entry.feature = model.feature_names[i];
        entry.importance = std::abs(params.weights[i]);
        entry.signed_weight = params.weights[i];
        explanation.entries.push_back(std::move(entry));
    }
    rank_entries(explanation.entries);
    return explanation;
}

Explanation permutation_importance(const TrainedClassifier& model, const FeatureMatrix& X,
                                   std::size_t repeats, std::uint64_t seed) {
    if (repeats == 0) {
        throw std::invalid_argument("permutation_importance: repeats must be at least 1");
    }
    X.validate();
    const std::vector<int> baseline_predictions = predict(model, X);
    const double baseline = prediction_accuracy(X.labels, baseline_predictions);

    Explanation explanation;
    explanation.method = "permutation";
    explanation.repeats = repeats;
    explanation.seed = seed;
    explanation.entries.resize(X.feature_names.size());

    parallel_for(X.feature_names.size(), [&](std::size_t j) {
        const std::vector<double> original = X.values.column(j);
        FeatureMatrix shuffled = X;
        double accuracy_sum = 0.0;
        bool every_repeat_at_baseline = true;
        for (std::size_t r = 0; r < repeats; ++r) {
            std::vector<double> column = original;
            Rng rng(derive_seed(derive_seed(seed, "permutation", j), "repeat", r));
            rng.shuffle(column);
            for (std::size_t i = 0; i < column.size(); ++i) {
                shuffled.values(i, j) = column[i];
            }
            const double accuracy = prediction_accuracy(X.labels, predict(model, shuffled));
            accuracy_sum += accuracy;
            every_repeat_at_baseline = every_repeat_at_baseline && accuracy == baseline;
        }
        ImportanceEntry entry;
        entry.feature = X.feature_names[j];
        // Exact zero when no shuffle moved the accuracy (constant columns in
        // particular), instead of mean-rounding noise.
        entry.importance =
            every_repeat_at_baseline ? 0.0 : baseline - accuracy_sum / static_cast<double>(repeats);
        explanation.entries[j] = std::move(entry);
    });
    rank_entries(explanation.entries);
    return explanation;
}

}  // namespace admitml
