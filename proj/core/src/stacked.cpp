#include <stdexcept>

#include "admitml/model.hpp"
#include "admitml/parallel.hpp"
#include "admitml/rng.hpp"
#include "admitml/splits.hpp"
#include "model_internal.hpp"

namespace admitml {

namespace {

constexpr std::size_t kBaseCount = 4;  // LR, NB, RF, MLP

std::vector<TrainedClassifier> train_base_models(const FeatureMatrix& X,
                                                 const ModelConfigs& configs,
                                                 std::uint64_t forest_seed,
                                                 std::uint64_t mlp_seed) {
    std::vector<TrainedClassifier> models;
    models.reserve(kBaseCount);
    models.push_back(train_logistic(X, configs.logistic));
    models.push_back(train_naive_bayes(X, configs.naive_bayes));
    models.push_back(train_random_forest(X, configs.forest, forest_seed));
    models.push_back(train_mlp(X, configs.mlp, mlp_seed));
    return models;
}

}  // namespace

OofMeta compute_stack_oof(const FeatureMatrix& X, const ModelConfigs& configs,
                          std::uint64_t seed) {
    X.validate();
    const std::size_t k = configs.stack.oof_folds;
    if (k < 2) {
        throw std::invalid_argument("compute_stack_oof: oof_folds must be at least 2");
    }

    OofMeta out;
    out.fold_of_row = stratified_fold_assignment(X.labels, k, derive_seed(seed, "stack-oof"));
    out.meta_features = Matrix(X.values.rows(), kBaseCount);

    // Every holdout row is predicted by models that never saw it; folds are
    // independent, and each writes only its own rows.
    parallel_for(k, [&](std::size_t fold) {
        std::vector<std::size_t> train_rows, holdout_rows;
        for (std::size_t i = 0; i < out.fold_of_row.size(); ++i) {
            (out.fold_of_row[i] == static_cast<int>(fold) ? holdout_rows : train_rows).push_back(i);
        }
        const auto models = train_base_models(X.take_rows(train_rows), configs,
                                              derive_seed(seed, "stack-fold-forest", fold),
                                              derive_seed(seed, "stack-fold-mlp", fold));
        const Matrix holdout = X.values.take_rows(holdout_rows);
        for (std::size_t m = 0; m < models.size(); ++m) {
            const auto probs = predict_proba_values(models[m], holdout);
            for (std::size_t i = 0; i < holdout_rows.size(); ++i) {
                out.meta_features(holdout_rows[i], m) = probs[i];
            }
        }
    });
    return out;
}

TrainedClassifier train_stacked(const FeatureMatrix& X, const ModelConfigs& configs,
                                std::uint64_t seed) {
    const OofMeta oof = compute_stack_oof(X, configs, seed);

    StackParams params;
    params.config = configs.stack;
    params.meta = detail::fit_logistic_params(oof.meta_features, X.labels, configs.logistic);
    params.base_models = train_base_models(X, configs, derive_seed(seed, "stack-full-forest"),
                                           derive_seed(seed, "stack-full-mlp"));

    TrainedClassifier model;
    model.kind = ModelKind::StackedEnsemble;
    model.feature_names = X.feature_names;
    model.training_seed = seed;
    model.params = std::move(params);
    return model;
}

}  // namespace admitml
