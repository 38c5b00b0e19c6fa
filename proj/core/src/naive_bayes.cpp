#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "admitml/model.hpp"
#include "model_internal.hpp"

namespace admitml {

namespace {

// Population variance of one column over the given rows.
void accumulate_moments(const Matrix& values, const std::vector<std::size_t>& rows,
                        std::vector<double>& means, std::vector<double>& vars) {
    const std::size_t p = values.cols();
    means.assign(p, 0.0);
    vars.assign(p, 0.0);
    for (std::size_t r : rows) {
        for (std::size_t j = 0; j < p; ++j) {
            means[j] += values(r, j);
        }
    }
    const double inv = 1.0 / static_cast<double>(rows.size());
    for (std::size_t j = 0; j < p; ++j) {
        means[j] *= inv;
    }
    for (std::size_t r : rows) {
        for (std::size_t j = 0; j < p; ++j) {
            const double d = values(r, j) - means[j];
            vars[j] += d * d;
        }
    }
    for (std::size_t j = 0; j < p; ++j) {
        vars[j] *= inv;
    }
}

}  // namespace

TrainedClassifier train_naive_bayes(const FeatureMatrix& X, const GaussianNbConfig& config) {
    X.validate();
    if (X.values.rows() == 0) {
        throw std::invalid_argument("train_naive_bayes: empty feature matrix");
    }
    detail::check_finite(X.values, "train_naive_bayes");
    detail::check_binary_labels(X.labels, "train_naive_bayes");

    std::vector<std::size_t> rows0, rows1;
    for (std::size_t i = 0; i < X.labels.size(); ++i) {
        (X.labels[i] == 1 ? rows1 : rows0).push_back(i);
    }
    if (rows0.empty() || rows1.empty()) {
        throw std::invalid_argument("train_naive_bayes: training data contains a single class");
    }

    GaussianNbParams params;
    params.config = config;
    const double n = static_cast<double>(X.labels.size());
    params.prior0 = static_cast<double>(rows0.size()) / n;
    params.prior1 = static_cast<double>(rows1.size()) / n;
    accumulate_moments(X.values, rows0, params.mean0, params.var0);
    accumulate_moments(X.values, rows1, params.mean1, params.var1);

    // Floor every class variance at a fraction of the largest overall feature
    // variance so constant features cannot zero out a density.
    std::vector<std::size_t> all_rows(X.labels.size());
    for (std::size_t i = 0; i < all_rows.size(); ++i) all_rows[i] = i;
    std::vector<double> overall_mean, overall_var;
    accumulate_moments(X.values, all_rows, overall_mean, overall_var);
    double max_var = 0.0;
    for (double v : overall_var) max_var = std::max(max_var, v);
    params.variance_floor = config.variance_floor_factor * max_var;
    if (params.variance_floor <= 0.0) {
        params.variance_floor = config.variance_floor_factor;  // every feature is constant
    }
    for (std::size_t j = 0; j < X.values.cols(); ++j) {
        params.var0[j] = std::max(params.var0[j], params.variance_floor);
        params.var1[j] = std::max(params.var1[j], params.variance_floor);
    }

    TrainedClassifier model;
    model.kind = ModelKind::NaiveBayes;
    model.feature_names = X.feature_names;
    model.training_seed = 0;
    model.params = std::move(params);
    return model;
}

}  // namespace admitml
