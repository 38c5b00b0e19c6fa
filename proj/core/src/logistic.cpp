#include <cmath>
#include <stdexcept>

#include "admitml/model.hpp"
#include "model_internal.hpp"

namespace admitml {

namespace detail {

// Full-batch gradient descent on the mean regularized log loss
//   (1/n) * [ sum_i logloss_i + (l2/2) * ||w||^2 ]
// with an unregularized intercept and zero initialization. Stops when the
// infinity norm of the full gradient drops below the tolerance.
LogisticParams fit_logistic_params(const Matrix& values, const std::vector<int>& labels,
                                   const LogisticConfig& config) {
    if (values.rows() == 0 || values.cols() == 0) {
        throw std::invalid_argument("train_logistic: empty feature matrix");
    }
    if (config.learning_rate <= 0.0) {
        throw std::invalid_argument("train_logistic: learning_rate must be positive");
    }
    if (config.l2_strength < 0.0) {
        throw std::invalid_argument("train_logistic: l2_strength must be non-negative");
    }
    check_finite(values, "train_logistic");
    check_binary_labels(labels, "train_logistic");

    const std::size_t n = values.rows();
    const std::size_t p = values.cols();
    LogisticParams params;
    params.weights.assign(p, 0.0);
    params.intercept = 0.0;
    params.config = config;

    std::vector<double> grad_w(p, 0.0);
    for (std::size_t iter = 0; iter < config.max_iters; ++iter) {
        std::fill(grad_w.begin(), grad_w.end(), 0.0);
        double grad_b = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const auto row = values.row(i);
            const double residual = logistic_proba(params, row) - static_cast<double>(labels[i]);
            grad_b += residual;
            for (std::size_t j = 0; j < p; ++j) {
                grad_w[j] += residual * row[j];
            }
        }
        const double inv_n = 1.0 / static_cast<double>(n);
        grad_b *= inv_n;
        double grad_norm = std::abs(grad_b);
        for (std::size_t j = 0; j < p; ++j) {
            grad_w[j] = (grad_w[j] + config.l2_strength * params.weights[j]) * inv_n;
            grad_norm = std::max(grad_norm, std::abs(grad_w[j]));
        }
        if (grad_norm < config.tolerance) {
            break;
        }
        for (std::size_t j = 0; j < p; ++j) {
            params.weights[j] -= config.learning_rate * grad_w[j];
        }
        params.intercept -= config.learning_rate * grad_b;
    }
    return params;
}

}  // namespace detail

TrainedClassifier train_logistic(const FeatureMatrix& X, const LogisticConfig& config) {
    X.validate();
    TrainedClassifier model;
    model.kind = ModelKind::LogisticRegression;
    model.feature_names = X.feature_names;
    model.training_seed = 0;  // training is deterministic
    model.params = detail::fit_logistic_params(X.values, X.labels, config);
    return model;
}

}  // namespace admitml
