#include <cmath>
#include <limits>
#include <stdexcept>

#include "admitml/model.hpp"
#include "admitml/rng.hpp"
#include "admitml/splits.hpp"
#include "model_internal.hpp"

namespace admitml {

namespace {

// z = w2 . relu(W1 x + b1) + b2 for one row, reusing the caller's buffer.
double forward_logit(const MlpWeights& w, std::span<const double> row,
                     std::vector<double>& hidden) {
    const std::size_t units = w.b1.size();
    hidden.resize(units);
    double z = w.b2;
    for (std::size_t h = 0; h < units; ++h) {
        double pre = w.b1[h];
        const auto weights_row = w.w1.row(h);
        for (std::size_t j = 0; j < row.size(); ++j) {
            pre += weights_row[j] * row[j];
        }
        hidden[h] = pre > 0.0 ? pre : 0.0;
        z += w.w2[h] * hidden[h];
    }
    return z;
}

double mean_loss(const MlpWeights& w, const Matrix& X, const std::vector<int>& y,
                 const std::vector<std::size_t>& rows) {
    std::vector<double> hidden;
    double total = 0.0;
    for (std::size_t r : rows) {
        const double z = forward_logit(w, X.row(r), hidden);
        total += detail::softplus(z) - static_cast<double>(y[r]) * z;
    }
    return total / static_cast<double>(rows.size());
}

void accumulate_gradient(const MlpWeights& w, const Matrix& X, const std::vector<int>& y,
                         const std::vector<std::size_t>& rows, MlpWeights& grad) {
    const std::size_t units = w.b1.size();
    const std::size_t p = w.w1.cols();
    grad.w1 = Matrix(units, p);
    grad.b1.assign(units, 0.0);
    grad.w2.assign(units, 0.0);
    grad.b2 = 0.0;

    std::vector<double> hidden;
    for (std::size_t r : rows) {
        const auto row = X.row(r);
        const double z = forward_logit(w, row, hidden);
        const double dz = detail::sigmoid(z) - static_cast<double>(y[r]);
        grad.b2 += dz;
        for (std::size_t h = 0; h < units; ++h) {
            grad.w2[h] += dz * hidden[h];
            if (hidden[h] > 0.0) {
                const double dpre = dz * w.w2[h];
                grad.b1[h] += dpre;
                auto grad_row = grad.w1.row(h);
                for (std::size_t j = 0; j < p; ++j) {
                    grad_row[j] += dpre * row[j];
                }
            }
        }
    }
    const double inv = 1.0 / static_cast<double>(rows.size());
    grad.b2 *= inv;
    for (std::size_t h = 0; h < units; ++h) {
        grad.b1[h] *= inv;
        grad.w2[h] *= inv;
        auto grad_row = grad.w1.row(h);
        for (std::size_t j = 0; j < p; ++j) {
            grad_row[j] *= inv;
        }
    }
}

std::vector<std::size_t> all_rows(std::size_t n) {
    std::vector<std::size_t> rows(n);
    for (std::size_t i = 0; i < n; ++i) rows[i] = i;
    return rows;
}

}  // namespace

namespace detail {

double mlp_logit(const MlpWeights& w, std::span<const double> row) {
    std::vector<double> hidden;
    return forward_logit(w, row, hidden);
}

}  // namespace detail

double mlp_loss(const MlpWeights& w, const Matrix& X, const std::vector<int>& y) {
    if (X.rows() != y.size()) {
        throw std::invalid_argument("mlp_loss: row count does not match label count");
    }
    if (X.rows() == 0) {
        throw std::invalid_argument("mlp_loss: no rows");
    }
    return mean_loss(w, X, y, all_rows(X.rows()));
}

MlpWeights mlp_loss_gradient(const MlpWeights& w, const Matrix& X, const std::vector<int>& y) {
    if (X.rows() != y.size() || X.rows() == 0) {
        throw std::invalid_argument("mlp_loss_gradient: bad row count");
    }
    MlpWeights grad;
    accumulate_gradient(w, X, y, all_rows(X.rows()), grad);
    return grad;
}

TrainedClassifier train_mlp(const FeatureMatrix& X, const MlpConfig& config, std::uint64_t seed) {
    X.validate();
    const std::size_t n = X.values.rows();
    if (n < 10) {
        throw std::invalid_argument("train_mlp: need at least 10 rows, got " + std::to_string(n));
    }
    if (config.hidden_units == 0) {
        throw std::invalid_argument("train_mlp: hidden_units must be positive");
    }
    if (!(config.validation_fraction > 0.0) || !(config.validation_fraction < 1.0)) {
        throw std::invalid_argument("train_mlp: validation_fraction must be in (0, 1)");
    }
    detail::check_finite(X.values, "train_mlp");
    detail::check_binary_labels(X.labels, "train_mlp");

    const auto split = stratified_split(X.labels, 1.0 - config.validation_fraction,
                                        derive_seed(seed, "mlp-validation"));
    const std::size_t p = X.values.cols();
    const std::size_t units = config.hidden_units;

    // Glorot-uniform initialization, zero biases.
    Rng rng(derive_seed(seed, "mlp-init"));
    MlpWeights w;
    w.w1 = Matrix(units, p);
    const double limit1 = std::sqrt(6.0 / static_cast<double>(p + units));
    for (std::size_t h = 0; h < units; ++h) {
        for (std::size_t j = 0; j < p; ++j) {
            w.w1(h, j) = rng.uniform(-limit1, limit1);
        }
    }
    w.b1.assign(units, 0.0);
    w.w2.resize(units);
    const double limit2 = std::sqrt(6.0 / static_cast<double>(units + 1));
    for (std::size_t h = 0; h < units; ++h) {
        w.w2[h] = rng.uniform(-limit2, limit2);
    }
    w.b2 = 0.0;

    MlpWeights best = w;
    std::size_t best_epoch = 0;
    double best_loss = std::numeric_limits<double>::infinity();
    std::size_t stalled = 0;
    MlpWeights grad;
    for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
        accumulate_gradient(w, X.values, X.labels, split.train, grad);
        for (std::size_t h = 0; h < units; ++h) {
            auto row = w.w1.row(h);
            const auto grad_row = grad.w1.row(h);
            for (std::size_t j = 0; j < p; ++j) {
                row[j] -= config.learning_rate * grad_row[j];
            }
            w.b1[h] -= config.learning_rate * grad.b1[h];
            w.w2[h] -= config.learning_rate * grad.w2[h];
        }
        w.b2 -= config.learning_rate * grad.b2;

        const double val_loss = mean_loss(w, X.values, X.labels, split.test);
        if (val_loss < best_loss) {
            best_loss = val_loss;
            best = w;
            best_epoch = epoch;
            stalled = 0;
        } else if (++stalled >= config.patience) {
            break;
        }
    }

    MlpParams params;
    params.weights = std::move(best);
    params.config = config;
    params.best_epoch = best_epoch;

    TrainedClassifier model;
    model.kind = ModelKind::NeuralNetwork;
    model.feature_names = X.feature_names;
    model.training_seed = seed;
    model.params = std::move(params);
    return model;
}

}  // namespace admitml
