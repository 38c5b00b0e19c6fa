#pragma once

// Shared internals for the model implementations; not installed.

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "admitml/matrix.hpp"
#include "admitml/model.hpp"

namespace admitml::detail {

inline double sigmoid(double z) {
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow for large |z|.
inline double softplus(double z) {
    return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

inline void check_finite(const Matrix& values, const char* who) {
    for (std::size_t r = 0; r < values.rows(); ++r) {
        for (std::size_t c = 0; c < values.cols(); ++c) {
            if (!std::isfinite(values(r, c))) {
                throw std::invalid_argument(std::string(who) + ": non-finite feature value at row " +
                                            std::to_string(r) + ", column " + std::to_string(c));
            }
        }
    }
}

inline void check_binary_labels(const std::vector<int>& labels, const char* who) {
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] != 0 && labels[i] != 1) {
            throw std::invalid_argument(std::string(who) + ": label at row " + std::to_string(i) +
                                        " is " + std::to_string(labels[i]) + ", expected 0 or 1");
        }
    }
}

LogisticParams fit_logistic_params(const Matrix& values, const std::vector<int>& labels,
                                   const LogisticConfig& config);

double mlp_logit(const MlpWeights& w, std::span<const double> row);

inline double logistic_proba(const LogisticParams& params, std::span<const double> row) {
    double z = params.intercept;
    for (std::size_t j = 0; j < params.weights.size(); ++j) {
        z += params.weights[j] * row[j];
    }
    return sigmoid(z);
}

}  // namespace admitml::detail
