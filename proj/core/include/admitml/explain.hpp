#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "admitml/features.hpp"
#include "admitml/model.hpp"

namespace admitml {

struct ImportanceEntry {
    std::string feature;
    double importance = 0.0;
    int rank = 0;  // 1-based, descending importance
    std::optional<double> signed_weight;

    bool operator==(const ImportanceEntry&) const = default;
};

// Feature ranking, sorted by descending importance with lexicographic
// feature-name tie-break. `repeats` and `seed` are meaningful for the
// permutation method only.
struct Explanation {
    std::string method;  // "coefficient" or "permutation"
    std::vector<ImportanceEntry> entries;
    std::size_t repeats = 0;
    std::uint64_t seed = 0;

    bool operator==(const Explanation&) const = default;
};

// |weight| per feature of a fitted logistic regression, signed weight kept
// alongside. Any other model kind is an error; use permutation importance
// for model-agnostic rankings.
Explanation coefficient_importance(const TrainedClassifier& model);

// importance(f) = baseline accuracy - mean accuracy over `repeats` seeded
// shuffles of column f. Constant columns come out exactly 0.
Explanation permutation_importance(const TrainedClassifier& model, const FeatureMatrix& X,
                                   std::size_t repeats = 10, std::uint64_t seed = 0);

}  // namespace admitml
