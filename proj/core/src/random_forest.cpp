#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "admitml/model.hpp"
#include "admitml/parallel.hpp"
#include "admitml/rng.hpp"
#include "model_internal.hpp"

namespace admitml {

std::size_t Tree::depth() const {
    if (nodes.empty()) return 0;
    // nodes are laid out parent-first, so a child index is always valid here
    std::vector<std::size_t> depths(nodes.size(), 0);
    std::size_t deepest = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const TreeNode& node = nodes[i];
        deepest = std::max(deepest, depths[i]);
        if (!node.is_leaf()) {
            depths[static_cast<std::size_t>(node.left)] = depths[i] + 1;
            depths[static_cast<std::size_t>(node.right)] = depths[i] + 1;
        }
    }
    return deepest;
}

double Tree::predict(std::span<const double> row) const {
    std::size_t at = 0;
    while (!nodes[at].is_leaf()) {
        const TreeNode& node = nodes[at];
        at = static_cast<std::size_t>(row[static_cast<std::size_t>(node.feature)] <= node.threshold
                                          ? node.left
                                          : node.right);
    }
    return nodes[at].positive_probability;
}

namespace {

struct TreeBuilder {
    const Matrix& values;
    const std::vector<int>& labels;
    const ForestConfig& config;
    std::size_t candidates_per_split;
    Rng& rng;
    std::vector<TreeNode> nodes;

    int build(std::vector<std::size_t>& rows, std::size_t depth) {
        const auto index = static_cast<int>(nodes.size());
        nodes.emplace_back();

        std::size_t positives = 0;
        for (std::size_t r : rows) positives += static_cast<std::size_t>(labels[r]);
        nodes[static_cast<std::size_t>(index)].positive_probability =
            static_cast<double>(positives) / static_cast<double>(rows.size());

        const bool pure = positives == 0 || positives == rows.size();
        if (depth >= config.max_depth || rows.size() < config.min_samples_split || pure) {
            return index;
        }

        const auto split = find_split(rows);
        if (!split.found) {
            return index;
        }

        std::vector<std::size_t> left_rows, right_rows;
        for (std::size_t r : rows) {
            (values(r, split.feature) <= split.threshold ? left_rows : right_rows).push_back(r);
        }
        rows.clear();
        rows.shrink_to_fit();

        const int left = build(left_rows, depth + 1);
        const int right = build(right_rows, depth + 1);
        TreeNode& node = nodes[static_cast<std::size_t>(index)];
        node.feature = static_cast<int>(split.feature);
        node.threshold = split.threshold;
        node.left = left;
        node.right = right;
        return index;
    }

    struct Split {
        bool found = false;
        std::size_t feature = 0;
        double threshold = 0.0;
    };

    // Best Gini-gain midpoint threshold over a random feature subset; ties
    // keep the first candidate seen, and zero-gain splits are rejected.
    Split find_split(const std::vector<std::size_t>& rows) {
        const auto candidates = rng.sample_indices(values.cols(), candidates_per_split);
        const double total = static_cast<double>(rows.size());
        std::size_t total_pos = 0;
        for (std::size_t r : rows) total_pos += static_cast<std::size_t>(labels[r]);
        const double p1 = static_cast<double>(total_pos) / total;
        const double parent_gini = 1.0 - p1 * p1 - (1.0 - p1) * (1.0 - p1);

        Split best;
        double best_gain = 1e-12;
        std::vector<std::pair<double, int>> ordered;
        for (std::size_t feature : candidates) {
            ordered.clear();
            ordered.reserve(rows.size());
            for (std::size_t r : rows) {
                ordered.emplace_back(values(r, feature), labels[r]);
            }
            std::sort(ordered.begin(), ordered.end());

            std::size_t left_n = 0, left_pos = 0;
            for (std::size_t i = 0; i + 1 < ordered.size(); ++i) {
                ++left_n;
                left_pos += static_cast<std::size_t>(ordered[i].second);
                if (ordered[i].first == ordered[i + 1].first) continue;

                const double nl = static_cast<double>(left_n);
                const double nr = total - nl;
                const double pl = static_cast<double>(left_pos) / nl;
                const double pr = static_cast<double>(total_pos - left_pos) / nr;
                const double gini_l = 1.0 - pl * pl - (1.0 - pl) * (1.0 - pl);
                const double gini_r = 1.0 - pr * pr - (1.0 - pr) * (1.0 - pr);
                const double gain = parent_gini - (nl / total) * gini_l - (nr / total) * gini_r;
                if (gain > best_gain) {
                    best_gain = gain;
                    best.found = true;
                    best.feature = feature;
                    best.threshold = ordered[i].first + 0.5 * (ordered[i + 1].first - ordered[i].first);
                }
            }
        }
        return best;
    }
};

}  // namespace

TrainedClassifier train_random_forest(const FeatureMatrix& X, const ForestConfig& config,
                                      std::uint64_t seed) {
    X.validate();
    if (X.values.rows() == 0 || X.values.cols() == 0) {
        throw std::invalid_argument("train_random_forest: empty feature matrix");
    }
    if (config.n_trees == 0) {
        throw std::invalid_argument("train_random_forest: n_trees must be positive");
    }
    detail::check_finite(X.values, "train_random_forest");
    detail::check_binary_labels(X.labels, "train_random_forest");

    const std::size_t n = X.values.rows();
    const std::size_t p = X.values.cols();
    std::size_t candidates = config.features_per_split;
    if (candidates == 0) {
        candidates = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(p))));
    }
    candidates = std::min(candidates, p);

    ForestParams params;
    params.config = config;
    params.trees.resize(config.n_trees);
    // Each tree draws from its own seed stream, so the build order cannot
    // change the forest.
    parallel_for(config.n_trees, [&](std::size_t t) {
        Rng rng(derive_seed(seed, "forest-tree", t));
        std::vector<std::size_t> rows(n);
        for (std::size_t i = 0; i < n; ++i) {
            rows[i] = rng.next_below(n);
        }
        TreeBuilder builder{X.values, X.labels, config, candidates, rng, {}};
        builder.build(rows, 0);
        params.trees[t].nodes = std::move(builder.nodes);
    });

    TrainedClassifier model;
    model.kind = ModelKind::RandomForest;
    model.feature_names = X.feature_names;
    model.training_seed = seed;
    model.params = std::move(params);
    return model;
}

}  // namespace admitml
