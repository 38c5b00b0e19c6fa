#include "admitml/splits.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

#include "admitml/rng.hpp"

namespace admitml {

namespace {

std::map<int, std::vector<std::size_t>> rows_by_class(const std::vector<int>& labels) {
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        by_class[labels[i]].push_back(i);
    }
    return by_class;
}

std::uint64_t class_stream(std::uint64_t seed, const char* stage, int label) {
    return derive_seed(seed, stage, static_cast<std::uint64_t>(static_cast<std::int64_t>(label)));
}

}  // namespace

SplitIndices stratified_split(const std::vector<int>& labels, double train_fraction,
                              std::uint64_t seed) {
    if (labels.empty()) {
        throw std::invalid_argument("stratified_split: no rows");
    }
    if (!(train_fraction > 0.0) || !(train_fraction < 1.0)) {
        throw std::invalid_argument("stratified_split: train_fraction must be in (0, 1), got " +
                                    std::to_string(train_fraction));
    }

    const double test_fraction = 1.0 - train_fraction;
    auto by_class = rows_by_class(labels);

    struct ClassPlan {
        int label;
        std::vector<std::size_t> rows;  // shuffled
        double exact;                   // rows.size() * test_fraction
        std::size_t test_count;
    };
    std::vector<ClassPlan> plans;
    for (auto& [label, rows] : by_class) {
        Rng rng(class_stream(seed, "split-class", label));
        rng.shuffle(rows);
        const double exact = static_cast<double>(rows.size()) * test_fraction;
        const auto want = static_cast<std::size_t>(std::llround(exact));
        plans.push_back({label, std::move(rows), exact, std::min(want, rows.size())});
    }

    const auto total_target = static_cast<std::size_t>(
        std::llround(static_cast<double>(labels.size()) * test_fraction));
    std::size_t assigned = 0;
    for (const auto& plan : plans) assigned += plan.test_count;

    // Repair rounding drift one row at a time, taking from the class whose
    // allocation is furthest from its exact share.
    while (assigned != total_target) {
        ClassPlan* pick = nullptr;
        double best_gap = -1.0;
        for (auto& plan : plans) {
            double gap;
            if (assigned < total_target) {
                if (plan.test_count >= plan.rows.size()) continue;
                gap = plan.exact - static_cast<double>(plan.test_count);
            } else {
                if (plan.test_count == 0) continue;
                gap = static_cast<double>(plan.test_count) - plan.exact;
            }
            if (gap > best_gap) {
                best_gap = gap;
                pick = &plan;
            }
        }
        if (pick == nullptr) break;  // every class is at a bound
        if (assigned < total_target) {
            ++pick->test_count;
            ++assigned;
        } else {
            --pick->test_count;
            --assigned;
        }
    }

    SplitIndices out;
    for (const auto& plan : plans) {
        for (std::size_t i = 0; i < plan.rows.size(); ++i) {
            (i < plan.test_count ? out.test : out.train).push_back(plan.rows[i]);
        }
    }
    if (out.train.empty() || out.test.empty()) {
        throw std::invalid_argument("stratified_split: train_fraction " +
                                    std::to_string(train_fraction) + " leaves an empty side for " +
                                    std::to_string(labels.size()) + " rows");
    }
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.test.begin(), out.test.end());
    return out;
}

std::vector<int> stratified_fold_assignment(const std::vector<int>& labels, std::size_t k,
                                            std::uint64_t seed) {
    if (k < 2) {
        throw std::invalid_argument("stratified_fold_assignment: need at least 2 folds, got " +
                                    std::to_string(k));
    }
    if (labels.size() < k) {
        throw std::invalid_argument("stratified_fold_assignment: " + std::to_string(labels.size()) +
                                    " rows cannot fill " + std::to_string(k) + " folds");
    }
    auto by_class = rows_by_class(labels);
    for (const auto& [label, rows] : by_class) {
        if (rows.size() < k) {
            throw std::invalid_argument("stratified_fold_assignment: class " +
                                        std::to_string(label) + " has " +
                                        std::to_string(rows.size()) + " rows, fewer than " +
                                        std::to_string(k) + " folds");
        }
    }

    std::vector<int> fold_of(labels.size(), -1);
    std::size_t cursor = 0;  // continues across classes so overall sizes stay even
    for (auto& [label, rows] : by_class) {
        Rng rng(class_stream(seed, "fold-class", label));
        rng.shuffle(rows);
        for (std::size_t row : rows) {
            fold_of[row] = static_cast<int>(cursor % k);
            ++cursor;
        }
    }
    return fold_of;
}

}  // namespace admitml
