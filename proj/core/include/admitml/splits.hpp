#pragma once

#include <cstdint>
#include <vector>

namespace admitml {

// Stratified train/test partition. Test size per class is
// round(class_count * (1 - train_fraction)); rounding drift against the
// overall target round(n * (1 - train_fraction)) is repaired one row at a
// time from the classes with the largest fractional remainders.
struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};
SplitIndices stratified_split(const std::vector<int>& labels, double train_fraction,
                              std::uint64_t seed);

// Stratified k-fold assignment: per class the shuffled rows are dealt
// round-robin, continuing the deal across classes so total fold sizes also
// stay within one row of each other. Returns fold id per row, in [0, k).
std::vector<int> stratified_fold_assignment(const std::vector<int>& labels, std::size_t k,
                                            std::uint64_t seed);

}  // namespace admitml
