#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "admitml/rng.hpp"
#include "doctest.h"

using admitml::derive_seed;
using admitml::Rng;

TEST_CASE("derive_seed is stable and separates streams") {
    const auto a = derive_seed(42, "forest-tree", 0);
    CHECK(a == derive_seed(42, "forest-tree", 0));
    CHECK(a != derive_seed(42, "forest-tree", 1));
    CHECK(a != derive_seed(42, "mlp-init", 0));
    CHECK(a != derive_seed(43, "forest-tree", 0));
    CHECK(derive_seed(7, "split") == derive_seed(7, "split"));
}

TEST_CASE("identical seeds replay identical sequences") {
    Rng a(123), b(123);
    for (int i = 0; i < 1000; ++i) {
        CHECK(a.next_u64() == b.next_u64());
    }
    Rng c(123), d(124);
    int differing = 0;
    for (int i = 0; i < 64; ++i) {
        differing += c.next_u64() != d.next_u64();
    }
    CHECK(differing > 60);
}

TEST_CASE("next_below stays in range and reaches every value") {
    Rng rng(7);
    std::set<std::uint64_t> seen;
    for (int i = 0; i < 2000; ++i) {
        const auto v = rng.next_below(7);
        CHECK(v < 7);
        seen.insert(v);
    }
    CHECK(seen.size() == 7);
    CHECK_THROWS_AS((void)rng.next_below(0), std::invalid_argument);
}

TEST_CASE("next_double lands in the unit interval") {
    Rng rng(99);
    double lo = 1.0, hi = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const double u = rng.next_double();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        lo = std::min(lo, u);
        hi = std::max(hi, u);
    }
    CHECK(lo < 0.01);
    CHECK(hi > 0.99);
}

TEST_CASE("normals have unit-ish moments") {
    Rng rng(5);
    const int n = 20000;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = rng.next_normal();
        sum += z;
        sumsq += z * z;
    }
    const double mean = sum / n;
    const double var = sumsq / n - mean * mean;
    CHECK(std::abs(mean) < 0.03);
    CHECK(std::abs(var - 1.0) < 0.05);
}

TEST_CASE("shuffle permutes and is seed-deterministic") {
    std::vector<int> items(50);
    for (int i = 0; i < 50; ++i) items[i] = i;

    auto first = items;
    Rng(11).shuffle(first);
    auto second = items;
    Rng(11).shuffle(second);
    CHECK(first == second);

    auto sorted = first;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == items);

    auto other = items;
    Rng(12).shuffle(other);
    CHECK(first != other);
}

TEST_CASE("sample_indices returns distinct in-range indices") {
    Rng rng(3);
    const auto picks = rng.sample_indices(100, 10);
    CHECK(picks.size() == 10);
    std::set<std::size_t> unique(picks.begin(), picks.end());
    CHECK(unique.size() == 10);
    for (auto p : picks) CHECK(p < 100);

    CHECK(Rng(3).sample_indices(100, 10) == picks);
    CHECK(Rng(3).sample_indices(4, 4).size() == 4);
    CHECK_THROWS_AS((void)rng.sample_indices(3, 4), std::invalid_argument);
}
