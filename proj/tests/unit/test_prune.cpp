#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "compsrt/errors.hpp"
#include "compsrt/prune.hpp"
#include "helpers.hpp"

using namespace csrt;

namespace {

// numpy.quantile(|x|, f, method="linear") via a full sort.
double sort_quantile(const Tensor& x, double f) {
    std::vector<double> a;
    for (float v : x.values()) a.push_back(std::abs(static_cast<double>(v)));
    std::sort(a.begin(), a.end());
    const double pos = f * static_cast<double>(a.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    if (lo + 1 >= a.size()) return a.back();
    return a[lo] + (pos - static_cast<double>(lo)) * (a[lo + 1] - a[lo]);
}

}  // namespace

TEST_SUITE("prune") {

TEST_CASE("threshold matches the sort oracle") {
    std::mt19937_64 gen(31);
    for (int trial = 0; trial < 30; ++trial) {
        const Tensor x = testing::random_tensor({1 + gen() % 300}, gen, -5, 5);
        for (double f : {0.0, 0.1, 0.4, 0.5, 0.77, 0.99}) CHECK(magnitude_threshold(x, f) == sort_quantile(x, f));
    }
}

TEST_CASE("fraction 1 prunes everything, fraction 0 nothing") {
    const Tensor x({5}, {1, -2, 3, -4, 5});
    const auto all = prune_unstructured(x, 1.0);
    CHECK(all.mask.kept_count() == 0);
    for (float v : all.pruned.values()) CHECK(v == 0.0f);
    const auto none = prune_unstructured(x, 0.0);
    CHECK(none.mask.kept_count() == 5);
    CHECK(bitwise_equal(none.pruned, x));
}

TEST_CASE("ties at the threshold are kept") {
    const Tensor x({4}, {1, 1, 1, 1});
    const auto r = prune_unstructured(x, 0.5);
    CHECK(r.mask.threshold == 1.0);
    CHECK(r.mask.kept_count() == 4);
}

TEST_CASE("forty percent of distinct magnitudes") {
    std::vector<float> v(1000);
    for (int i = 0; i < 1000; ++i) v[i] = static_cast<float>((i % 2 ? -1 : 1) * (i + 1));
    const auto r = prune_unstructured(Tensor({1000}, v), 0.4);
    // T interpolates between 400 and 401, so |x| <= 400 goes
    CHECK(r.mask.kept_count() == 600);
    for (int i = 0; i < 1000; ++i) CHECK(r.mask.keep[i] == (i + 1 > 400));
}

TEST_CASE("argument checks") {
    const Tensor x({3}, {1, 2, 3});
    CHECK_THROWS_AS(prune_unstructured(x, -0.1), ArgumentError);
    CHECK_THROWS_AS(prune_unstructured(x, 1.5), ArgumentError);
    CHECK_THROWS_AS(apply_mask(x, std::vector<bool>(2, true)), ArgumentError);
}

TEST_CASE("apply_mask") {
    const Tensor x({3}, {1, 2, 3});
    const Tensor y = apply_mask(x, {true, false, true});
    CHECK(y[0] == 1.0f);
    CHECK(y[1] == 0.0f);
    CHECK(y[2] == 3.0f);
}

TEST_CASE("structured pruning drops the weakest rows") {
    // row means of |w|: 3, 1, 2, 1
    const Tensor w({4, 2}, {3, -3, 1, -1, 2, 2, -1, 1});
    const auto r = prune_structured(w, 0.5);
    CHECK(r.kept_rows == std::vector<std::size_t>{0, 2});
    CHECK(r.pruned[2] == 0.0f);
    CHECK(r.pruned[3] == 0.0f);
    CHECK(r.pruned[6] == 0.0f);
    CHECK(r.pruned[0] == 3.0f);
    // tie between rows 1 and 3 goes to the lower index first
    const auto one = prune_structured(w, 0.25);
    CHECK(one.kept_rows == std::vector<std::size_t>{0, 2, 3});
    CHECK(prune_structured(w, 0.0).kept_rows.size() == 4);
    CHECK_THROWS_AS(prune_structured(Tensor({4}, {1, 2, 3, 4}), 0.5), ArgumentError);
}

TEST_CASE("mask files") {
    testing::TempDir dir("mask");
    std::vector<bool> keep(37);
    for (std::size_t i = 0; i < keep.size(); ++i) keep[i] = i % 3 == 0;
    save_mask(keep, dir / "m.bin");
    CHECK(load_mask(dir / "m.bin") == keep);
    auto bytes = encode_mask(keep);
    CHECK(bytes.size() == 8 + 5);
    bytes.push_back(0);
    CHECK_THROWS_AS(decode_mask(bytes), FormatError);
}

TEST_CASE("large tensors threshold on a deterministic sample") {
    std::mt19937_64 gen(4);
    const Tensor x = testing::random_tensor({kDefaultThresholdSample + 1000}, gen);
    const double a = magnitude_threshold(x, 0.4, std::nullopt, Seed{1});
    CHECK(a == magnitude_threshold(x, 0.4, std::nullopt, Seed{1}));
    CHECK(std::abs(a - 0.4) < 0.01);
}

}  // TEST_SUITE
