#include <doctest.h>

#include <cmath>

#include "compsrt/errors.hpp"
#include "compsrt/quant.hpp"
#include "helpers.hpp"
#include "oracles/plain_quant.hpp"

using namespace csrt;

namespace {

using oracle::Plain;

QuantParams params(int bits, double l, double u, double a = 0.0, double b = 0.0) {
    QuantParams p;
    p.bits = bits;
    p.lower = l;
    p.upper = u;
    p.alpha = a;
    p.beta = b;
    return p;
}

}  // namespace

TEST_SUITE("quant") {

TEST_CASE("validate") {
    CHECK_NOTHROW(params(2, -1, 1).validate());
    CHECK_THROWS_AS(params(1, -1, 1).validate(), ArgumentError);
    CHECK_THROWS_AS(params(9, -1, 1).validate(), ArgumentError);
    CHECK_THROWS_AS(params(4, 1, 1).validate(), ArgumentError);
    CHECK_THROWS_AS(params(4, 1, -1).validate(), ArgumentError);
    CHECK_THROWS_AS(params(4, -1, 1, std::nan("")).validate(), ArgumentError);
    // S' = 2/15 - 0.2 < 0
    CHECK_THROWS_AS(params(4, -1, 1, -0.2).validate(), ArgumentError);
}

TEST_CASE("b=2 on [-1, 1]") {
    const auto p = params(2, -1, 1);
    CHECK(p.levels() == 3);
    CHECK(p.scale() == doctest::Approx(2.0 / 3.0));
    CHECK(quantize_value(-1.0f, p) == 0);
    CHECK(quantize_value(1.0f, p) == 3);
    CHECK(quantize_value(-5.0f, p) == 0);
    CHECK(quantize_value(5.0f, p) == 3);
    CHECK(dequantize_value(0, p) == -1.0f);
    CHECK(dequantize_value(3, p) == 1.0f);
    // 0 sits exactly between codes 1 and 2; half rounds away from zero
    CHECK(quantize_value(0.0f, p) == 2);
    CHECK_THROWS_AS(dequantize_value(4, p), ValidationError);
    CHECK_THROWS_AS(quantize_value(std::nanf(""), p), ValidationError);
}

TEST_CASE("alpha = beta = 0 equals the plain quantizer bit-exactly") {
    std::mt19937_64 gen(21);
    std::uniform_real_distribution<double> bound(-3.0, 3.0);
    for (int bits = 2; bits <= 8; ++bits) {
        for (int rep = 0; rep < 5; ++rep) {
            double l = bound(gen), u = bound(gen);
            if (u < l) std::swap(l, u);
            if (u - l < 1e-3) u = l + 1.0;
            const auto p = params(bits, l, u);
            const Plain ref(l, u, bits);
            const Tensor x = testing::random_tensor({2000}, gen, l - 1.0, u + 1.0);
            const auto codes = quantize(x, p);
            const Tensor deq = dequantize(codes, p, x.shape());
            for (std::size_t i = 0; i < x.numel(); ++i) {
                REQUIRE(codes[i] == ref.code(x[i]));
                REQUIRE(std::bit_cast<std::uint32_t>(deq[i]) == std::bit_cast<std::uint32_t>(ref.deq(codes[i])));
            }
        }
    }
}

TEST_CASE("decomposed formulas with nonzero alpha, beta") {
    const auto p = params(3, -2, 2, 0.05, 0.1);
    const double L = 7;
    const double k = L / 4.0 + 0.05;
    const double s_eff = 4.0 / L + 0.05;
    for (float x : {-3.0f, -1.3f, 0.0f, 0.4f, 1.9f, 2.5f}) {
        const double c = std::clamp(static_cast<double>(x), -2.0, 2.0);
        const double code = std::clamp(std::round(k * (c - (-2.0 + 0.1))), 0.0, L);
        CHECK(quantize_value(x, p) == static_cast<int>(code));
        CHECK(dequantize_value(static_cast<Code>(code), p) == static_cast<float>(s_eff * code + (-2.0 + 0.1)));
    }
}

TEST_CASE("in-range reconstruction error is at most S/2") {
    std::mt19937_64 gen(8);
    for (int bits = 2; bits <= 4; ++bits) {
        const auto p = params(bits, -0.7, 1.3);
        const Tensor x = testing::random_tensor({10000}, gen, -0.7, 1.3);
        const Tensor y = fake_quantize(x, p);
        for (std::size_t i = 0; i < x.numel(); ++i) {
            const float big = std::max(std::abs(x[i]), std::abs(y[i]));
            const double ulp = std::nextafter(big, INFINITY) - big;
            REQUIRE(std::abs(static_cast<double>(y[i]) - x[i]) <= p.scale() / 2 + ulp);
        }
    }
}

TEST_CASE("codes stay in range under clipping") {
    const auto p = params(4, 0, 1);
    const Tensor x({4}, {-100.0f, 100.0f, 0.5f, 1e-9f});
    for (Code c : quantize(x, p)) CHECK(c <= 15);
    CHECK(fake_quantize(x, p).shape() == x.shape());
}

TEST_CASE("clip") {
    const Tensor y = clip(Tensor({3}, {-2, 0.5f, 9}), -1, 1);
    CHECK(y[0] == -1.0f);
    CHECK(y[1] == 0.5f);
    CHECK(y[2] == 1.0f);
    CHECK_THROWS_AS(clip(y, 1, 1), ArgumentError);
}

TEST_CASE("minmax and degenerate input") {
    const std::vector<float> v{0.25f, -1.5f, 3.0f};
    const auto p = minmax_params(v, 4);
    CHECK(p.lower == -1.5);
    CHECK(p.upper == 3.0);
    const std::vector<float> c(10, 2.0f);
    const auto d = search_bounds(c, 3);
    CHECK(d.lower == doctest::Approx(2.0 - kDegenerateHalfWidth));
    CHECK(d.upper == doctest::Approx(2.0 + kDegenerateHalfWidth));
    CHECK(d.alpha == 0.0);
    CHECK(d.beta == 0.0);
    CHECK_THROWS_AS(minmax_params(std::vector<float>{}, 4), ArgumentError);
}

TEST_CASE("bound search never loses to min/max") {
    std::mt19937_64 gen(4);
    std::student_t_distribution<double> t3(3.0);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<float> v(5000);
        for (auto& x : v) x = static_cast<float>(t3(gen));
        for (int bits : {2, 3, 4}) {
            const auto s = search_bounds(v, bits);
            CHECK(fake_quant_mse(v, s) <= fake_quant_mse(v, minmax_params(v, bits)));
            CHECK(s.lower >= *std::min_element(v.begin(), v.end()));
            CHECK(s.upper <= *std::max_element(v.begin(), v.end()));
        }
    }
}

TEST_CASE("bound search clips a lone outlier") {
    // 999 values in [-1, 1] and one at 1.8: min/max stretches every step by
    // 40% for a single value. The outlier sits within the shrink limit.
    std::vector<float> v;
    for (int i = 0; i < 999; ++i) v.push_back(static_cast<float>(-1.0 + 2.0 * i / 998.0));
    v.push_back(1.8f);
    const auto s = search_bounds(v, 2);
    CHECK(s.upper < 1.8);
    CHECK(fake_quant_mse(v, s) < fake_quant_mse(v, minmax_params(v, 2)));
}

TEST_CASE("bound search on exactly representable data") {
    // {0 x999, 100}: both values are grid points of the min/max quantizer, so
    // min/max already has zero error and the search must keep it.
    std::vector<float> v(999, 0.0f);
    v.push_back(100.0f);
    const auto s = search_bounds(v, 2);
    CHECK(fake_quant_mse(v, minmax_params(v, 2)) == 0.0);
    CHECK(fake_quant_mse(v, s) == 0.0);
}

TEST_CASE("bound search is deterministic and sample-guarded") {
    std::mt19937_64 gen(9);
    const Tensor x = testing::random_tensor({100000}, gen, -2, 2);
    BoundSearchOptions o;
    o.seed = Seed{3};
    const auto a = search_bounds(x, 3, o);
    const auto b = search_bounds(x, 3, o);
    CHECK(a == b);
    CHECK(fake_quant_mse(x.values(), a) <= fake_quant_mse(x.values(), minmax_params(x.values(), 3)));
    o.steps = 0;
    CHECK_THROWS_AS(search_bounds(x, 3, o), ArgumentError);
}

}  // TEST_SUITE
