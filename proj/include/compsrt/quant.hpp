#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "compsrt/rng.hpp"
#include "compsrt/tensor.hpp"

namespace csrt {

using Code = std::uint8_t;

/// Per-tensor fake-quantizer with decomposed scale and zero offset.
///
/// With levels = 2^bits - 1 and S = (upper - lower) / levels:
///   code  = clamp(round((levels / (upper - lower) + alpha) * (clip(x) - (lower + beta))), 0, levels)
///   value = (S + alpha) * code + (lower + beta)
/// round() is half-away-from-zero. alpha = beta = 0 gives the plain
/// min/max affine quantizer.
struct QuantParams {
    int bits = 4;
    double lower = 0.0;
    double upper = 1.0;
    double alpha = 0.0;
    double beta = 0.0;

    int levels() const { return (1 << bits) - 1; }
    double scale() const { return (upper - lower) / levels(); }
    /// S' = S + alpha, multiplies codes on the way back.
    double effective_scale() const { return scale() + alpha; }
    /// levels / (u - l) + alpha, multiplies the shifted input on the way in.
    double code_multiplier() const { return levels() / (upper - lower) + alpha; }
    /// l' = l + beta.
    double effective_zero() const { return lower + beta; }

    /// Throws ArgumentError unless 2 <= bits <= 8, all fields finite,
    /// upper > lower and both multipliers are positive.
    void validate() const;

    friend bool operator==(const QuantParams&, const QuantParams&) = default;
};

Tensor clip(const Tensor& x, double lower, double upper);

Code quantize_value(float x, const QuantParams& p);
float dequantize_value(Code code, const QuantParams& p);

std::vector<Code> quantize(const Tensor& x, const QuantParams& p);
/// Codes as a 1-D tensor, or with `shape` when given.
Tensor dequantize(std::span<const Code> codes, const QuantParams& p, Shape shape = {});
Tensor fake_quantize(const Tensor& x, const QuantParams& p);

/// Mean squared fake-quantization error over `values`.
double fake_quant_mse(std::span<const float> values, const QuantParams& p);

/// Options for the clipping-range search.
struct BoundSearchOptions {
    std::size_t steps = 100;
    /// Largest fraction of the range either bound may move inward.
    double shrink_limit = 0.45;
    std::size_t max_sample = 65536;
    Seed seed{};
};

/// Half-width used for a constant input (max == min).
inline constexpr double kDegenerateHalfWidth = 1e-4;

/// Coarse-to-fine per-side grid search for (lower, upper) minimizing the
/// fake-quantization MSE, starting from min/max. Returns alpha = beta = 0.
/// Never returns bounds with a higher full-tensor MSE than min/max.
QuantParams search_bounds(const Tensor& x, int bits, const BoundSearchOptions& opts = {});
QuantParams search_bounds(std::span<const float> values, int bits, const BoundSearchOptions& opts = {});

/// Plain min/max bounds (or the degenerate window for constants).
QuantParams minmax_params(std::span<const float> values, int bits);

}  // namespace csrt
