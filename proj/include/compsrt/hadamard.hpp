#pragma once

#include <cstddef>
#include <span>

#include "compsrt/tensor.hpp"

namespace csrt {

/// Last-dimension sizes before and after zero-padding to a power of two.
struct PadInfo {
    std::size_t original_dim = 0;
    std::size_t padded_dim = 0;

    bool is_noop() const { return original_dim == padded_dim; }
    friend bool operator==(const PadInfo&, const PadInfo&) = default;
};

struct Transformed {
    Tensor tensor;
    PadInfo pad;
};

std::size_t next_pow2(std::size_t n);

/// Zero-extends the last dimension to next_pow2(last_dim).
Transformed pad_last_dim(const Tensor& t);

/// In-place normalized fast Walsh-Hadamard transform (Sylvester order),
/// i.e. x <- H x / sqrt(n). `x.size()` must be a power of two.
void fwht_normalized(std::span<double> x);

/// Pads the last dimension to a power of two n and applies H / sqrt(n) to
/// every row. Output has the padded shape.
Transformed hadamard_transform(const Tensor& t);

/// Applies the same normalized transform (it is its own inverse) and drops
/// the padded tail, whatever it holds.
Tensor hadamard_inverse(const Tensor& t, const PadInfo& pad);

}  // namespace csrt
