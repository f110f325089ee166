#include "compsrt/hadamard.hpp"

#include <bit>
#include <cmath>
#include <string>
#include <vector>

#include "compsrt/errors.hpp"

namespace csrt {

namespace {

// Row-wise transform of a [rows, n] buffer with n a power of two.
std::vector<float> transform_rows(std::span<const float> src, std::size_t rows, std::size_t src_dim,
                                  std::size_t n, std::size_t out_dim) {
    std::vector<float> out(rows * out_dim);
    std::vector<double> row(n);
    for (std::size_t r = 0; r < rows; ++r) {
        std::fill(row.begin(), row.end(), 0.0);
        for (std::size_t c = 0; c < src_dim; ++c) row[c] = src[r * src_dim + c];
        fwht_normalized(row);
        for (std::size_t c = 0; c < out_dim; ++c) out[r * out_dim + c] = static_cast<float>(row[c]);
    }
    return out;
}

}  // namespace

std::size_t next_pow2(std::size_t n) {
    if (n == 0) throw ArgumentError("next_pow2: n must be >= 1");
    return std::bit_ceil(n);
}

Transformed pad_last_dim(const Tensor& t) {
    if (t.empty()) throw ArgumentError("pad_last_dim: empty tensor");
    const std::size_t dim = t.last_dim();
    const std::size_t padded = next_pow2(dim);
    const PadInfo pad{dim, padded};
    if (padded == dim) return {t, pad};

    const std::size_t rows = t.rows();
    std::vector<float> data(rows * padded, 0.0f);
    for (std::size_t r = 0; r < rows; ++r)
        std::copy_n(t.values().begin() + static_cast<std::ptrdiff_t>(r * dim), dim, data.begin() + static_cast<std::ptrdiff_t>(r * padded));
    Shape shape = t.shape();
    shape.back() = padded;
    return {Tensor(std::move(shape), std::move(data)), pad};
}

void fwht_normalized(std::span<double> x) {
    const std::size_t n = x.size();
    if (n == 0 || !std::has_single_bit(n)) throw ArgumentError("fwht_normalized: length must be a power of two");
    for (std::size_t h = 1; h < n; h <<= 1) {
        for (std::size_t i = 0; i < n; i += h << 1) {
            for (std::size_t j = i; j < i + h; ++j) {
                const double a = x[j];
                const double b = x[j + h];
                x[j] = a + b;
                x[j + h] = a - b;
            }
        }
    }
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (auto& v : x) v *= scale;
}

Transformed hadamard_transform(const Tensor& t) {
    if (t.empty()) throw ArgumentError("hadamard_transform: empty tensor");
    const std::size_t dim = t.last_dim();
    const std::size_t n = next_pow2(dim);
    Shape shape = t.shape();
    shape.back() = n;
    return {Tensor(std::move(shape), transform_rows(t.values(), t.rows(), dim, n, n)), PadInfo{dim, n}};
}

Tensor hadamard_inverse(const Tensor& t, const PadInfo& pad) {
    if (t.empty()) throw ArgumentError("hadamard_inverse: empty tensor");
    if (t.last_dim() != pad.padded_dim || pad.original_dim == 0 || pad.original_dim > pad.padded_dim ||
        !std::has_single_bit(pad.padded_dim))
        throw ArgumentError("hadamard_inverse: last dim " + std::to_string(t.last_dim()) +
                            " inconsistent with PadInfo{" + std::to_string(pad.original_dim) + "," +
                            std::to_string(pad.padded_dim) + "}");
    Shape shape = t.shape();
    shape.back() = pad.original_dim;
    return Tensor(std::move(shape), transform_rows(t.values(), t.rows(), pad.padded_dim, pad.padded_dim, pad.original_dim));
}

}  // namespace csrt
