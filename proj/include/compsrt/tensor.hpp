#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "compsrt/rng.hpp"

namespace csrt {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);

/// Dense row-major f32 tensor. Immutable once constructed: operations build
/// a fresh buffer and hand it to the constructor.
class Tensor {
public:
    Tensor() = default;

    /// Throws ArgumentError if `shape` is empty, has a zero dimension, or
    /// disagrees with `data.size()`.
    Tensor(Shape shape, std::vector<float> data);

    static Tensor zeros(Shape shape);

    const Shape& shape() const { return shape_; }
    std::span<const float> values() const { return data_; }
    const std::vector<float>& data() const { return data_; }

    std::size_t numel() const { return data_.size(); }
    std::size_t ndim() const { return shape_.size(); }
    std::size_t last_dim() const { return shape_.empty() ? 0 : shape_.back(); }
    /// Number of rows when viewed as [numel / last_dim, last_dim].
    std::size_t rows() const { return last_dim() == 0 ? 0 : numel() / last_dim(); }
    bool empty() const { return data_.empty(); }

    float operator[](std::size_t i) const { return data_[i]; }

    /// Same data, new shape with equal numel.
    Tensor reshaped(Shape shape) const;

    bool all_finite() const;

    friend bool operator==(const Tensor&, const Tensor&) = default;

private:
    Shape shape_;
    std::vector<float> data_;
};

/// Bitwise equality (distinguishes -0.0 from 0.0 and compares NaN payloads).
bool bitwise_equal(const Tensor& a, const Tensor& b);

// CSRT file format, little-endian:
//   "CSRT" | u8 version=1 | u8 dtype=0 (f32) | u8 ndim | u64 dims[ndim] | f32 payload
std::vector<std::uint8_t> encode_tensor(const Tensor& t);
/// Throws FormatError on malformed bytes and ValidationError on non-finite payload.
Tensor decode_tensor(std::span<const std::uint8_t> bytes);

Tensor load_tensor(const std::filesystem::path& path);
void save_tensor(const Tensor& t, const std::filesystem::path& path);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(std::span<const std::uint8_t> bytes, const std::filesystem::path& path);

/// k elements drawn uniformly without replacement (partial Fisher-Yates over
/// an index array). Returns every element, in order, when k >= numel.
std::vector<float> sample_elements(const Tensor& t, std::size_t k, Seed seed);

/// Tensor filled with scale * Student-t(df) draws from `rng`, row-major order.
Tensor student_t_tensor(Shape shape, int df, double scale, Rng& rng);
Tensor normal_tensor(Shape shape, double stddev, Rng& rng);

}  // namespace csrt
