#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "compsrt/hadamard.hpp"
#include "compsrt/quant.hpp"

namespace csrt {

/// Packs `width`-bit values LSB-first: value i occupies stream bits
/// [i*width, (i+1)*width), stream bit k lives in byte k/8 at bit k%8.
std::vector<std::uint8_t> pack_bits(std::span<const Code> values, int width);
std::vector<Code> unpack_bits(std::span<const std::uint8_t> bytes, std::size_t count, int width);

/// One bit per element, 1 = kept, same LSB-first order.
std::vector<std::uint8_t> pack_mask(const std::vector<bool>& keep);
std::vector<bool> unpack_mask(std::span<const std::uint8_t> bytes, std::size_t count);

/// Storage artifact for one quantized tensor.
///
/// Codes are stored for the tensor as quantized: padded and Hadamard-
/// transformed when `hadamard_applied`. With a mask only kept positions
/// carry a code.
struct PackedTensor {
    QuantParams params;
    Shape shape;                   // original, unpadded
    std::optional<PadInfo> pad;    // present iff hadamard_applied
    bool hadamard_applied = false;
    std::vector<std::uint8_t> codes;
    std::uint64_t code_count = 0;
    std::optional<std::vector<std::uint8_t>> mask;

    Shape stored_shape() const;
    std::size_t stored_numel() const;

    friend bool operator==(const PackedTensor&, const PackedTensor&) = default;
};

/// `codes` holds one code per stored element; positions with keep == false
/// are dropped. Throws ArgumentError on size mismatch or out-of-range codes.
PackedTensor pack(std::span<const Code> codes, const QuantParams& params, Shape shape,
                  std::optional<PadInfo> pad, const std::optional<std::vector<bool>>& keep);

/// Dequantized tensor in the stored (padded, transformed) domain; pruned
/// positions are 0.0.
Tensor unpack(const PackedTensor& pt);

/// unpack() followed by the inverse transform when one was applied, giving
/// a tensor in the original shape.
Tensor reconstruct(const PackedTensor& pt);

/// bits * keep_fraction + 1 with a mask, bits otherwise. Keep fraction is
/// relative to the stored element count.
double bits_per_parameter(const PackedTensor& pt);

/// Size of the encoded CSRQ file in bytes.
std::size_t encoded_size(const PackedTensor& pt);

// CSRQ, little-endian:
//   "CSRQ" | u8 version=1 | u8 bits | u8 hadamard_applied | u8 ndim | u64 dims[ndim] (stored shape)
//   | u64 pad_original_dim (0 = no pad) | f64 lower, upper, alpha, beta | u8 mask_present
//   | [mask: ceil(numel/8) bytes] | u64 code_count | ceil(code_count*bits/8) code bytes
std::vector<std::uint8_t> encode_packed(const PackedTensor& pt);
PackedTensor decode_packed(std::span<const std::uint8_t> bytes);

struct CompressOptions {
    int bits = 4;
    bool hadamard = false;
    double prune_fraction = 0.0;
    BoundSearchOptions search{};
};

/// Optional transform, magnitude pruning of the (transformed) tensor, bound
/// search over the kept values, then quantize and pack.
PackedTensor compress_tensor(const Tensor& x, const CompressOptions& opts);

PackedTensor load_packed(const std::filesystem::path& path);
void save_packed(const PackedTensor& pt, const std::filesystem::path& path);

}  // namespace csrt
