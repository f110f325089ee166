#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <vector>

#include "compsrt/rng.hpp"
#include "compsrt/tensor.hpp"

namespace csrt {

/// Threshold sample size: whole tensor up to this many elements, otherwise
/// a random sample of this size.
inline constexpr std::size_t kDefaultThresholdSample = std::size_t{1} << 20;

struct PruneMask {
    std::vector<bool> keep;  // one flag per element, true = kept
    double fraction = 0.0;   // requested prune fraction
    double threshold = 0.0;  // |x| < threshold is pruned

    std::size_t kept_count() const;
};

/// Linear-interpolation quantile of |x| at `fraction` (numpy "linear").
/// fraction == 1 returns the next double above max |x| so that every
/// element falls strictly below it. `sample` defaults to the whole tensor
/// up to kDefaultThresholdSample elements.
double magnitude_threshold(const Tensor& x, double fraction, std::optional<std::size_t> sample = std::nullopt,
                           Seed seed = {});

/// Zeroes every element with |x| < T; ties at T are kept.
struct PruneResult {
    Tensor pruned;
    PruneMask mask;
};
PruneResult prune_unstructured(const Tensor& x, double fraction, Seed seed = {});

/// x with masked-out positions replaced by 0.
Tensor apply_mask(const Tensor& x, const std::vector<bool>& keep);

/// Ranks rows of a 2-D [out, in] weight by mean |w| and zeroes the
/// floor(fraction * rows) lowest. Ties go to the lower row index first.
struct StructuredPruneResult {
    Tensor pruned;
    std::vector<std::size_t> kept_rows;  // ascending
};
StructuredPruneResult prune_structured(const Tensor& w, double fraction);

/// Standalone mask file: u64 element count (LE) followed by the LSB-first bitstream.
std::vector<std::uint8_t> encode_mask(const std::vector<bool>& keep);
std::vector<bool> decode_mask(std::span<const std::uint8_t> bytes);
void save_mask(const std::vector<bool>& keep, const std::filesystem::path& path);
std::vector<bool> load_mask(const std::filesystem::path& path);

}  // namespace csrt
