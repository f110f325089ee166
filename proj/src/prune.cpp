#include "compsrt/prune.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "compsrt/byteio.hpp"
#include "compsrt/errors.hpp"
#include "compsrt/packed.hpp"

namespace csrt {

namespace {

void check_fraction(double fraction, const char* who) {
    if (!(fraction >= 0.0 && fraction <= 1.0))
        throw ArgumentError(std::string(who) + ": fraction must be in [0,1]");
}

}  // namespace

std::size_t PruneMask::kept_count() const {
    return static_cast<std::size_t>(std::count(keep.begin(), keep.end(), true));
}

double magnitude_threshold(const Tensor& x, double fraction, std::optional<std::size_t> sample, Seed seed) {
    check_fraction(fraction, "magnitude_threshold");
    if (x.empty()) throw ArgumentError("magnitude_threshold: empty tensor");
    const std::size_t k = sample.value_or(std::min(x.numel(), kDefaultThresholdSample));
    std::vector<float> picked = sample_elements(x, k, seed);

    std::vector<double> mags(picked.size());
    std::transform(picked.begin(), picked.end(), mags.begin(), [](float v) { return std::fabs(static_cast<double>(v)); });
    std::sort(mags.begin(), mags.end());

    if (fraction >= 1.0) return std::nextafter(mags.back(), std::numeric_limits<double>::infinity());
    const double pos = fraction * static_cast<double>(mags.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, mags.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return mags[lo] + frac * (mags[hi] - mags[lo]);
}

PruneResult prune_unstructured(const Tensor& x, double fraction, Seed seed) {
    const double threshold = magnitude_threshold(x, fraction, std::nullopt, seed);
    PruneMask mask;
    mask.fraction = fraction;
    mask.threshold = threshold;
    mask.keep.resize(x.numel());
    std::vector<float> out(x.numel());
    for (std::size_t i = 0; i < x.numel(); ++i) {
        const bool keep = std::fabs(static_cast<double>(x[i])) >= threshold;
        mask.keep[i] = keep;
        out[i] = keep ? x[i] : 0.0f;
    }
    return {Tensor(x.shape(), std::move(out)), std::move(mask)};
}

Tensor apply_mask(const Tensor& x, const std::vector<bool>& keep) {
    if (keep.size() != x.numel()) throw ArgumentError("apply_mask: mask length does not match tensor");
    std::vector<float> out(x.numel());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = keep[i] ? x[i] : 0.0f;
    return Tensor(x.shape(), std::move(out));
}

StructuredPruneResult prune_structured(const Tensor& w, double fraction) {
    if (w.ndim() != 2) throw ArgumentError("prune_structured: weight must be 2-D");
    check_fraction(fraction, "prune_structured");
    const std::size_t rows = w.shape()[0];
    const std::size_t cols = w.shape()[1];

    std::vector<double> mean_abs(rows, 0.0);
    for (std::size_t r = 0; r < rows; ++r) {
        double acc = 0.0;
        for (std::size_t c = 0; c < cols; ++c) acc += std::fabs(static_cast<double>(w[r * cols + c]));
        mean_abs[r] = acc / static_cast<double>(cols);
    }
    std::vector<std::size_t> order(rows);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return mean_abs[a] < mean_abs[b]; });

    // The epsilon absorbs representation error in products like (1/3) * 3.
    const auto drop = std::min(rows, static_cast<std::size_t>(std::floor(fraction * static_cast<double>(rows) + 1e-9)));
    std::vector<bool> keep_row(rows, true);
    for (std::size_t i = 0; i < drop; ++i) keep_row[order[i]] = false;

    std::vector<float> out(w.data());
    StructuredPruneResult result{Tensor(), {}};
    for (std::size_t r = 0; r < rows; ++r) {
        if (keep_row[r]) {
            result.kept_rows.push_back(r);
        } else {
            std::fill_n(out.begin() + static_cast<std::ptrdiff_t>(r * cols), cols, 0.0f);
        }
    }
    result.pruned = Tensor(w.shape(), std::move(out));
    return result;
}

std::vector<std::uint8_t> encode_mask(const std::vector<bool>& keep) {
    detail::ByteWriter w;
    w.u64(keep.size());
    w.bytes(pack_mask(keep));
    return w.take();
}

std::vector<bool> decode_mask(std::span<const std::uint8_t> bytes) {
    detail::ByteReader r(bytes, "mask");
    const std::uint64_t count = r.u64();
    if (count / 8 > r.remaining()) throw FormatError("mask: truncated bitstream");
    auto body = r.take((count + 7) / 8);
    r.expect_end();
    return unpack_mask(body, count);
}

void save_mask(const std::vector<bool>& keep, const std::filesystem::path& path) {
    write_file_bytes(encode_mask(keep), path);
}

std::vector<bool> load_mask(const std::filesystem::path& path) {
    const auto bytes = read_file_bytes(path);
    try {
        return decode_mask(bytes);
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

}  // namespace csrt
