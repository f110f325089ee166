#pragma once

#include <cstddef>
#include <vector>

#include "compsrt/tensor.hpp"

namespace csrt {

/// HWC float image with pixels in [0, 1].
struct Image {
    std::size_t height = 0;
    std::size_t width = 0;
    std::size_t channels = 1;
    std::vector<float> pixels;

    /// Throws ArgumentError on bad dimensions or pixels outside [0, 1].
    Image(std::size_t h, std::size_t w, std::size_t c, std::vector<float> px);

    /// Accepts [H, W] or [H, W, C] with C in {1, 3}.
    static Image from_tensor(const Tensor& t);

    float at(std::size_t y, std::size_t x, std::size_t c) const { return pixels[(y * width + x) * channels + c]; }
};

struct MetricOptions {
    /// Evaluate 3-channel images on BT.601 luma only (SR convention).
    bool luma_only = false;
};

/// 10 log10(1 / MSE) with peak 1. Identical images give +infinity.
double psnr(const Image& a, const Image& b, const MetricOptions& opts = {});

inline constexpr std::size_t kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;

/// Mean SSIM over all fully-covered 11x11 Gaussian windows (sigma 1.5),
/// K1 = 0.01, K2 = 0.03, L = 1, averaged over channels.
double ssim(const Image& a, const Image& b, const MetricOptions& opts = {});

/// Maps `t` to [0, 1] with the affine map sending [lo, hi] to [0, 1], then clamps.
Image tensor_as_image(const Tensor& t, double lo, double hi);

}  // namespace csrt
