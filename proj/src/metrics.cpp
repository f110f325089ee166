#include "compsrt/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "compsrt/errors.hpp"

namespace csrt {

Image::Image(std::size_t h, std::size_t w, std::size_t c, std::vector<float> px)
    : height(h), width(w), channels(c), pixels(std::move(px)) {
    if (h == 0 || w == 0) throw ArgumentError("Image: empty dimensions");
    if (c != 1 && c != 3) throw ArgumentError("Image: channels must be 1 or 3");
    if (pixels.size() != h * w * c) throw ArgumentError("Image: pixel count does not match dimensions");
    for (float v : pixels)
        if (!(v >= 0.0f && v <= 1.0f)) throw ArgumentError("Image: pixel outside [0,1]");
}

Image Image::from_tensor(const Tensor& t) {
    if (t.ndim() == 2) return Image(t.shape()[0], t.shape()[1], 1, t.data());
    if (t.ndim() == 3) return Image(t.shape()[0], t.shape()[1], t.shape()[2], t.data());
    throw ArgumentError("Image: tensor must be [H,W] or [H,W,C]");
}

namespace {

void require_same_dims(const Image& a, const Image& b) {
    if (a.height != b.height || a.width != b.width || a.channels != b.channels)
        throw ArgumentError("image dimensions differ");
}

// Planes to evaluate: each channel, or one luma plane.
std::vector<std::vector<double>> planes(const Image& img, const MetricOptions& opts) {
    const std::size_t n = img.height * img.width;
    if (opts.luma_only && img.channels == 3) {
        std::vector<double> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double r = img.pixels[3 * i], g = img.pixels[3 * i + 1], b = img.pixels[3 * i + 2];
            y[i] = (16.0 + 65.481 * r + 128.553 * g + 24.966 * b) / 255.0;
        }
        return {y};
    }
    std::vector<std::vector<double>> out(img.channels, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < img.channels; ++c) out[c][i] = img.pixels[i * img.channels + c];
    return out;
}

std::vector<double> gaussian_window() {
    std::vector<double> g(kSsimWindow);
    const double half = (kSsimWindow - 1) / 2.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < kSsimWindow; ++i) {
        const double d = static_cast<double>(i) - half;
        g[i] = std::exp(-d * d / (2.0 * kSsimSigma * kSsimSigma));
        sum += g[i];
    }
    for (auto& v : g) v /= sum;
    return g;
}

double ssim_plane(const std::vector<double>& a, const std::vector<double>& b, std::size_t h, std::size_t w) {
    constexpr double c1 = (0.01 * 1.0) * (0.01 * 1.0);
    constexpr double c2 = (0.03 * 1.0) * (0.03 * 1.0);
    const auto g = gaussian_window();
    const std::size_t oh = h - kSsimWindow + 1, ow = w - kSsimWindow + 1;
    double total = 0.0;
    for (std::size_t y = 0; y < oh; ++y) {
        for (std::size_t x = 0; x < ow; ++x) {
            double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
            for (std::size_t i = 0; i < kSsimWindow; ++i) {
                for (std::size_t j = 0; j < kSsimWindow; ++j) {
                    const double wt = g[i] * g[j];
                    const double va = a[(y + i) * w + x + j];
                    const double vb = b[(y + i) * w + x + j];
                    ma += wt * va;
                    mb += wt * vb;
                    // Products grouped so that swapping a and b is bit-exact.
                    saa += wt * (va * va);
                    sbb += wt * (vb * vb);
                    sab += wt * (va * vb);
                }
            }
            const double var_a = saa - ma * ma;
            const double var_b = sbb - mb * mb;
            const double cov = sab - ma * mb;
            total += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (var_a + var_b + c2));
        }
    }
    return total / static_cast<double>(oh * ow);
}

}  // namespace

double psnr(const Image& a, const Image& b, const MetricOptions& opts) {
    require_same_dims(a, b);
    const auto pa = planes(a, opts);
    const auto pb = planes(b, opts);
    double acc = 0.0;
    std::size_t count = 0;
    for (std::size_t c = 0; c < pa.size(); ++c)
        for (std::size_t i = 0; i < pa[c].size(); ++i) {
            const double e = pa[c][i] - pb[c][i];
            acc += e * e;
            ++count;
        }
    const double m = acc / static_cast<double>(count);
    if (m == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(1.0 / m);
}

double ssim(const Image& a, const Image& b, const MetricOptions& opts) {
    require_same_dims(a, b);
    if (std::min(a.height, a.width) < kSsimWindow)
        throw ArgumentError("ssim: image smaller than the " + std::to_string(kSsimWindow) + "x" +
                            std::to_string(kSsimWindow) + " window");
    const auto pa = planes(a, opts);
    const auto pb = planes(b, opts);
    double acc = 0.0;
    for (std::size_t c = 0; c < pa.size(); ++c) acc += ssim_plane(pa[c], pb[c], a.height, a.width);
    return acc / static_cast<double>(pa.size());
}

Image tensor_as_image(const Tensor& t, double lo, double hi) {
    if (!(hi > lo)) throw ArgumentError("tensor_as_image: empty value range");
    std::vector<float> px(t.numel());
    for (std::size_t i = 0; i < px.size(); ++i)
        px[i] = static_cast<float>(std::clamp((t[i] - lo) / (hi - lo), 0.0, 1.0));
    if (t.ndim() == 3) return Image(t.shape()[0], t.shape()[1], t.shape()[2], std::move(px));
    return Image(t.rows(), t.last_dim(), 1, std::move(px));
}

}  // namespace csrt
