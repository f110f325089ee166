#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "compsrt/errors.hpp"
#include "compsrt/metrics.hpp"

using namespace csrt;

namespace {

Image constant(std::size_t h, std::size_t w, float v, std::size_t c = 1) {
    return Image(h, w, c, std::vector<float>(h * w * c, v));
}

// Smooth test pattern and a perturbed copy; reference numbers below come from
// skimage.metrics (gaussian_weights, sigma 1.5, population covariance,
// data_range 1) on the same float32 pixels.
struct Pair {
    std::vector<float> a, b;
};

Pair pattern(std::size_t h, std::size_t w) {
    Pair p;
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x) {
            const double ad = 0.5 + 0.4 * std::sin(0.3 * x + 0.2 * y);
            const double bd = std::clamp(ad + 0.1 * std::cos(0.7 * x - 0.4 * y), 0.0, 1.0);
            p.a.push_back(static_cast<float>(ad));
            p.b.push_back(static_cast<float>(bd));
        }
    return p;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("PSNR closed forms") {
    CHECK(psnr(constant(4, 4, 0.5f), constant(4, 4, 0.0f)) == doctest::Approx(10.0 * std::log10(4.0)));
    CHECK(psnr(constant(4, 4, 0.5f), constant(4, 4, 0.0f)) == doctest::Approx(6.0206).epsilon(1e-4));
    CHECK(psnr(constant(3, 3, 0.1f), constant(3, 3, 0.2f)) == doctest::Approx(20.0).epsilon(1e-6));
    CHECK(std::isinf(psnr(constant(2, 2, 0.3f), constant(2, 2, 0.3f))));
}

TEST_CASE("SSIM closed forms") {
    const Image a = constant(16, 16, 0.4f);
    CHECK(ssim(a, a) == doctest::Approx(1.0).epsilon(1e-12));
    // flat images: variance terms vanish and only the luminance term is left
    const double m1 = 0.4f, m2 = 0.6f, c1 = 1e-4;
    CHECK(ssim(a, constant(16, 16, 0.6f)) == doctest::Approx((2 * m1 * m2 + c1) / (m1 * m1 + m2 * m2 + c1)).epsilon(1e-9));
}

TEST_CASE("SSIM and PSNR against skimage") {
    const auto p = pattern(20, 24);
    const Image a(20, 24, 1, p.a), b(20, 24, 1, p.b);
    CHECK(ssim(a, b) == doctest::Approx(0.8782189432855211).epsilon(1e-6));
    CHECK(psnr(a, b) == doctest::Approx(22.991275839936705).epsilon(1e-6));
    CHECK(ssim(a, b) == ssim(b, a));
    CHECK(psnr(a, b) == psnr(b, a));

    std::vector<float> c, d;
    for (std::size_t i = 0; i < p.a.size(); ++i) {
        c.insert(c.end(), {p.a[i], p.b[i], static_cast<float>(std::clamp(p.a[i] * 0.5 + 0.2, 0.0, 1.0))});
        d.insert(d.end(), {p.b[i], p.a[i], static_cast<float>(std::clamp(p.b[i] * 0.5 + 0.25, 0.0, 1.0))});
    }
    const Image rgb1(20, 24, 3, c), rgb2(20, 24, 3, d);
    CHECK(ssim(rgb1, rgb2) == doctest::Approx(0.8815799658163178).epsilon(1e-6));
    MetricOptions luma;
    luma.luma_only = true;
    CHECK(ssim(rgb1, rgb2, luma) == doctest::Approx(0.9923629544897901).epsilon(1e-6));
    CHECK(psnr(rgb1, rgb2, luma) == doctest::Approx(36.577678346703216).epsilon(1e-6));
}

TEST_CASE("image validation") {
    CHECK_THROWS_AS(Image(2, 2, 1, std::vector<float>(3, 0.0f)), ArgumentError);
    CHECK_THROWS_AS(Image(2, 2, 2, std::vector<float>(8, 0.0f)), ArgumentError);
    CHECK_THROWS_AS(Image(1, 1, 1, {1.5f}), ArgumentError);
    CHECK_THROWS_AS(Image(1, 1, 1, {NAN}), ArgumentError);
    CHECK_THROWS_AS(psnr(constant(2, 2, 0), constant(2, 3, 0)), ArgumentError);
    CHECK_THROWS_AS(ssim(constant(10, 30, 0), constant(10, 30, 0)), ArgumentError);
    CHECK_THROWS_AS(Image::from_tensor(Tensor({4}, {0, 0, 0, 0})), ArgumentError);
}

TEST_CASE("tensor_as_image") {
    const Tensor t({2, 2}, {-1, 0, 1, 3});
    const Image img = tensor_as_image(t, -1, 1);
    CHECK(img.at(0, 0, 0) == 0.0f);
    CHECK(img.at(0, 1, 0) == 0.5f);
    CHECK(img.at(1, 0, 0) == 1.0f);
    CHECK(img.at(1, 1, 0) == 1.0f);
    CHECK_THROWS_AS(tensor_as_image(t, 1, 1), ArgumentError);
    const Image hwc = Image::from_tensor(Tensor({2, 1, 3}, {0, 0.1f, 0.2f, 0.3f, 0.4f, 0.5f}));
    CHECK(hwc.channels == 3);
    CHECK(hwc.at(1, 0, 2) == 0.5f);
}

}  // TEST_SUITE
