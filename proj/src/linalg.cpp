#include "compsrt/linalg.hpp"

#include <cmath>
#include <string>

#include "compsrt/errors.hpp"

namespace csrt {

namespace {

void require_2d(const Tensor& t, const char* who) {
    if (t.ndim() != 2) throw ArgumentError(std::string(who) + ": expected a 2-D tensor");
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* who) {
    if (a.shape() != b.shape()) throw ArgumentError(std::string(who) + ": shape mismatch");
}

}  // namespace

Tensor matmul_abt(const Tensor& a, const Tensor& b) {
    require_2d(a, "matmul_abt");
    require_2d(b, "matmul_abt");
    const std::size_t r = a.shape()[0], d = a.shape()[1], m = b.shape()[0];
    if (b.shape()[1] != d) throw ArgumentError("matmul_abt: inner dimensions differ");
    std::vector<float> out(r * m);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < d; ++k) acc += static_cast<double>(a[i * d + k]) * b[j * d + k];
            out[i * m + j] = static_cast<float>(acc);
        }
    return Tensor({r, m}, std::move(out));
}

Tensor matmul_ab(const Tensor& a, const Tensor& b) {
    require_2d(a, "matmul_ab");
    require_2d(b, "matmul_ab");
    const std::size_t r = a.shape()[0], d = a.shape()[1], m = b.shape()[1];
    if (b.shape()[0] != d) throw ArgumentError("matmul_ab: inner dimensions differ");
    std::vector<float> out(r * m);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < d; ++k) acc += static_cast<double>(a[i * d + k]) * b[k * m + j];
            out[i * m + j] = static_cast<float>(acc);
        }
    return Tensor({r, m}, std::move(out));
}

Tensor transpose(const Tensor& a) {
    require_2d(a, "transpose");
    const std::size_t r = a.shape()[0], c = a.shape()[1];
    std::vector<float> out(r * c);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) out[j * r + i] = a[i * c + j];
    return Tensor({c, r}, std::move(out));
}

Tensor add(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "add");
    std::vector<float> out(a.numel());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] + b[i];
    return Tensor(a.shape(), std::move(out));
}

Tensor scale(const Tensor& a, double s) {
    std::vector<float> out(a.numel());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<float>(a[i] * s);
    return Tensor(a.shape(), std::move(out));
}

double mse(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "mse");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.numel(); ++i) {
        const double e = static_cast<double>(a[i]) - b[i];
        acc += e * e;
    }
    return acc / static_cast<double>(a.numel());
}

double frobenius_norm(const Tensor& a) {
    double acc = 0.0;
    for (float v : a.values()) acc += static_cast<double>(v) * v;
    return std::sqrt(acc);
}

}  // namespace csrt
