#pragma once

#include "compsrt/tensor.hpp"

namespace csrt {

/// a [r, d] times b^T for b [m, d] -> [r, m]. Accumulates in double.
Tensor matmul_abt(const Tensor& a, const Tensor& b);
/// a [r, d] times b [d, m] -> [r, m].
Tensor matmul_ab(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

Tensor add(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);

double mse(const Tensor& a, const Tensor& b);
double frobenius_norm(const Tensor& a);

}  // namespace csrt
