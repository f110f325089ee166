#pragma once

#include <algorithm>
#include <cmath>

namespace oracle {

// Textbook affine quantizer written from S = (u - l) / (2^b - 1).
struct Plain {
    double l, u, s;
    int levels;
    Plain(double lo, double hi, int bits) : l(lo), u(hi), s((hi - lo) / ((1 << bits) - 1)), levels((1 << bits) - 1) {}
    int code(float x) const {
        const double c = std::min(std::max(static_cast<double>(x), l), u);
        const double q = std::round((c - l) / s);
        return static_cast<int>(std::min(std::max(q, 0.0), static_cast<double>(levels)));
    }
    float deq(int c) const { return static_cast<float>(s * c + l); }
};

}  // namespace oracle
