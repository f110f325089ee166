#pragma once

// Finite-difference oracle for straight-through gradients. The rounding
// residual of every element is frozen at the base point, which turns the
// quantizer into a piecewise smooth function of (l, u, alpha, beta, x);
// central differences of that surrogate are the STE gradient wherever no
// element sits on a clip boundary.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "compsrt/quant.hpp"

namespace oracle {

struct Frozen {
    std::vector<double> residual;
    std::vector<bool> live;  // rounded code inside [0, L]
    std::vector<double> held;
};

inline double code_input(double x, const csrt::QuantParams& p) {
    const double k = p.levels() / (p.upper - p.lower) + p.alpha;
    const double vc = std::clamp(x, p.lower, p.upper);
    return k * (vc - (p.lower + p.beta));
}

inline Frozen freeze(std::span<const double> x, const csrt::QuantParams& p) {
    Frozen f;
    const double levels = p.levels();
    for (double v : x) {
        const double t = code_input(v, p);
        const double r = std::round(t);
        f.residual.push_back(r - t);
        f.live.push_back(r >= 0.0 && r <= levels);
        f.held.push_back(std::clamp(r, 0.0, levels));
    }
    return f;
}

inline double surrogate(double x, const csrt::QuantParams& p, const Frozen& f, std::size_t i) {
    const double q = f.live[i] ? code_input(x, p) + f.residual[i] : f.held[i];
    return ((p.upper - p.lower) / p.levels() + p.alpha) * q + (p.lower + p.beta);
}

/// Smallest distance from any element to either clip bound, in units of the range.
inline double clip_margin(std::span<const double> x, const csrt::QuantParams& p) {
    double m = INFINITY;
    for (double v : x) m = std::min({m, std::abs(v - p.lower), std::abs(v - p.upper)});
    return m / (p.upper - p.lower);
}

enum class Param { kLower, kUpper, kAlpha, kBeta };

inline double& field(csrt::QuantParams& p, Param which) {
    switch (which) {
        case Param::kLower: return p.lower;
        case Param::kUpper: return p.upper;
        case Param::kAlpha: return p.alpha;
        default: return p.beta;
    }
}

/// Central difference of f along one field of p.
inline double central(const std::function<double(const csrt::QuantParams&)>& f, csrt::QuantParams p, Param which,
                      double h = 1e-6) {
    const double base = field(p, which);
    field(p, which) = base + h;
    const double hi = f(p);
    field(p, which) = base - h;
    const double lo = f(p);
    return (hi - lo) / (2.0 * h);
}

/// Relative agreement with an absolute floor for gradients that vanish.
inline bool close(double analytic, double fd, double rel, double floor) {
    return std::abs(analytic - fd) <= rel * std::max(std::abs(analytic), std::abs(fd)) + floor;
}

}  // namespace oracle
