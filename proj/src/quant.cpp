#include "compsrt/quant.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "compsrt/errors.hpp"

namespace csrt {

void QuantParams::validate() const {
    if (bits < 2 || bits > 8) throw ArgumentError("QuantParams: bits must be in [2,8], got " + std::to_string(bits));
    if (!std::isfinite(lower) || !std::isfinite(upper) || !std::isfinite(alpha) || !std::isfinite(beta))
        throw ArgumentError("QuantParams: non-finite field");
    if (!(upper > lower)) throw ArgumentError("QuantParams: upper must exceed lower");
    if (!(effective_scale() > 0.0)) throw ArgumentError("QuantParams: effective scale S + alpha must be positive");
    if (!(code_multiplier() > 0.0)) throw ArgumentError("QuantParams: code multiplier must be positive");
}

Tensor clip(const Tensor& x, double lower, double upper) {
    if (!(upper > lower)) throw ArgumentError("clip: upper must exceed lower");
    std::vector<float> out(x.numel());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = static_cast<float>(std::clamp(static_cast<double>(x[i]), lower, upper));
    return Tensor(x.shape(), std::move(out));
}

Code quantize_value(float x, const QuantParams& p) {
    if (!std::isfinite(x)) throw ValidationError("quantize: non-finite input");
    const double clipped = std::clamp(static_cast<double>(x), p.lower, p.upper);
    const double code = std::round(p.code_multiplier() * (clipped - p.effective_zero()));
    return static_cast<Code>(std::clamp(code, 0.0, static_cast<double>(p.levels())));
}

float dequantize_value(Code code, const QuantParams& p) {
    if (code > p.levels())
        throw ValidationError("dequantize: code " + std::to_string(code) + " exceeds " + std::to_string(p.levels()));
    return static_cast<float>(p.effective_scale() * code + p.effective_zero());
}

std::vector<Code> quantize(const Tensor& x, const QuantParams& p) {
    p.validate();
    std::vector<Code> codes(x.numel());
    for (std::size_t i = 0; i < codes.size(); ++i) codes[i] = quantize_value(x[i], p);
    return codes;
}

Tensor dequantize(std::span<const Code> codes, const QuantParams& p, Shape shape) {
    p.validate();
    if (shape.empty()) shape = {codes.size()};
    std::vector<float> out(codes.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = dequantize_value(codes[i], p);
    return Tensor(std::move(shape), std::move(out));
}

Tensor fake_quantize(const Tensor& x, const QuantParams& p) {
    return dequantize(quantize(x, p), p, x.shape());
}

double fake_quant_mse(std::span<const float> values, const QuantParams& p) {
    if (values.empty()) return 0.0;
    double acc = 0.0;
    for (float v : values) {
        const double e = static_cast<double>(dequantize_value(quantize_value(v, p), p)) - v;
        acc += e * e;
    }
    return acc / static_cast<double>(values.size());
}

QuantParams minmax_params(std::span<const float> values, int bits) {
    if (values.empty()) throw ArgumentError("minmax_params: empty input");
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    QuantParams p;
    p.bits = bits;
    p.lower = *lo;
    p.upper = *hi;
    if (*hi == *lo) {
        p.lower = *lo - kDegenerateHalfWidth;
        p.upper = *hi + kDegenerateHalfWidth;
    }
    p.validate();
    return p;
}

QuantParams search_bounds(const Tensor& x, int bits, const BoundSearchOptions& opts) {
    return search_bounds(x.values(), bits, opts);
}

QuantParams search_bounds(std::span<const float> values, int bits, const BoundSearchOptions& opts) {
    if (opts.steps < 1) throw ArgumentError("search_bounds: steps must be >= 1");
    if (!(opts.shrink_limit > 0.0 && opts.shrink_limit < 0.5))
        throw ArgumentError("search_bounds: shrink_limit must be in (0, 0.5)");
    const QuantParams minmax = minmax_params(values, bits);
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    if (*lo_it == *hi_it) return minmax;

    std::vector<float> sample;
    std::span<const float> eval = values;
    if (values.size() > opts.max_sample) {
        Tensor flat({values.size()}, std::vector<float>(values.begin(), values.end()));
        sample = sample_elements(flat, opts.max_sample, opts.seed);
        eval = sample;
    }

    const double lo = *lo_it;
    const double hi = *hi_it;
    const double coarse = (hi - lo) * opts.shrink_limit / static_cast<double>(opts.steps);
    const double lower_cap = lo + (hi - lo) * opts.shrink_limit;
    const double upper_floor = hi - (hi - lo) * opts.shrink_limit;

    QuantParams best = minmax;
    double best_err = fake_quant_mse(eval, best);

    // Scan one side with the other held fixed; candidate offsets are
    // centre + k * step for k in [k_begin, k_end], clamped to the side's window.
    auto scan = [&](bool lower_side, double centre, double step, long k_begin, long k_end) {
        for (long k = k_begin; k <= k_end; ++k) {
            QuantParams cand = best;
            if (lower_side) {
                const double l = centre + static_cast<double>(k) * step;
                if (l < lo || l > lower_cap) continue;
                cand.lower = l;
            } else {
                const double u = centre - static_cast<double>(k) * step;
                if (u > hi || u < upper_floor) continue;
                cand.upper = u;
            }
            const double err = fake_quant_mse(eval, cand);
            if (err < best_err) {
                best_err = err;
                best = cand;
            }
        }
    };

    const long steps = static_cast<long>(opts.steps);
    scan(true, lo, coarse, 0, steps);
    scan(false, hi, coarse, 0, steps);
    const double fine = coarse / static_cast<double>(opts.steps);
    scan(true, best.lower, fine, -steps, steps);
    scan(false, best.upper, fine, -steps, steps);

    if (!sample.empty() && fake_quant_mse(values, best) > fake_quant_mse(values, minmax)) return minmax;
    return best;
}

}  // namespace csrt
