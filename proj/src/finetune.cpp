#include "compsrt/finetune.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "compsrt/errors.hpp"
#include "compsrt/hadamard.hpp"
#include "compsrt/linalg.hpp"

namespace csrt {

Tensor site_domain(const Tensor& x, bool hadamard) {
    return hadamard ? hadamard_transform(x).tensor : x;
}

Tensor site_forward_from_domain(const Tensor& domain, const Shape& original, const QuantSite& site) {
    if (!site.enabled) return site.hadamard ? hadamard_inverse(domain, PadInfo{original.back(), domain.last_dim()}) : domain;
    if (site.keep && site.keep->size() != domain.numel())
        throw ArgumentError("site_forward: prune mask does not match tensor");
    site.params.validate();
    std::vector<float> q(domain.numel());
    for (std::size_t i = 0; i < q.size(); ++i) {
        if (site.keep && !(*site.keep)[i]) {
            q[i] = 0.0f;
            continue;
        }
        q[i] = dequantize_value(quantize_value(domain[i], site.params), site.params);
    }
    Tensor quantized(domain.shape(), std::move(q));
    if (!site.hadamard) return quantized;
    return hadamard_inverse(quantized, PadInfo{original.back(), domain.last_dim()});
}

Tensor site_forward(const Tensor& x, const QuantSite& site) {
    if (!site.enabled) return x;
    return site_forward_from_domain(site_domain(x, site.hadamard), x.shape(), site);
}

ParamGrads ste_param_grads(std::span<const float> x, std::span<const double> upstream, const QuantParams& p,
                           const std::vector<bool>* keep) {
    if (x.size() != upstream.size()) throw ArgumentError("ste_param_grads: upstream size mismatch");
    const double levels = p.levels();
    const double range = p.upper - p.lower;
    const double k = p.code_multiplier();
    const double s_eff = p.effective_scale();
    const double z = p.effective_zero();
    const double dk_dl = levels / (range * range);

    ParamGrads g;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (keep && !(*keep)[i]) continue;
        const double up = upstream[i];
        if (up == 0.0) continue;
        const double xi = x[i];
        const double vc = std::clamp(xi, p.lower, p.upper);
        const double t = k * (vc - z);
        const double r = std::round(t);
        const double q = std::clamp(r, 0.0, levels);
        const double gate = (r >= 0.0 && r <= levels) ? s_eff : 0.0;
        const double below = xi < p.lower ? 1.0 : 0.0;
        const double above = xi > p.upper ? 1.0 : 0.0;

        g.alpha += up * (q + gate * (vc - z));
        g.beta += up * (1.0 - gate * k);
        g.lower += up * (1.0 - q / levels + gate * (dk_dl * (vc - z) + k * below - k));
        g.upper += up * (q / levels + gate * (-dk_dl * (vc - z) + k * above));
    }
    return g;
}

SiteBackward site_backward(const Tensor& domain, const Shape& original, std::span<const double> out_grad,
                           const QuantSite& site) {
    std::size_t numel = 1;
    for (auto d : original) numel *= d;
    if (out_grad.size() != numel) throw ArgumentError("site_backward: gradient size mismatch");
    SiteBackward out;
    if (!site.enabled) {
        out.input_grad.assign(out_grad.begin(), out_grad.end());
        return out;
    }
    const std::size_t dim = original.back();
    const std::size_t rows = numel / dim;
    const std::size_t n = domain.last_dim();
    if (domain.numel() != rows * n) throw ArgumentError("site_backward: domain shape mismatch");

    std::vector<double> up(out_grad.begin(), out_grad.end());
    if (site.hadamard) {
        up.assign(rows * n, 0.0);
        for (std::size_t r = 0; r < rows; ++r) {
            std::span<double> row(up.data() + r * n, n);
            std::copy_n(out_grad.begin() + static_cast<std::ptrdiff_t>(r * dim), dim, row.begin());
            fwht_normalized(row);
        }
    }
    const std::vector<bool>* keep = site.keep ? &*site.keep : nullptr;
    out.params = ste_param_grads(domain.values(), up, site.params, keep);

    const QuantParams& p = site.params;
    const double k = p.code_multiplier();
    const double slope = p.effective_scale() * k;
    const double z = p.effective_zero();
    for (std::size_t i = 0; i < up.size(); ++i) {
        const double x = domain[i];
        const double r = std::round(k * (std::clamp(x, p.lower, p.upper) - z));
        const bool pass = (!keep || (*keep)[i]) && x >= p.lower && x <= p.upper && r >= 0.0 && r <= p.levels();
        up[i] = pass ? up[i] * slope : 0.0;
    }
    if (!site.hadamard) {
        out.input_grad = std::move(up);
        return out;
    }
    out.input_grad.resize(numel);
    for (std::size_t r = 0; r < rows; ++r) {
        std::span<double> row(up.data() + r * n, n);
        fwht_normalized(row);
        std::copy_n(row.begin(), dim, out.input_grad.begin() + static_cast<std::ptrdiff_t>(r * dim));
    }
    return out;
}

double quant_loss(const Tensor& x, const QuantParams& p) { return fake_quant_mse(x.values(), p); }

ParamGrads ste_gradients(const Tensor& x, const QuantParams& p) {
    p.validate();
    const Tensor y = fake_quantize(x, p);
    std::vector<double> upstream(x.numel());
    const double n = static_cast<double>(x.numel());
    for (std::size_t i = 0; i < upstream.size(); ++i)
        upstream[i] = 2.0 * (static_cast<double>(y[i]) - x[i]) / n;
    return ste_param_grads(x.values(), upstream, p);
}

void FinetuneConfig::validate() const {
    if (!(learning_rate > 0.0)) throw ArgumentError("FinetuneConfig: learning_rate must be positive");
    if (!(beta1 > 0.0 && beta1 < 1.0 && beta2 > 0.0 && beta2 < 1.0))
        throw ArgumentError("FinetuneConfig: Adam betas must be in (0,1)");
    if (!(grad_clip > 0.0)) throw ArgumentError("FinetuneConfig: grad_clip must be positive");
    if (max_iters < 1) throw ArgumentError("FinetuneConfig: max_iters must be >= 1");
}

void project_params(QuantParams& p) {
    p.upper = std::max(p.upper, p.lower + kMinBoundGap);
    const double range = p.upper - p.lower;
    const double floor_alpha = std::max(kMinScale - range / p.levels(), kMinScale - p.levels() / range);
    p.alpha = std::max(p.alpha, floor_alpha);
}

Adam::Adam(std::size_t n, double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps), m_(n, 0.0), v_(n, 0.0) {}

void Adam::step(std::span<double> params, std::span<const double> grads) {
    ++t_;
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grads[i];
        v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grads[i] * grads[i];
        params[i] -= lr_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps_);
    }
}

namespace {

const Tensor& rhs_of(const QuantizedMatmul& layer, const CalibSet& calib, std::size_t i) {
    return layer.weight ? *layer.weight : calib.rhs_inputs[i];
}

Tensor fp_product(MatmulForm form, const Tensor& a, const Tensor& b) {
    return form == MatmulForm::kTransposedRhs ? matmul_abt(a, b) : matmul_ab(a, b);
}

void check_calib(const QuantizedMatmul& layer, const CalibSet& calib) {
    if (calib.inputs.empty()) throw ArgumentError("calibration set is empty");
    if (calib.reference_outputs.size() != calib.inputs.size())
        throw ArgumentError("calibration inputs and reference outputs differ in length");
    if (!layer.weight && calib.rhs_inputs.size() != calib.inputs.size())
        throw ArgumentError("calibration set needs one rhs operand per input");
}

// Gradient of the loss w.r.t. a site-domain tensor, given the gradient
// w.r.t. the reconstructed operand ([rows, dim] row-major).
std::vector<double> to_domain(std::vector<double> grad, std::size_t rows, std::size_t dim, bool hadamard) {
    if (!hadamard) return grad;
    const std::size_t n = next_pow2(dim);
    std::vector<double> out(rows * n, 0.0);
    for (std::size_t r = 0; r < rows; ++r) {
        std::span<double> row(out.data() + r * n, n);
        std::copy_n(grad.begin() + static_cast<std::ptrdiff_t>(r * dim), dim, row.begin());
        fwht_normalized(row);
    }
    return out;
}

// Cached site-domain operands so each iteration only re-quantizes.
struct PreparedCalib {
    std::vector<Tensor> lhs_domain;
    std::vector<Tensor> rhs_domain;  // one entry when the rhs is a weight
};

PreparedCalib prepare(const QuantizedMatmul& layer, const CalibSet& calib) {
    PreparedCalib prep;
    for (const auto& x : calib.inputs) prep.lhs_domain.push_back(site_domain(x, layer.lhs.enabled && layer.lhs.hadamard));
    if (layer.weight) {
        prep.rhs_domain.push_back(site_domain(*layer.weight, layer.rhs.enabled && layer.rhs.hadamard));
    } else {
        for (const auto& x : calib.rhs_inputs)
            prep.rhs_domain.push_back(site_domain(x, layer.rhs.enabled && layer.rhs.hadamard));
    }
    return prep;
}

Tensor operand(const Tensor& domain, const Tensor& original, const QuantSite& site) {
    if (!site.enabled) return original;
    return site_forward_from_domain(domain, original.shape(), site);
}

MatmulGrads evaluate(const QuantizedMatmul& layer, const CalibSet& calib, const PreparedCalib& prep, bool want_grads) {
    MatmulGrads out;
    double total = 0.0;
    for (const auto& ref : calib.reference_outputs) total += static_cast<double>(ref.numel());

    std::vector<double> rhs_upstream;
    std::optional<Tensor> weight_hat;
    if (layer.weight) weight_hat = operand(prep.rhs_domain[0], *layer.weight, layer.rhs);

    for (std::size_t s = 0; s < calib.inputs.size(); ++s) {
        const Tensor& a = calib.inputs[s];
        const Tensor& b = rhs_of(layer, calib, s);
        const Tensor a_hat = operand(prep.lhs_domain[s], a, layer.lhs);
        const Tensor b_hat = weight_hat ? *weight_hat : operand(prep.rhs_domain[s], b, layer.rhs);
        const Tensor y = fp_product(layer.form, a_hat, b_hat);
        const Tensor& ref = calib.reference_outputs[s];
        if (y.shape() != ref.shape()) throw ArgumentError("calibration reference output has the wrong shape");

        const std::size_t r = y.shape()[0], m = y.shape()[1], d = a.shape()[1];
        std::vector<double> dy(y.numel());
        for (std::size_t i = 0; i < dy.size(); ++i) {
            const double e = static_cast<double>(y[i]) - ref[i];
            out.loss += e * e / total;
            dy[i] = 2.0 * e / total;
        }
        if (!want_grads) continue;

        const bool abt = layer.form == MatmulForm::kTransposedRhs;
        if (layer.lhs.enabled) {
            std::vector<double> da(r * d, 0.0);
            for (std::size_t i = 0; i < r; ++i)
                for (std::size_t j = 0; j < m; ++j) {
                    const double g = dy[i * m + j];
                    for (std::size_t k = 0; k < d; ++k) da[i * d + k] += g * (abt ? b_hat[j * d + k] : b_hat[k * m + j]);
                }
            const auto up = to_domain(std::move(da), r, d, layer.lhs.hadamard);
            out.lhs += ste_param_grads(prep.lhs_domain[s].values(), up, layer.lhs.params,
                                       layer.lhs.keep ? &*layer.lhs.keep : nullptr);
        }
        if (layer.rhs.enabled) {
            const std::size_t b_rows = b_hat.shape()[0], b_cols = b_hat.shape()[1];
            std::vector<double> db(b_rows * b_cols, 0.0);
            for (std::size_t i = 0; i < r; ++i)
                for (std::size_t j = 0; j < m; ++j) {
                    const double g = dy[i * m + j];
                    for (std::size_t k = 0; k < d; ++k) {
                        if (abt)
                            db[j * d + k] += g * a_hat[i * d + k];
                        else
                            db[k * m + j] += g * a_hat[i * d + k];
                    }
                }
            auto up = to_domain(std::move(db), b_rows, b_cols, layer.rhs.hadamard);
            if (layer.weight) {
                if (rhs_upstream.empty()) rhs_upstream.assign(up.size(), 0.0);
                for (std::size_t i = 0; i < up.size(); ++i) rhs_upstream[i] += up[i];
            } else {
                out.rhs += ste_param_grads(prep.rhs_domain[s].values(), up, layer.rhs.params,
                                           layer.rhs.keep ? &*layer.rhs.keep : nullptr);
            }
        }
    }
    if (want_grads && layer.weight && layer.rhs.enabled)
        out.rhs = ste_param_grads(prep.rhs_domain[0].values(), rhs_upstream, layer.rhs.params,
                                  layer.rhs.keep ? &*layer.rhs.keep : nullptr);
    return out;
}

}  // namespace

CalibSet make_calib_set(const QuantizedMatmul& layer, std::vector<Tensor> inputs, std::vector<Tensor> rhs_inputs) {
    CalibSet calib{std::move(inputs), std::move(rhs_inputs), {}};
    if (calib.inputs.empty()) throw ArgumentError("calibration set is empty");
    if (!layer.weight && calib.rhs_inputs.size() != calib.inputs.size())
        throw ArgumentError("calibration set needs one rhs operand per input");
    for (std::size_t i = 0; i < calib.inputs.size(); ++i)
        calib.reference_outputs.push_back(fp_product(layer.form, calib.inputs[i], rhs_of(layer, calib, i)));
    return calib;
}

double calibration_loss(const QuantizedMatmul& layer, const CalibSet& calib) {
    check_calib(layer, calib);
    return evaluate(layer, calib, prepare(layer, calib), false).loss;
}

MatmulGrads calibration_gradients(const QuantizedMatmul& layer, const CalibSet& calib) {
    check_calib(layer, calib);
    return evaluate(layer, calib, prepare(layer, calib), true);
}

OptimizeResult optimize_quant_params(std::vector<QuantParams> start, const LossGradFn& loss_grad,
                                     const FinetuneConfig& cfg) {
    cfg.validate();
    for (const auto& p : start) p.validate();
    const std::size_t n = start.size();
    const bool any_tunable = n > 0 && (cfg.tune_bounds || cfg.tune_alpha_beta);

    OptimizeResult result;
    result.best = start;
    result.best_loss = std::numeric_limits<double>::infinity();

    std::vector<QuantParams> current = std::move(start);
    std::vector<double> theta(4 * n);
    auto load = [&] {
        for (std::size_t i = 0; i < n; ++i) {
            theta[4 * i] = current[i].lower;
            theta[4 * i + 1] = current[i].upper;
            theta[4 * i + 2] = current[i].alpha;
            theta[4 * i + 3] = current[i].beta;
        }
    };
    load();
    Adam adam(theta.size(), cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.adam_eps);
    std::vector<ParamGrads> grads(n);
    std::vector<double> flat(4 * n);

    for (std::size_t iter = 0; iter <= cfg.max_iters; ++iter) {
        const bool last = iter == cfg.max_iters || !any_tunable;
        std::fill(grads.begin(), grads.end(), ParamGrads{});
        const double loss = loss_grad(current, last ? std::span<ParamGrads>{} : std::span<ParamGrads>(grads));
        result.loss_history.push_back(loss);
        if (iter == 0) result.initial_loss = loss;
        if (std::isfinite(loss) && loss < result.best_loss) {
            result.best_loss = loss;
            result.best_iter = iter;
            result.best = current;
        }
        if (last) break;

        bool finite = std::isfinite(loss);
        for (std::size_t i = 0; i < n; ++i) {
            const auto& g = grads[i];
            flat[4 * i] = cfg.tune_bounds ? g.lower : 0.0;
            flat[4 * i + 1] = cfg.tune_bounds ? g.upper : 0.0;
            flat[4 * i + 2] = cfg.tune_alpha_beta ? g.alpha : 0.0;
            flat[4 * i + 3] = cfg.tune_alpha_beta ? g.beta : 0.0;
        }
        for (double& g : flat) {
            finite = finite && std::isfinite(g);
            g = std::clamp(g, -cfg.grad_clip, cfg.grad_clip);
        }
        if (!finite) {
            result.stopped_non_finite = true;
            break;
        }
        adam.step(theta, flat);
        for (std::size_t i = 0; i < n; ++i) {
            current[i].lower = theta[4 * i];
            current[i].upper = theta[4 * i + 1];
            current[i].alpha = theta[4 * i + 2];
            current[i].beta = theta[4 * i + 3];
            project_params(current[i]);
        }
        load();
    }
    return result;
}

FinetuneResult finetune_params(const QuantizedMatmul& layer, const CalibSet& calib, const FinetuneConfig& cfg) {
    cfg.validate();
    check_calib(layer, calib);
    const PreparedCalib prep = prepare(layer, calib);

    std::vector<QuantParams> start;
    if (layer.lhs.enabled) start.push_back(layer.lhs.params);
    if (layer.rhs.enabled) start.push_back(layer.rhs.params);

    QuantizedMatmul current = layer;
    auto assign = [&](std::span<const QuantParams> params) {
        std::size_t i = 0;
        if (current.lhs.enabled) current.lhs.params = params[i++];
        if (current.rhs.enabled) current.rhs.params = params[i++];
    };
    const LossGradFn loss_grad = [&](std::span<const QuantParams> params, std::span<ParamGrads> grads) {
        assign(params);
        const MatmulGrads g = evaluate(current, calib, prep, !grads.empty());
        if (!grads.empty()) {
            std::size_t i = 0;
            if (current.lhs.enabled) grads[i++] = g.lhs;
            if (current.rhs.enabled) grads[i++] = g.rhs;
        }
        return g.loss;
    };
    OptimizeResult run = optimize_quant_params(std::move(start), loss_grad, cfg);

    FinetuneResult result;
    result.lhs = layer.lhs.params;
    result.rhs = layer.rhs.params;
    std::size_t i = 0;
    if (layer.lhs.enabled) result.lhs = run.best[i++];
    if (layer.rhs.enabled) result.rhs = run.best[i++];
    result.loss_history = std::move(run.loss_history);
    result.initial_loss = run.initial_loss;
    result.best_loss = run.best_loss;
    result.best_iter = run.best_iter;
    result.stopped_non_finite = run.stopped_non_finite;
    return result;
}

}  // namespace csrt
