#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "compsrt/quant.hpp"
#include "compsrt/rng.hpp"
#include "compsrt/tensor.hpp"

namespace csrt {

/// One quantizer placement. When `hadamard` is set the tensor goes through
/// transform -> fake quantize -> inverse along its last dimension; `keep`
/// (transformed domain) marks pruned positions that stay exactly zero.
struct QuantSite {
    bool enabled = false;
    bool hadamard = false;
    QuantParams params;
    std::optional<std::vector<bool>> keep;
};

/// Domain the quantizer actually sees: the padded transform when
/// `hadamard`, the input otherwise.
Tensor site_domain(const Tensor& x, bool hadamard);
/// Fake-quantized tensor in the original domain; identity when disabled.
Tensor site_forward(const Tensor& x, const QuantSite& site);
/// Same, starting from a tensor already in the site domain.
Tensor site_forward_from_domain(const Tensor& domain, const Shape& original, const QuantSite& site);

struct ParamGrads {
    double lower = 0.0;
    double upper = 0.0;
    double alpha = 0.0;
    double beta = 0.0;

    ParamGrads& operator+=(const ParamGrads& o) {
        lower += o.lower;
        upper += o.upper;
        alpha += o.alpha;
        beta += o.beta;
        return *this;
    }
};

/// Sum over elements of upstream[i] * d fake_quantize(x)[i] / d theta, with
/// round() passed straight through (derivative 1 wherever the rounded code
/// is inside [0, levels], 0 where it is clamped) and clip() routing the
/// derivative of saturated elements to the bound they hit.
ParamGrads ste_param_grads(std::span<const float> x, std::span<const double> upstream, const QuantParams& p,
                           const std::vector<bool>* keep = nullptr);

/// mean((fake_quantize(x) - x)^2).
double quant_loss(const Tensor& x, const QuantParams& p);
/// Straight-through gradients of quant_loss with respect to (l, u, alpha, beta).
ParamGrads ste_gradients(const Tensor& x, const QuantParams& p);

/// Backward through one wrapped quantizer. `out_grad` is the loss gradient
/// w.r.t. the site output (original shape). Rounding is straight-through;
/// clipped and pruned elements pass no gradient to the input.
struct SiteBackward {
    std::vector<double> input_grad;  // original shape
    ParamGrads params;
};
SiteBackward site_backward(const Tensor& domain, const Shape& original, std::span<const double> out_grad,
                           const QuantSite& site);

struct FinetuneConfig {
    double learning_rate = 1e-2;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    double grad_clip = 1.0;
    std::size_t max_iters = 4000;
    bool tune_bounds = true;
    bool tune_alpha_beta = true;
    /// Carried for reproducible runs; the full-batch loop draws no randomness.
    Seed seed{};

    void validate() const;
};

/// Minimum gap kept between upper and lower during optimisation.
inline constexpr double kMinBoundGap = 1e-6;
/// Floor applied to S + alpha (and the code multiplier) by adjusting alpha.
inline constexpr double kMinScale = 1e-8;

/// Restores QuantParams invariants after an optimiser step.
void project_params(QuantParams& p);

/// Y = lhs * rhs^T (linear layers, Q K^T) or Y = lhs * rhs (attn * V).
enum class MatmulForm { kTransposedRhs, kPlain };

/// A matmul with a quantizer on each operand. A constant rhs (a weight)
/// lives in `weight`; otherwise each calibration sample carries its own rhs.
struct QuantizedMatmul {
    MatmulForm form = MatmulForm::kTransposedRhs;
    QuantSite lhs;
    QuantSite rhs;
    std::optional<Tensor> weight;
};

struct CalibSet {
    std::vector<Tensor> inputs;             // lhs operands
    std::vector<Tensor> rhs_inputs;         // empty when the rhs is a weight
    std::vector<Tensor> reference_outputs;  // full-precision products
};

/// Full-precision reference outputs for `inputs` through `layer`.
CalibSet make_calib_set(const QuantizedMatmul& layer, std::vector<Tensor> inputs, std::vector<Tensor> rhs_inputs = {});

/// Mean squared output error of the quantized matmul over the calibration set.
double calibration_loss(const QuantizedMatmul& layer, const CalibSet& calib);

struct MatmulGrads {
    double loss = 0.0;
    ParamGrads lhs;
    ParamGrads rhs;
};
MatmulGrads calibration_gradients(const QuantizedMatmul& layer, const CalibSet& calib);

struct FinetuneResult {
    QuantParams lhs;
    QuantParams rhs;
    std::vector<double> loss_history;  // loss at every evaluated iterate, including the last
    double initial_loss = 0.0;
    double best_loss = 0.0;
    std::size_t best_iter = 0;
    bool stopped_non_finite = false;
};

/// Adam over the selected parameters of the enabled sites, gradients
/// clipped elementwise to [-grad_clip, grad_clip], full batch. Stops early
/// on a non-finite gradient. Returns the best iterate by calibration loss.
FinetuneResult finetune_params(const QuantizedMatmul& layer, const CalibSet& calib, const FinetuneConfig& cfg);

/// Gradient callback for optimize_quant_params: returns the loss at the
/// current parameters and, when `grads` is non-empty, fills one ParamGrads
/// per parameter set.
using LossGradFn = std::function<double(std::span<const QuantParams> params, std::span<ParamGrads> grads)>;

struct OptimizeResult {
    std::vector<QuantParams> best;
    std::vector<double> loss_history;
    double initial_loss = 0.0;
    double best_loss = 0.0;
    std::size_t best_iter = 0;
    bool stopped_non_finite = false;
};

/// Shared fine-tuning loop: Adam on (l, u) and/or (alpha, beta) of every
/// parameter set, elementwise gradient clipping, projection after each
/// step, best-so-far selection, early exit on a non-finite gradient.
OptimizeResult optimize_quant_params(std::vector<QuantParams> start, const LossGradFn& loss_grad,
                                     const FinetuneConfig& cfg);

/// Minimal Adam with bias correction.
class Adam {
public:
    Adam(std::size_t n, double lr, double beta1, double beta2, double eps);
    void step(std::span<double> params, std::span<const double> grads);
    std::size_t steps() const { return t_; }

private:
    double lr_, beta1_, beta2_, eps_;
    std::vector<double> m_, v_;
    std::size_t t_ = 0;
};

}  // namespace csrt
