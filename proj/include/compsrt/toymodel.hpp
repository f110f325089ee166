#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "compsrt/finetune.hpp"
#include "compsrt/packed.hpp"
#include "compsrt/tensor.hpp"

namespace csrt {

// Single-head attention block + 2-layer GELU MLP with residuals, no
// normalisation or windowing:
//   q = x Wq^T, k = x Wk^T, v = x Wv^T
//   a = softmax(q k^T / sqrt(dim)), x1 = x + (a v) Wproj^T
//   out = x1 + gelu(x1 W1^T) W2^T

enum class ToySite : std::size_t { kQ, kK, kV, kProj, kMlp1, kMlp2, kScores, kContext };
inline constexpr std::size_t kToySiteCount = 8;
inline constexpr std::size_t kToyWeightCount = 6;

std::string to_string(ToySite site);

/// Quantizer placement for every matmul in the layer. Sites 0..5 are the
/// linear layers (lhs = input activation, rhs = weight); kScores quantizes
/// q and k, kContext the softmax probabilities and v.
struct QuantPlan {
    std::array<QuantizedMatmul, kToySiteCount> sites;
    /// Fake-quantized weights in the original domain, rebuilt by refresh_weight_cache().
    std::array<std::optional<Tensor>, kToyWeightCount> weight_cache;
};

struct ToyLayer {
    std::size_t dim = 15;
    std::size_t tokens = 16;
    std::size_t hidden = 30;
    Tensor w_q, w_k, w_v, w_proj;  // [dim, dim]
    Tensor w_mlp1;                 // [hidden, dim]
    Tensor w_mlp2;                 // [dim, hidden]
    std::optional<QuantPlan> plan;

    const Tensor& weight(std::size_t i) const;
};

struct ToyConfig {
    std::size_t dim = 15;
    std::size_t tokens = 16;
    std::size_t hidden = 30;
    int df = 3;
};

/// Weights drawn from Student-t(df) / sqrt(dim).
ToyLayer make_toy_layer(const ToyConfig& cfg, Seed seed);
/// [tokens, dim] Student-t(df) activations.
Tensor make_toy_input(const ToyConfig& cfg, Seed seed);

/// Operands seen by each matmul during a full-precision forward pass.
struct ToyTrace {
    std::array<Tensor, kToySiteCount> lhs;
    std::array<Tensor, kToySiteCount> rhs;
    Tensor probs;
    Tensor output;
};

Tensor softmax_rows(const Tensor& scores);
Tensor gelu(const Tensor& x);

Tensor forward_fp(const ToyLayer& layer, const Tensor& x);
ToyTrace trace_fp(const ToyLayer& layer, const Tensor& x);
/// Throws StateError when no plan is attached.
Tensor forward_quantized(const ToyLayer& layer, const Tensor& x);
/// Plan's Hadamard wraps with the quantizer replaced by the identity.
Tensor forward_hadamard_only(const ToyLayer& layer, const Tensor& x);

enum class HadamardMode { kNone, kWeights, kWeightsActivations };
enum class TuneMode { kNone, kAlphaBeta, kBounds, kAll };

HadamardMode parse_hadamard_mode(const std::string& s);
TuneMode parse_tune_mode(const std::string& s);
std::string to_string(HadamardMode m);
std::string to_string(TuneMode m);

struct PlanOptions {
    int bits = 4;
    HadamardMode hadamard = HadamardMode::kWeightsActivations;
    bool quantize_weights = true;
    bool quantize_activations = true;
    double prune_fraction = 0.0;
    BoundSearchOptions search{};
};

/// Searches bounds for every enabled quantizer. Weights: transform, then
/// prune the transformed weight, then search over the kept entries.
/// Activations: search over the site-domain values of all calibration inputs.
QuantPlan build_plan(const ToyLayer& layer, const std::vector<Tensor>& calib_inputs, const PlanOptions& opts);

void refresh_weight_cache(const ToyLayer& layer, QuantPlan& plan);

/// Jointly fine-tunes every enabled quantizer of `plan` to minimise the
/// mean squared error between the quantized and full-precision layer
/// outputs on `calib_inputs`. `plan` receives the best iterate; the
/// returned `best` lists enabled quantizers in site order, lhs before rhs.
OptimizeResult finetune_plan(const ToyLayer& layer, QuantPlan& plan, const std::vector<Tensor>& calib_inputs,
                             const FinetuneConfig& cfg);

/// Output MSE of the attached plan against the full-precision layer.
double toy_calibration_loss(const ToyLayer& layer, const std::vector<Tensor>& calib_inputs);

struct ToyGradients {
    double loss = 0.0;
    std::array<MatmulGrads, kToySiteCount> sites;  // disabled quantizers report zeros
};
/// STE gradients of toy_calibration_loss for every site.
ToyGradients toy_calibration_gradients(const ToyLayer& layer, const std::vector<Tensor>& calib_inputs);

/// Storage artifacts for the six weights under `plan`.
std::vector<PackedTensor> pack_plan_weights(const ToyLayer& layer, const QuantPlan& plan);
/// Aggregate bits per parameter over a set of packed tensors.
double aggregate_bits_per_parameter(const std::vector<PackedTensor>& packed);

struct PipelineOptions {
    PlanOptions plan{};
    TuneMode tune = TuneMode::kNone;
    FinetuneConfig finetune{};
};

struct PipelineReport {
    double output_mse = 0.0;
    double output_psnr = 0.0;  // outputs mapped to [0,1] by the FP output range
    double bits_per_parameter = 0.0;
    std::size_t weight_bytes = 0;
};

/// Hadamard -> prune (weights) -> search -> optional fine-tune, then
/// forward on every evaluation input. MSE and PSNR are taken over all
/// evaluation outputs together.
PipelineReport evaluate_pipeline(const ToyLayer& layer, const std::vector<Tensor>& eval_inputs,
                                 const std::vector<Tensor>& calib_inputs, const PipelineOptions& opts);

/// Seeded layer with disjoint calibration and evaluation inputs.
struct ToyProblem {
    ToyLayer layer;
    std::vector<Tensor> calib;
    std::vector<Tensor> eval;
};
inline constexpr std::size_t kToyCalibInputs = 16;
inline constexpr std::size_t kToyEvalInputs = 16;
ToyProblem make_toy_problem(const ToyConfig& cfg, Seed seed, std::size_t n_calib = kToyCalibInputs,
                            std::size_t n_eval = kToyEvalInputs);

}  // namespace csrt
