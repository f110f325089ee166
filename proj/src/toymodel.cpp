#include "compsrt/toymodel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <utility>

#include "compsrt/errors.hpp"
#include "compsrt/hadamard.hpp"
#include "compsrt/linalg.hpp"
#include "compsrt/metrics.hpp"
#include "compsrt/prune.hpp"

namespace csrt {

namespace {

constexpr std::size_t idx(ToySite s) { return static_cast<std::size_t>(s); }

bool is_linear(std::size_t s) { return s < kToyWeightCount; }

enum class Mode { kFullPrecision, kQuantized, kHadamardOnly };

Tensor hadamard_roundtrip(const Tensor& x) {
    auto t = hadamard_transform(x);
    return hadamard_inverse(t.tensor, t.pad);
}

Tensor wrap_operand(const Tensor& x, const QuantSite& site, Mode mode) {
    switch (mode) {
        case Mode::kFullPrecision:
            return x;
        case Mode::kQuantized:
            return site_forward(x, site);
        case Mode::kHadamardOnly:
            return site.enabled && site.hadamard ? hadamard_roundtrip(x) : x;
    }
    return x;
}

// Quantized-forward intermediates kept for the backward pass.
struct Tape {
    std::array<Tensor, kToySiteCount> a_dom, a_hat, b_dom, b_hat;
    Tensor probs, pre_gelu;
};

Tensor run(const ToyLayer& layer, const Tensor& x, Mode mode, ToyTrace* trace, Tape* tape = nullptr) {
    if (x.ndim() != 2 || x.shape()[0] != layer.tokens || x.shape()[1] != layer.dim)
        throw ArgumentError("toy layer: input must be [tokens, dim] = [" + std::to_string(layer.tokens) + ", " +
                            std::to_string(layer.dim) + "]");
    if (mode != Mode::kFullPrecision && !layer.plan) throw StateError("toy layer: no quantization plan attached");

    auto matmul = [&](ToySite site, const Tensor& a, const Tensor& b) {
        const std::size_t s = idx(site);
        if (trace) {
            trace->lhs[s] = a;
            trace->rhs[s] = b;
        }
        Tensor a_hat = a;
        Tensor b_hat = b;
        if (mode != Mode::kFullPrecision) {
            const QuantizedMatmul& m = layer.plan->sites[s];
            if (tape) {
                tape->a_dom[s] = site_domain(a, m.lhs.enabled && m.lhs.hadamard);
                a_hat = m.lhs.enabled ? site_forward_from_domain(tape->a_dom[s], a.shape(), m.lhs) : a;
            } else {
                a_hat = wrap_operand(a, m.lhs, mode);
            }
            if (is_linear(s) && mode == Mode::kQuantized) {
                if (!layer.plan->weight_cache[s]) throw StateError("toy layer: weight cache not built");
                b_hat = *layer.plan->weight_cache[s];
            } else if (tape) {
                tape->b_dom[s] = site_domain(b, m.rhs.enabled && m.rhs.hadamard);
                b_hat = m.rhs.enabled ? site_forward_from_domain(tape->b_dom[s], b.shape(), m.rhs) : b;
            } else {
                b_hat = wrap_operand(b, m.rhs, mode);
            }
        }
        if (tape) {
            tape->a_hat[s] = a_hat;
            tape->b_hat[s] = b_hat;
        }
        return site == ToySite::kContext ? matmul_ab(a_hat, b_hat) : matmul_abt(a_hat, b_hat);
    };

    const Tensor q = matmul(ToySite::kQ, x, layer.w_q);
    const Tensor k = matmul(ToySite::kK, x, layer.w_k);
    const Tensor v = matmul(ToySite::kV, x, layer.w_v);
    const Tensor scores = scale(matmul(ToySite::kScores, q, k), 1.0 / std::sqrt(static_cast<double>(layer.dim)));
    const Tensor probs = softmax_rows(scores);
    const Tensor context = matmul(ToySite::kContext, probs, v);
    const Tensor x1 = add(x, matmul(ToySite::kProj, context, layer.w_proj));
    const Tensor pre = matmul(ToySite::kMlp1, x1, layer.w_mlp1);
    const Tensor h = gelu(pre);
    Tensor out = add(x1, matmul(ToySite::kMlp2, h, layer.w_mlp2));
    if (trace) {
        trace->probs = probs;
        trace->output = out;
    }
    if (tape) {
        tape->probs = probs;
        tape->pre_gelu = pre;
    }
    return out;
}

using Grad = std::vector<double>;

// dy [r, m] for y = a b^T (a [r, d], b [m, d]) or y = a b (b [d, m]).
// Returns (da, db) with the shapes of a and b.
std::pair<Grad, Grad> matmul_backward(const Grad& dy, const Tensor& a, const Tensor& b, bool abt) {
    const std::size_t r = a.shape()[0], d = a.shape()[1];
    const std::size_t m = abt ? b.shape()[0] : b.shape()[1];
    Grad da(r * d, 0.0), db(b.numel(), 0.0);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            const double g = dy[i * m + j];
            if (g == 0.0) continue;
            for (std::size_t k = 0; k < d; ++k) {
                const std::size_t bi = abt ? j * d + k : k * m + j;
                da[i * d + k] += g * b[bi];
                db[bi] += g * a[i * d + k];
            }
        }
    return {std::move(da), std::move(db)};
}

// Per-site gradients of the mean squared output error over a calibration
// set. grads holds [lhs, rhs] for every site; the toy layer must carry a plan
// with a fresh weight cache.
double toy_loss_and_grads(const ToyLayer& layer, const std::vector<Tensor>& inputs, const std::vector<Tensor>& refs,
                          std::array<ParamGrads, 2 * kToySiteCount>* grads) {
    const QuantPlan& plan = *layer.plan;
    double total = 0.0;
    for (const auto& r : refs) total += static_cast<double>(r.numel());

    std::array<Grad, kToyWeightCount> weight_grad;
    double loss = 0.0;
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(layer.dim));
    for (std::size_t n = 0; n < inputs.size(); ++n) {
        Tape tape;
        const Tensor out = run(layer, inputs[n], Mode::kQuantized, nullptr, grads ? &tape : nullptr);
        Grad d_out(out.numel());
        for (std::size_t i = 0; i < d_out.size(); ++i) {
            const double e = static_cast<double>(out[i]) - refs[n][i];
            loss += e * e / total;
            d_out[i] = 2.0 * e / total;
        }
        if (!grads) continue;

        // Backward through one matmul site: returns gradients w.r.t. the
        // un-quantized lhs and rhs operands.
        auto site = [&](ToySite which, const Grad& dy) {
            const std::size_t s = idx(which);
            const QuantizedMatmul& m = plan.sites[s];
            auto [da_hat, db_hat] = matmul_backward(dy, tape.a_hat[s], tape.b_hat[s], which != ToySite::kContext);
            SiteBackward lhs = site_backward(tape.a_dom[s], tape.a_hat[s].shape(), da_hat, m.lhs);
            (*grads)[2 * s] += lhs.params;
            Grad db;
            if (is_linear(s)) {
                auto& acc = weight_grad[s];
                if (acc.empty()) acc.assign(db_hat.size(), 0.0);
                for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += db_hat[i];
            } else {
                SiteBackward rhs = site_backward(tape.b_dom[s], tape.b_hat[s].shape(), db_hat, m.rhs);
                (*grads)[2 * s + 1] += rhs.params;
                db = std::move(rhs.input_grad);
            }
            return std::pair{std::move(lhs.input_grad), std::move(db)};
        };

        // out = x1 + gelu(x1 W1^T) W2^T
        Grad d_x1 = d_out;
        Grad d_h = site(ToySite::kMlp2, d_out).first;
        for (std::size_t i = 0; i < d_h.size(); ++i) {
            const double v = tape.pre_gelu[i];
            const double cdf = 0.5 * (1.0 + std::erf(v / std::sqrt(2.0)));
            const double pdf = std::exp(-0.5 * v * v) / std::sqrt(2.0 * std::numbers::pi);
            d_h[i] *= cdf + v * pdf;
        }
        const Grad d_x1_mlp = site(ToySite::kMlp1, d_h).first;
        for (std::size_t i = 0; i < d_x1.size(); ++i) d_x1[i] += d_x1_mlp[i];

        // x1 = x + context Wproj^T
        const Grad d_ctx = site(ToySite::kProj, d_x1).first;
        // context = probs v
        const auto [d_probs, d_v] = site(ToySite::kContext, d_ctx);
        // probs = softmax(scores)
        const std::size_t T = layer.tokens;
        Grad d_scores(T * T);
        for (std::size_t i = 0; i < T; ++i) {
            double dot = 0.0;
            for (std::size_t j = 0; j < T; ++j) dot += d_probs[i * T + j] * tape.probs[i * T + j];
            for (std::size_t j = 0; j < T; ++j)
                d_scores[i * T + j] = tape.probs[i * T + j] * (d_probs[i * T + j] - dot) * inv_sqrt_d;
        }
        const auto [d_q, d_k] = site(ToySite::kScores, d_scores);
        site(ToySite::kQ, d_q);
        site(ToySite::kK, d_k);
        site(ToySite::kV, d_v);
    }
    if (grads) {
        for (std::size_t s = 0; s < kToyWeightCount; ++s) {
            const QuantSite& w = plan.sites[s].rhs;
            if (!w.enabled || weight_grad[s].empty()) continue;
            const Tensor dom = site_domain(layer.weight(s), w.hadamard);
            (*grads)[2 * s + 1] += site_backward(dom, layer.weight(s).shape(), weight_grad[s], w).params;
        }
    }
    return loss;
}

std::vector<float> gather_domain(const std::vector<Tensor>& operands, bool hadamard) {
    std::vector<float> values;
    for (const auto& t : operands) {
        const Tensor d = site_domain(t, hadamard);
        values.insert(values.end(), d.values().begin(), d.values().end());
    }
    return values;
}

}  // namespace

std::string to_string(ToySite site) {
    static constexpr const char* names[] = {"q", "k", "v", "proj", "mlp1", "mlp2", "scores", "context"};
    return names[idx(site)];
}

const Tensor& ToyLayer::weight(std::size_t i) const {
    switch (i) {
        case 0: return w_q;
        case 1: return w_k;
        case 2: return w_v;
        case 3: return w_proj;
        case 4: return w_mlp1;
        case 5: return w_mlp2;
        default: throw ArgumentError("ToyLayer::weight: index out of range");
    }
}

ToyLayer make_toy_layer(const ToyConfig& cfg, Seed seed) {
    if (cfg.dim == 0 || cfg.tokens == 0 || cfg.hidden == 0) throw ArgumentError("make_toy_layer: zero size");
    Rng rng(seed);
    const double s = 1.0 / std::sqrt(static_cast<double>(cfg.dim));
    ToyLayer layer;
    layer.dim = cfg.dim;
    layer.tokens = cfg.tokens;
    layer.hidden = cfg.hidden;
    layer.w_q = student_t_tensor({cfg.dim, cfg.dim}, cfg.df, s, rng);
    layer.w_k = student_t_tensor({cfg.dim, cfg.dim}, cfg.df, s, rng);
    layer.w_v = student_t_tensor({cfg.dim, cfg.dim}, cfg.df, s, rng);
    layer.w_proj = student_t_tensor({cfg.dim, cfg.dim}, cfg.df, s, rng);
    layer.w_mlp1 = student_t_tensor({cfg.hidden, cfg.dim}, cfg.df, s, rng);
    layer.w_mlp2 = student_t_tensor({cfg.dim, cfg.hidden}, cfg.df, 1.0 / std::sqrt(static_cast<double>(cfg.hidden)), rng);
    return layer;
}

Tensor make_toy_input(const ToyConfig& cfg, Seed seed) {
    Rng rng(seed);
    return student_t_tensor({cfg.tokens, cfg.dim}, cfg.df, 1.0, rng);
}

Tensor softmax_rows(const Tensor& scores) {
    if (scores.ndim() != 2) throw ArgumentError("softmax_rows: expected a 2-D tensor");
    const std::size_t rows = scores.shape()[0], cols = scores.shape()[1];
    std::vector<float> out(scores.numel());
    std::vector<double> e(cols);
    for (std::size_t r = 0; r < rows; ++r) {
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < cols; ++c) mx = std::max(mx, static_cast<double>(scores[r * cols + c]));
        double sum = 0.0;
        for (std::size_t c = 0; c < cols; ++c) sum += e[c] = std::exp(scores[r * cols + c] - mx);
        for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] = static_cast<float>(e[c] / sum);
    }
    return Tensor(scores.shape(), std::move(out));
}

Tensor gelu(const Tensor& x) {
    std::vector<float> out(x.numel());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double v = x[i];
        out[i] = static_cast<float>(0.5 * v * (1.0 + std::erf(v / std::sqrt(2.0))));
    }
    return Tensor(x.shape(), std::move(out));
}

Tensor forward_fp(const ToyLayer& layer, const Tensor& x) { return run(layer, x, Mode::kFullPrecision, nullptr); }

ToyTrace trace_fp(const ToyLayer& layer, const Tensor& x) {
    ToyTrace trace;
    run(layer, x, Mode::kFullPrecision, &trace);
    return trace;
}

Tensor forward_quantized(const ToyLayer& layer, const Tensor& x) { return run(layer, x, Mode::kQuantized, nullptr); }

Tensor forward_hadamard_only(const ToyLayer& layer, const Tensor& x) {
    return run(layer, x, Mode::kHadamardOnly, nullptr);
}

HadamardMode parse_hadamard_mode(const std::string& s) {
    if (s == "none") return HadamardMode::kNone;
    if (s == "w") return HadamardMode::kWeights;
    if (s == "wa") return HadamardMode::kWeightsActivations;
    throw ArgumentError("unknown hadamard mode '" + s + "' (expected none|w|wa)");
}

TuneMode parse_tune_mode(const std::string& s) {
    if (s == "none") return TuneMode::kNone;
    if (s == "ab") return TuneMode::kAlphaBeta;
    if (s == "bounds") return TuneMode::kBounds;
    if (s == "all") return TuneMode::kAll;
    throw ArgumentError("unknown tune mode '" + s + "' (expected all|ab|bounds|none)");
}

std::string to_string(HadamardMode m) {
    switch (m) {
        case HadamardMode::kNone: return "none";
        case HadamardMode::kWeights: return "w";
        case HadamardMode::kWeightsActivations: return "wa";
    }
    return "?";
}

std::string to_string(TuneMode m) {
    switch (m) {
        case TuneMode::kNone: return "none";
        case TuneMode::kAlphaBeta: return "ab";
        case TuneMode::kBounds: return "bounds";
        case TuneMode::kAll: return "all";
    }
    return "?";
}

QuantPlan build_plan(const ToyLayer& layer, const std::vector<Tensor>& calib_inputs, const PlanOptions& opts) {
    if (calib_inputs.empty()) throw ArgumentError("build_plan: no calibration inputs");
    if (opts.bits < 2 || opts.bits > 8) throw ArgumentError("build_plan: bits must be in [2,8]");
    if (!(opts.prune_fraction >= 0.0 && opts.prune_fraction <= 1.0))
        throw ArgumentError("build_plan: prune fraction must be in [0,1]");

    std::vector<ToyTrace> traces;
    for (const auto& x : calib_inputs) traces.push_back(trace_fp(layer, x));
    const bool had_w = opts.hadamard != HadamardMode::kNone;
    const bool had_a = opts.hadamard == HadamardMode::kWeightsActivations;

    auto search = [&](std::span<const float> values, std::uint64_t stream) {
        BoundSearchOptions so = opts.search;
        so.seed = derive_seed(opts.search.seed, stream);
        return search_bounds(values, opts.bits, so);
    };
    auto activation_site = [&](std::size_t s, bool lhs) {
        QuantSite site;
        site.enabled = opts.quantize_activations;
        site.hadamard = had_a;
        if (!site.enabled) return site;
        std::vector<Tensor> operands;
        for (const auto& t : traces) operands.push_back(lhs ? t.lhs[s] : t.rhs[s]);
        site.params = search(gather_domain(operands, had_a), 2 * s + (lhs ? 0 : 1));
        return site;
    };

    QuantPlan plan;
    for (std::size_t s = 0; s < kToySiteCount; ++s) {
        QuantizedMatmul& m = plan.sites[s];
        m.form = s == idx(ToySite::kContext) ? MatmulForm::kPlain : MatmulForm::kTransposedRhs;
        m.lhs = activation_site(s, true);
        if (!is_linear(s)) {
            m.rhs = activation_site(s, false);
            continue;
        }
        m.weight = layer.weight(s);
        m.rhs.enabled = opts.quantize_weights;
        m.rhs.hadamard = had_w;
        if (!m.rhs.enabled) continue;
        const Tensor domain = site_domain(*m.weight, had_w);
        std::vector<float> kept(domain.values().begin(), domain.values().end());
        if (opts.prune_fraction > 0.0) {
            auto pr = prune_unstructured(domain, opts.prune_fraction, derive_seed(opts.search.seed, 100 + s));
            kept.clear();
            for (std::size_t i = 0; i < domain.numel(); ++i)
                if (pr.mask.keep[i]) kept.push_back(domain[i]);
            m.rhs.keep = std::move(pr.mask.keep);
        }
        if (kept.empty()) kept.push_back(0.0f);
        m.rhs.params = search(kept, 2 * s + 1);
    }
    refresh_weight_cache(layer, plan);
    return plan;
}

void refresh_weight_cache(const ToyLayer& layer, QuantPlan& plan) {
    for (std::size_t s = 0; s < kToyWeightCount; ++s)
        plan.weight_cache[s] = site_forward(layer.weight(s), plan.sites[s].rhs);
}

OptimizeResult finetune_plan(const ToyLayer& layer, QuantPlan& plan, const std::vector<Tensor>& calib_inputs,
                             const FinetuneConfig& cfg) {
    if (calib_inputs.empty()) throw ArgumentError("finetune_plan: no calibration inputs");
    std::vector<Tensor> refs;
    for (const auto& x : calib_inputs) refs.push_back(forward_fp(layer, x));

    std::vector<std::size_t> slots;  // index into the [lhs, rhs] per-site layout
    std::vector<QuantParams> start;
    for (std::size_t s = 0; s < kToySiteCount; ++s) {
        if (plan.sites[s].lhs.enabled) {
            slots.push_back(2 * s);
            start.push_back(plan.sites[s].lhs.params);
        }
        if (plan.sites[s].rhs.enabled) {
            slots.push_back(2 * s + 1);
            start.push_back(plan.sites[s].rhs.params);
        }
    }
    ToyLayer working = layer;
    working.plan = plan;
    auto assign = [&](std::span<const QuantParams> params) {
        for (std::size_t i = 0; i < slots.size(); ++i) {
            QuantizedMatmul& m = working.plan->sites[slots[i] / 2];
            (slots[i] % 2 == 0 ? m.lhs : m.rhs).params = params[i];
        }
        refresh_weight_cache(working, *working.plan);
    };
    const LossGradFn loss_grad = [&](std::span<const QuantParams> params, std::span<ParamGrads> grads) {
        assign(params);
        if (grads.empty()) return toy_loss_and_grads(working, calib_inputs, refs, nullptr);
        std::array<ParamGrads, 2 * kToySiteCount> all{};
        const double loss = toy_loss_and_grads(working, calib_inputs, refs, &all);
        for (std::size_t i = 0; i < slots.size(); ++i) grads[i] = all[slots[i]];
        return loss;
    };
    OptimizeResult result = optimize_quant_params(std::move(start), loss_grad, cfg);
    assign(result.best);
    plan = std::move(*working.plan);
    return result;
}

double toy_calibration_loss(const ToyLayer& layer, const std::vector<Tensor>& calib_inputs) {
    if (!layer.plan) throw StateError("toy layer: no quantization plan attached");
    std::vector<Tensor> refs;
    for (const auto& x : calib_inputs) refs.push_back(forward_fp(layer, x));
    return toy_loss_and_grads(layer, calib_inputs, refs, nullptr);
}

ToyGradients toy_calibration_gradients(const ToyLayer& layer, const std::vector<Tensor>& calib_inputs) {
    if (!layer.plan) throw StateError("toy layer: no quantization plan attached");
    if (calib_inputs.empty()) throw ArgumentError("toy_calibration_gradients: no calibration inputs");
    std::vector<Tensor> refs;
    for (const auto& x : calib_inputs) refs.push_back(forward_fp(layer, x));
    std::array<ParamGrads, 2 * kToySiteCount> all{};
    ToyGradients out;
    out.loss = toy_loss_and_grads(layer, calib_inputs, refs, &all);
    for (std::size_t s = 0; s < kToySiteCount; ++s) {
        out.sites[s].loss = out.loss;
        out.sites[s].lhs = all[2 * s];
        out.sites[s].rhs = all[2 * s + 1];
    }
    return out;
}

std::vector<PackedTensor> pack_plan_weights(const ToyLayer& layer, const QuantPlan& plan) {
    std::vector<PackedTensor> out;
    for (std::size_t s = 0; s < kToyWeightCount; ++s) {
        const QuantSite& site = plan.sites[s].rhs;
        if (!site.enabled) continue;
        const Tensor& w = layer.weight(s);
        const Tensor domain = site_domain(w, site.hadamard);
        std::vector<Code> codes(domain.numel());
        for (std::size_t i = 0; i < codes.size(); ++i) codes[i] = quantize_value(domain[i], site.params);
        std::optional<PadInfo> pad;
        if (site.hadamard) pad = PadInfo{w.last_dim(), domain.last_dim()};
        out.push_back(pack(codes, site.params, w.shape(), pad, site.keep));
    }
    return out;
}

double aggregate_bits_per_parameter(const std::vector<PackedTensor>& packed) {
    if (packed.empty()) throw ArgumentError("aggregate_bits_per_parameter: nothing to aggregate");
    double bits = 0.0;
    double params = 0.0;
    for (const auto& pt : packed) {
        const auto n = static_cast<double>(pt.stored_numel());
        bits += static_cast<double>(pt.params.bits) * static_cast<double>(pt.code_count) + (pt.mask ? n : 0.0);
        params += n;
    }
    return bits / params;
}

PipelineReport evaluate_pipeline(const ToyLayer& layer, const std::vector<Tensor>& eval_inputs,
                                 const std::vector<Tensor>& calib_inputs, const PipelineOptions& opts) {
    if (eval_inputs.empty()) throw ArgumentError("evaluate_pipeline: no evaluation inputs");
    ToyLayer working = layer;
    QuantPlan plan = build_plan(working, calib_inputs, opts.plan);
    if (opts.tune != TuneMode::kNone) {
        FinetuneConfig cfg = opts.finetune;
        cfg.tune_bounds = opts.tune == TuneMode::kBounds || opts.tune == TuneMode::kAll;
        cfg.tune_alpha_beta = opts.tune == TuneMode::kAlphaBeta || opts.tune == TuneMode::kAll;
        finetune_plan(working, plan, calib_inputs, cfg);
    }
    PipelineReport report;
    const auto packed = pack_plan_weights(working, plan);
    if (!packed.empty()) report.bits_per_parameter = aggregate_bits_per_parameter(packed);
    for (const auto& pt : packed) report.weight_bytes += encoded_size(pt);

    working.plan = std::move(plan);
    std::vector<float> ref, out;
    for (const auto& x : eval_inputs) {
        const Tensor r = forward_fp(working, x);
        const Tensor q = forward_quantized(working, x);
        ref.insert(ref.end(), r.values().begin(), r.values().end());
        out.insert(out.end(), q.values().begin(), q.values().end());
    }
    const Shape flat{ref.size()};
    const Tensor ref_all(flat, std::move(ref));
    const Tensor out_all(flat, std::move(out));
    report.output_mse = mse(out_all, ref_all);
    const auto [lo, hi] = std::minmax_element(ref_all.values().begin(), ref_all.values().end());
    report.output_psnr = psnr(tensor_as_image(out_all, *lo, *hi), tensor_as_image(ref_all, *lo, *hi));
    return report;
}

ToyProblem make_toy_problem(const ToyConfig& cfg, Seed seed, std::size_t n_calib, std::size_t n_eval) {
    if (n_calib == 0 || n_eval == 0) throw ArgumentError("make_toy_problem: need calibration and evaluation inputs");
    ToyProblem p{make_toy_layer(cfg, derive_seed(seed, 0)), {}, {}};
    for (std::size_t i = 0; i < n_calib; ++i) p.calib.push_back(make_toy_input(cfg, derive_seed(seed, 1 + i)));
    for (std::size_t i = 0; i < n_eval; ++i)
        p.eval.push_back(make_toy_input(cfg, derive_seed(seed, 1 + n_calib + i)));
    return p;
}

}  // namespace csrt
