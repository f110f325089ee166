#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "compsrt/errors.hpp"
#include "compsrt/finetune.hpp"
#include "compsrt/hadamard.hpp"
#include "compsrt/metrics.hpp"
#include "compsrt/packed.hpp"
#include "compsrt/parallel.hpp"
#include "compsrt/prune.hpp"
#include "compsrt/stats.hpp"
#include "compsrt/toymodel.hpp"

namespace fs = std::filesystem;

namespace csrt::cli {

namespace {

std::string num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

// Resolved configuration, echoed to stderr before any work happens.
class Echo {
public:
    explicit Echo(std::string command) : command_(std::move(command)) {}
    template <class T>
    Echo& operator()(const std::string& key, const T& value) {
        std::ostringstream os;
        if constexpr (std::is_same_v<T, bool>)
            os << (value ? "true" : "false");
        else if constexpr (std::is_floating_point_v<T>)
            os << num(value);
        else
            os << value;
        items_.emplace_back(key, os.str());
        return *this;
    }
    void print(std::ostream& err) const {
        err << "csrt " << command_ << ":";
        for (const auto& [k, v] : items_) err << ' ' << k << '=' << v;
        err << '\n';
    }

private:
    std::string command_;
    std::vector<std::pair<std::string, std::string>> items_;
};

std::string join(const std::vector<std::string>& v) {
    std::string s;
    for (const auto& x : v) s += (s.empty() ? "" : ",") + x;
    return s;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError(path + ": cannot open for writing");
    return f;
}

std::vector<std::pair<fs::path, fs::path>> read_manifest(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError(path + ": cannot open manifest");
    const fs::path base = fs::path(path).parent_path();
    std::vector<std::pair<fs::path, fs::path>> pairs;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos)
            throw FormatError(path + ":" + std::to_string(lineno) + ": expected pre<TAB>post");
        auto resolve = [&](fs::path p) { return p.is_absolute() ? p : base / p; };
        pairs.emplace_back(resolve(line.substr(0, tab)), resolve(line.substr(tab + 1)));
    }
    return pairs;
}

// key=value lines, '#' comments.
std::map<std::string, std::string> read_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError(path + ": cannot open config");
    std::map<std::string, std::string> kv;
    std::string line;
    std::size_t lineno = 0;
    auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r");
        const auto b = s.find_last_not_of(" \t\r");
        return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
    };
    while (std::getline(f, line)) {
        ++lineno;
        line = trim(line.substr(0, line.find('#')));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ArgumentError(path + ":" + std::to_string(lineno) + ": expected key=value");
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used == v.size()) return d;
    } catch (const std::exception&) {
    }
    throw ArgumentError("config " + key + ": not a number: '" + v + "'");
}

// ---------------------------------------------------------------------------

struct HadamardArgs {
    std::string in, out;
    bool inverse = false;
    std::optional<std::size_t> padinfo;
};

int cmd_hadamard(const HadamardArgs& a, std::ostream& out, std::ostream& err) {
    if (a.inverse && !a.padinfo) throw ArgumentError("--inverse requires --padinfo");
    Echo("hadamard")("in", a.in)("out", a.out)("inverse", a.inverse)("padinfo", a.padinfo ? std::to_string(*a.padinfo) : "none")
        .print(err);
    const Tensor t = load_tensor(a.in);
    if (a.inverse) {
        save_tensor(hadamard_inverse(t, PadInfo{*a.padinfo, t.last_dim()}), a.out);
        return kExitOk;
    }
    const auto r = hadamard_transform(t);
    save_tensor(r.tensor, a.out);
    out << "original_dim=" << r.pad.original_dim << " padded_dim=" << r.pad.padded_dim << '\n';
    return kExitOk;
}

struct QuantizeArgs {
    std::string in, out;
    int bits = 4;
    double prune = 0.0;
    bool hadamard = false;
    std::size_t steps = 100;
    std::uint64_t seed = 0;
};

int cmd_quantize(const QuantizeArgs& a, std::ostream& out, std::ostream& err) {
    Echo("quantize")("in", a.in)("out", a.out)("bits", a.bits)("prune", a.prune)("hadamard", a.hadamard)(
        "search_steps", a.steps)("seed", a.seed)
        .print(err);
    CompressOptions opts;
    opts.bits = a.bits;
    opts.hadamard = a.hadamard;
    opts.prune_fraction = a.prune;
    opts.search.steps = a.steps;
    opts.search.seed = Seed{a.seed};
    const PackedTensor pt = compress_tensor(load_tensor(a.in), opts);
    save_packed(pt, a.out);
    out << "lower=" << num(pt.params.lower) << " upper=" << num(pt.params.upper)
        << " bits_per_param=" << num(bits_per_parameter(pt)) << " bytes=" << encoded_size(pt) << '\n';
    return kExitOk;
}

int cmd_dequantize(const std::string& in, const std::string& out_path, std::ostream& err) {
    Echo("dequantize")("in", in)("out", out_path).print(err);
    save_tensor(reconstruct(load_packed(in)), out_path);
    return kExitOk;
}

struct PruneArgs {
    std::string in, out, mask;
    double fraction = 0.0;
    bool structured = false;
    std::uint64_t seed = 0;
};

int cmd_prune(const PruneArgs& a, std::ostream& out, std::ostream& err) {
    Echo("prune")("in", a.in)("out", a.out)("fraction", a.fraction)("structured", a.structured)(
        "mask", a.mask.empty() ? "none" : a.mask)("seed", a.seed)
        .print(err);
    const Tensor t = load_tensor(a.in);
    if (a.structured) {
        if (!a.mask.empty()) throw ArgumentError("--mask applies to unstructured pruning only");
        const auto r = prune_structured(t, a.fraction);
        save_tensor(r.pruned, a.out);
        out << "rows_kept=" << r.kept_rows.size() << " rows=" << t.shape()[0] << '\n';
        return kExitOk;
    }
    const auto r = prune_unstructured(t, a.fraction, Seed{a.seed});
    save_tensor(r.pruned, a.out);
    if (!a.mask.empty()) save_mask(r.mask.keep, a.mask);
    out << "threshold=" << num(r.mask.threshold) << " kept=" << r.mask.kept_count() << " total=" << t.numel() << '\n';
    return kExitOk;
}

struct FinetuneArgs {
    std::string weight, config, history, out;
    std::vector<std::string> calib;
    int bits = 2;
    bool hadamard = false;
    bool weights_only = false;
    std::string tune = "all";
    std::optional<std::size_t> iters;
    std::optional<double> lr;
    std::uint64_t seed = 0;
};

int cmd_finetune(const FinetuneArgs& a, std::ostream& out, std::ostream& err) {
    FinetuneConfig cfg;
    std::string tune = a.tune;
    if (!a.config.empty()) {
        for (const auto& [k, v] : read_config(a.config)) {
            if (k == "lr" || k == "learning_rate") cfg.learning_rate = parse_double(k, v);
            else if (k == "beta1") cfg.beta1 = parse_double(k, v);
            else if (k == "beta2") cfg.beta2 = parse_double(k, v);
            else if (k == "adam_eps") cfg.adam_eps = parse_double(k, v);
            else if (k == "grad_clip") cfg.grad_clip = parse_double(k, v);
            else if (k == "max_iters" || k == "iters") {
                const double d = parse_double(k, v);
                if (d < 0 || d != std::floor(d)) throw ArgumentError("config " + k + ": expected a count");
                cfg.max_iters = static_cast<std::size_t>(d);
            } else if (k == "tune") tune = v;
            else throw ArgumentError("config: unknown key '" + k + "'");
        }
    }
    // Flags override the file.
    if (a.iters) cfg.max_iters = *a.iters;
    if (a.lr) cfg.learning_rate = *a.lr;
    const TuneMode mode = parse_tune_mode(tune);
    cfg.tune_bounds = mode == TuneMode::kBounds || mode == TuneMode::kAll;
    cfg.tune_alpha_beta = mode == TuneMode::kAlphaBeta || mode == TuneMode::kAll;
    cfg.seed = Seed{a.seed};
    cfg.validate();

    Echo("finetune")("weight", a.weight)("calib", join(a.calib))("bits", a.bits)("hadamard", a.hadamard)(
        "quantize_activations", !a.weights_only)("tune", to_string(mode))("lr", cfg.learning_rate)("beta1", cfg.beta1)(
        "beta2", cfg.beta2)("adam_eps", cfg.adam_eps)("grad_clip", cfg.grad_clip)("max_iters", cfg.max_iters)(
        "seed", a.seed)("history", a.history.empty() ? "none" : a.history)("out", a.out.empty() ? "none" : a.out)
        .print(err);

    QuantizedMatmul layer;
    layer.weight = load_tensor(a.weight);
    if (layer.weight->ndim() != 2) throw ArgumentError("--weight must be a 2-D [out, in] tensor");
    std::vector<Tensor> inputs;
    for (const auto& p : a.calib) {
        Tensor x = load_tensor(p);
        if (x.ndim() != 2 || x.last_dim() != layer.weight->last_dim())
            throw ArgumentError(p + ": calibration input must be [n, " + std::to_string(layer.weight->last_dim()) + "]");
        inputs.push_back(std::move(x));
    }
    BoundSearchOptions search;
    search.seed = Seed{a.seed};

    layer.rhs.enabled = true;
    layer.rhs.hadamard = a.hadamard;
    const Tensor w_dom = site_domain(*layer.weight, a.hadamard);
    layer.rhs.params = search_bounds(w_dom, a.bits, search);
    if (!a.weights_only) {
        layer.lhs.enabled = true;
        layer.lhs.hadamard = a.hadamard;
        std::vector<float> values;
        for (const auto& x : inputs) {
            const Tensor d = site_domain(x, a.hadamard);
            values.insert(values.end(), d.values().begin(), d.values().end());
        }
        search.seed = derive_seed(Seed{a.seed}, 1);
        layer.lhs.params = search_bounds(values, a.bits, search);
    }
    const CalibSet calib = make_calib_set(layer, std::move(inputs));
    const FinetuneResult r = finetune_params(layer, calib, cfg);

    if (!a.history.empty()) {
        auto f = open_out(a.history);
        f << "iter,loss\n";
        for (std::size_t i = 0; i < r.loss_history.size(); ++i) f << i << ',' << num(r.loss_history[i]) << '\n';
        if (!f) throw IoError(a.history + ": write failed");
    }
    if (!a.out.empty()) {
        std::optional<PadInfo> pad;
        if (a.hadamard) pad = PadInfo{layer.weight->last_dim(), w_dom.last_dim()};
        save_packed(pack(quantize(w_dom, r.rhs), r.rhs, layer.weight->shape(), pad, std::nullopt), a.out);
    }
    auto params = [&](const char* name, const QuantParams& p) {
        out << name << " lower=" << num(p.lower) << " upper=" << num(p.upper) << " alpha=" << num(p.alpha)
            << " beta=" << num(p.beta) << '\n';
    };
    out << "initial_loss=" << num(r.initial_loss) << " best_loss=" << num(r.best_loss) << " best_iter=" << r.best_iter
        << " iterations=" << r.loss_history.size() - 1 << (r.stopped_non_finite ? " stopped=non_finite" : "") << '\n';
    params("weight", r.rhs);
    if (!a.weights_only) params("activation", r.lhs);
    return kExitOk;
}

struct AnalyzeArgs {
    std::string pairs, out;
    double eps = 0.05;
    bool sweep = false;
    std::size_t sample = 1'000'000;
    std::size_t shapiro_cap = kShapiroMaxN;
    std::uint64_t seed = 0;
};

int cmd_analyze(const AnalyzeArgs& a, std::ostream& out, std::ostream& err) {
    Echo("analyze")("pairs", a.pairs)("eps", a.eps)("eps_sweep", a.sweep)("sample", a.sample)(
        "shapiro_cap", a.shapiro_cap)("seed", a.seed)("out", a.out.empty() ? "stdout" : a.out)
        .print(err);
    const auto manifest = read_manifest(a.pairs);
    if (manifest.size() < 2)
        throw ArgumentError(a.pairs + ": need at least 2 pairs, found " + std::to_string(manifest.size()));
    std::vector<TensorPair> pairs(manifest.size());
    parallel_for(manifest.size(), [&](std::size_t i) {
        pairs[i] = TensorPair{load_tensor(manifest[i].first), load_tensor(manifest[i].second)};
    });

    AnalysisOptions opts;
    opts.epsilon = a.eps;
    opts.sample_k = a.sample;
    opts.shapiro_cap = a.shapiro_cap;
    opts.seed = Seed{a.seed};

    std::ostringstream csv;
    auto row = [&](const std::string& prefix, const char* test, const char* name, const std::optional<TestResult>& r) {
        csv << prefix << test << ',' << name << ',' << pairs.size() << ',';
        if (r)
            csv << num(r->statistic) << ',' << num(r->p_value) << ',' << num(r->d_z) << '\n';
        else
            csv << "nan,nan,nan\n";
    };
    if (!a.sweep) {
        const HadamardAnalysis h = paired_hadamard_analysis(pairs, opts);
        csv << "test,name,N,statistic,p_value,d_z\n";
        row("", "delta_w", "W_post-W_pre", h.delta_w);
        row("", "delta_r", "R_pre-R_post", h.delta_r);
        row("", "delta_p", "p_post-p_pre", h.delta_p);
    } else {
        const auto grid = default_eps_grid();
        csv << "epsilon,test,name,N,statistic,p_value,d_z\n";
        for (const auto& r : eps_sweep(pairs, grid, opts)) {
            const std::string prefix = num(r.epsilon) + ",";
            row(prefix, "delta_w", "W_post-W_pre", r.delta_w);
            row(prefix, "delta_r", "R_pre-R_post", r.delta_r);
            row(prefix, "delta_p", "p_post-p_pre", r.delta_p);
        }
    }
    if (a.out.empty()) {
        out << csv.str();
    } else {
        auto f = open_out(a.out);
        f << csv.str();
        if (!f) throw IoError(a.out + ": write failed");
        out << "wrote " << a.out << '\n';
    }
    return kExitOk;
}

struct SynthArgs {
    std::string dir;
    std::size_t count = 100;
    std::uint64_t seed = 0;
    double scale = 0.01;
};

int cmd_synth(const SynthArgs& a, std::ostream& out, std::ostream& err) {
    Echo("synth")("dir", a.dir)("count", a.count)("seed", a.seed)("scale", a.scale).print(err);
    if (a.count == 0) throw ArgumentError("--count must be positive");
    std::error_code ec;
    fs::create_directories(a.dir, ec);
    if (ec) throw IoError(a.dir + ": " + ec.message());
    const auto pairs = synthetic_hadamard_pairs(a.count, Seed{a.seed}, 3, a.scale);
    std::ostringstream manifest;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const std::string pre = "pre_" + std::to_string(i) + ".csrt";
        const std::string post = "post_" + std::to_string(i) + ".csrt";
        save_tensor(pairs[i].pre, fs::path(a.dir) / pre);
        save_tensor(pairs[i].post, fs::path(a.dir) / post);
        manifest << pre << '\t' << post << '\n';
    }
    const fs::path mpath = fs::path(a.dir) / "manifest.tsv";
    auto f = open_out(mpath.string());
    f << manifest.str();
    out << "wrote " << pairs.size() << " pairs, manifest " << mpath.string() << '\n';
    return kExitOk;
}

struct ToyEvalArgs {
    int bits = 2;
    double prune = 0.0;
    std::string hadamard = "wa";
    bool finetune = false;
    std::string tune = "all";
    std::size_t iters = 200;
    std::size_t seeds = 20;
    std::uint64_t seed = 0;
    bool grid = false;
    std::string out;
};

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

int cmd_toy_eval(const ToyEvalArgs& a, std::ostream& out, std::ostream& err) {
    const HadamardMode had = parse_hadamard_mode(a.hadamard);
    const TuneMode tune = a.finetune ? parse_tune_mode(a.tune) : TuneMode::kNone;
    if (a.seeds == 0) throw ArgumentError("--seeds must be positive");
    Echo("toy-eval")("bits", a.bits)("prune", a.prune)("hadamard", to_string(had))("finetune", a.finetune)(
        "tune", to_string(tune))("iters", a.iters)("seeds", a.seeds)("seed", a.seed)("grid", a.grid)(
        "out", a.out.empty() ? "none" : a.out)
        .print(err);

    std::vector<std::pair<HadamardMode, TuneMode>> configs;
    if (a.grid) {
        for (auto h : {HadamardMode::kNone, HadamardMode::kWeights, HadamardMode::kWeightsActivations})
            for (auto t : {TuneMode::kNone, TuneMode::kAlphaBeta, TuneMode::kBounds, TuneMode::kAll})
                configs.emplace_back(h, t);
    } else {
        configs.emplace_back(had, tune);
    }

    std::vector<std::vector<PipelineReport>> reports(configs.size(), std::vector<PipelineReport>(a.seeds));
    parallel_for(a.seeds, [&](std::size_t s) {
        const ToyProblem p = make_toy_problem(ToyConfig{}, derive_seed(Seed{a.seed}, s));
        for (std::size_t c = 0; c < configs.size(); ++c) {
            PipelineOptions opts;
            opts.plan.bits = a.bits;
            opts.plan.prune_fraction = a.prune;
            opts.plan.hadamard = configs[c].first;
            opts.plan.search.seed = derive_seed(Seed{a.seed}, 1000 + s);
            opts.tune = configs[c].second;
            opts.finetune.max_iters = a.iters;
            reports[c][s] = evaluate_pipeline(p.layer, p.eval, p.calib, opts);
        }
    });

    std::ostringstream csv;
    csv << "hadamard,tune,bits,prune,seed,output_mse,output_psnr,bits_per_param\n";
    for (std::size_t c = 0; c < configs.size(); ++c) {
        std::vector<double> mse, psnr_db;
        const std::string head = to_string(configs[c].first) + "," + to_string(configs[c].second) + "," +
                                 std::to_string(a.bits) + "," + num(a.prune) + ",";
        for (std::size_t s = 0; s < a.seeds; ++s) {
            const auto& r = reports[c][s];
            csv << head << s << ',' << num(r.output_mse) << ',' << num(r.output_psnr) << ','
                << num(r.bits_per_parameter) << '\n';
            mse.push_back(r.output_mse);
            psnr_db.push_back(r.output_psnr);
        }
        const double bpp = reports[c][0].bits_per_parameter;
        csv << head << "median," << num(median(mse)) << ',' << num(median(psnr_db)) << ',' << num(bpp) << '\n';
        out << "hadamard=" << to_string(configs[c].first) << " tune=" << to_string(configs[c].second)
            << " median_mse=" << num(median(mse)) << " median_psnr=" << num(median(psnr_db))
            << " bits_per_param=" << num(bpp) << '\n';
    }
    if (!a.out.empty()) {
        auto f = open_out(a.out);
        f << csv.str();
        if (!f) throw IoError(a.out + ": write failed");
    }
    return kExitOk;
}

int cmd_report(const std::vector<std::string>& files, bool csv_mode, std::ostream& out, std::ostream& err) {
    Echo("report")("in", join(files))("csv", csv_mode).print(err);
    if (files.empty()) throw ArgumentError("report: no input files");
    std::vector<PackedTensor> packed;
    for (const auto& f : files) packed.push_back(load_packed(f));

    if (csv_mode) out << "file,bytes,mb,bits_per_param\n";
    std::size_t total_bytes = 0;
    for (std::size_t i = 0; i < files.size(); ++i) {
        const std::size_t bytes = encoded_size(packed[i]);
        total_bytes += bytes;
        const double mb = static_cast<double>(bytes) / 1e6;
        if (csv_mode)
            out << files[i] << ',' << bytes << ',' << num(mb) << ',' << num(bits_per_parameter(packed[i])) << '\n';
        else
            out << files[i] << ": " << bytes << " bytes, " << num(mb) << " MB, "
                << num(bits_per_parameter(packed[i])) << " bits/param\n";
    }
    const double agg = aggregate_bits_per_parameter(packed);
    const double mb = static_cast<double>(total_bytes) / 1e6;
    if (csv_mode)
        out << "total," << total_bytes << ',' << num(mb) << ',' << num(agg) << '\n';
    else
        out << "total: " << total_bytes << " bytes, " << num(mb) << " MB, " << num(agg) << " bits/param\n";
    return kExitOk;
}

int cmd_metrics(const std::string& a_path, const std::string& b_path, bool luma, std::ostream& out, std::ostream& err) {
    Echo("metrics")("a", a_path)("b", b_path)("luma", luma).print(err);
    const Image a = Image::from_tensor(load_tensor(a_path));
    const Image b = Image::from_tensor(load_tensor(b_path));
    MetricOptions opts;
    opts.luma_only = luma;
    out << "psnr=" << num(psnr(a, b, opts)) << " ssim=" << num(ssim(a, b, opts)) << '\n';
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Hadamard/quantization/pruning toolkit for transformer weights"};
    app.name("csrt");
    app.require_subcommand(1);

    HadamardArgs had;
    auto* c_had = app.add_subcommand("hadamard", "normalized Hadamard transform along the last dimension");
    c_had->add_option("--in", had.in, "input CSRT")->required();
    c_had->add_option("--out", had.out, "output CSRT")->required();
    c_had->add_flag("--inverse", had.inverse, "inverse transform, truncating to --padinfo");
    c_had->add_option("--padinfo", had.padinfo, "original last-dimension size");

    QuantizeArgs quant;
    auto* c_quant = app.add_subcommand("quantize", "CSRT -> CSRQ");
    c_quant->add_option("--in", quant.in)->required();
    c_quant->add_option("--out", quant.out)->required();
    c_quant->add_option("--bits", quant.bits)->check(CLI::Range(2, 8))->capture_default_str();
    c_quant->add_option("--prune", quant.prune, "magnitude prune fraction")->check(CLI::Range(0.0, 1.0));
    c_quant->add_flag("--hadamard", quant.hadamard);
    c_quant->add_option("--search-steps", quant.steps)->check(CLI::PositiveNumber)->capture_default_str();
    c_quant->add_option("--seed", quant.seed);

    std::string deq_in, deq_out;
    auto* c_deq = app.add_subcommand("dequantize", "CSRQ -> CSRT");
    c_deq->add_option("--in", deq_in)->required();
    c_deq->add_option("--out", deq_out)->required();

    PruneArgs prune;
    auto* c_prune = app.add_subcommand("prune", "magnitude pruning");
    c_prune->add_option("--in", prune.in)->required();
    c_prune->add_option("--out", prune.out)->required();
    c_prune->add_option("--fraction", prune.fraction)->required()->check(CLI::Range(0.0, 1.0));
    c_prune->add_flag("--structured", prune.structured, "drop whole rows by mean |w|");
    c_prune->add_option("--mask", prune.mask, "write the keep mask here");
    c_prune->add_option("--seed", prune.seed);

    FinetuneArgs ft;
    auto* c_ft = app.add_subcommand("finetune", "fine-tune quantizer parameters of one linear layer");
    c_ft->add_option("--weight", ft.weight, "[out, in] weight CSRT")->required();
    c_ft->add_option("--calib", ft.calib, "[n, in] calibration input CSRT (repeatable)")->required();
    c_ft->add_option("--bits", ft.bits)->check(CLI::Range(2, 8))->capture_default_str();
    c_ft->add_flag("--hadamard", ft.hadamard);
    c_ft->add_flag("--weights-only", ft.weights_only, "leave the input activation unquantized");
    c_ft->add_option("--tune", ft.tune, "all|ab|bounds|none")->capture_default_str();
    c_ft->add_option("--iters", ft.iters);
    c_ft->add_option("--lr", ft.lr);
    c_ft->add_option("--config", ft.config, "key=value file (lr, beta1, beta2, adam_eps, grad_clip, max_iters, tune)");
    c_ft->add_option("--history", ft.history, "loss history CSV");
    c_ft->add_option("--out", ft.out, "quantized weight CSRQ with the tuned parameters");
    c_ft->add_option("--seed", ft.seed);

    AnalyzeArgs an;
    auto* c_an = app.add_subcommand("analyze", "paired pre/post Hadamard statistics");
    c_an->add_option("--pairs", an.pairs, "manifest: pre<TAB>post per line")->required();
    c_an->add_option("--eps", an.eps)->check(CLI::PositiveNumber)->capture_default_str();
    c_an->add_flag("--eps-sweep", an.sweep);
    c_an->add_option("--sample", an.sample)->check(CLI::PositiveNumber)->capture_default_str();
    c_an->add_option("--shapiro-cap", an.shapiro_cap)->check(CLI::Range(std::size_t{3}, kShapiroMaxN));
    c_an->add_option("--seed", an.seed);
    c_an->add_option("--out", an.out, "CSV path (default stdout)");

    SynthArgs syn;
    auto* c_syn = app.add_subcommand("synth", "write a synthetic heavy-tailed pre/post suite and manifest");
    c_syn->add_option("--dir", syn.dir)->required();
    c_syn->add_option("--count", syn.count)->capture_default_str();
    c_syn->add_option("--seed", syn.seed);
    c_syn->add_option("--scale", syn.scale)->check(CLI::PositiveNumber)->capture_default_str();

    ToyEvalArgs toy;
    auto* c_toy = app.add_subcommand("toy-eval", "quantize the toy transformer layer over seeds");
    c_toy->add_option("--bits", toy.bits)->check(CLI::Range(2, 8))->capture_default_str();
    c_toy->add_option("--prune", toy.prune)->check(CLI::Range(0.0, 1.0));
    c_toy->add_option("--hadamard", toy.hadamard, "none|w|wa")->capture_default_str();
    c_toy->add_flag("--finetune", toy.finetune);
    c_toy->add_option("--tune", toy.tune, "all|ab|bounds|none (with --finetune)")->capture_default_str();
    c_toy->add_option("--iters", toy.iters)->capture_default_str();
    c_toy->add_option("--seeds", toy.seeds)->capture_default_str();
    c_toy->add_option("--seed", toy.seed, "base seed");
    c_toy->add_flag("--grid", toy.grid, "every hadamard x tune combination");
    c_toy->add_option("--out", toy.out, "CSV path");

    std::vector<std::string> report_in;
    bool report_csv = false;
    auto* c_rep = app.add_subcommand("report", "size and bits per parameter of CSRQ files");
    c_rep->add_option("--in", report_in)->required();
    c_rep->add_flag("--csv", report_csv);

    std::string met_a, met_b;
    bool met_luma = false;
    auto* c_met = app.add_subcommand("metrics", "PSNR and SSIM between two [H,W] or [H,W,C] images in [0,1]");
    c_met->add_option("--a", met_a)->required();
    c_met->add_option("--b", met_b)->required();
    c_met->add_flag("--luma", met_luma, "BT.601 Y channel only");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (c_had->parsed()) return cmd_hadamard(had, out, err);
        if (c_quant->parsed()) return cmd_quantize(quant, out, err);
        if (c_deq->parsed()) return cmd_dequantize(deq_in, deq_out, err);
        if (c_prune->parsed()) return cmd_prune(prune, out, err);
        if (c_ft->parsed()) return cmd_finetune(ft, out, err);
        if (c_an->parsed()) return cmd_analyze(an, out, err);
        if (c_syn->parsed()) return cmd_synth(syn, out, err);
        if (c_toy->parsed()) return cmd_toy_eval(toy, out, err);
        if (c_rep->parsed()) return cmd_report(report_in, report_csv, out, err);
        if (c_met->parsed()) return cmd_metrics(met_a, met_b, met_luma, out, err);
    } catch (const ArgumentError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    }
    return kExitUsage;
}

}  // namespace csrt::cli
