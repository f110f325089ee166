#include "compsrt/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>

#include "compsrt/errors.hpp"
#include "compsrt/hadamard.hpp"

namespace csrt {

namespace {

double poly(const double* c, int n, double x) {
    double r = c[n - 1];
    for (int i = n - 2; i >= 0; --i) r = r * x + c[i];
    return r;
}

// Royston's antisymmetric coefficients; returns a[0..n/2) for the lower half
// (the upper half mirrors with the opposite sign).
std::vector<double> shapiro_coefficients(std::size_t n) {
    const std::size_t half = n / 2;
    std::vector<double> a(half);
    if (n == 3) {
        a[0] = std::sqrt(0.5);
        return a;
    }
    static constexpr double c1[] = {0.0, 0.221157, -0.147981, -2.07119, 4.434685, -2.706056};
    static constexpr double c2[] = {0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633};
    const double an = static_cast<double>(n);
    std::vector<double> m(half);
    double summ2 = 0.0;
    for (std::size_t i = 0; i < half; ++i) {
        m[i] = normal_quantile((static_cast<double>(i + 1) - 0.375) / (an + 0.25));
        summ2 += m[i] * m[i];
    }
    summ2 *= 2.0;
    const double ssumm2 = std::sqrt(summ2);
    const double rsn = 1.0 / std::sqrt(an);
    const double a1 = poly(c1, 6, rsn) - m[0] / ssumm2;

    std::size_t first_scaled = 1;
    double fac = 0.0;
    if (n > 5) {
        first_scaled = 2;
        const double a2 = -m[1] / ssumm2 + poly(c2, 6, rsn);
        fac = std::sqrt((summ2 - 2.0 * m[0] * m[0] - 2.0 * m[1] * m[1]) / (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2));
        a[1] = a2;
    } else {
        fac = std::sqrt((summ2 - 2.0 * m[0] * m[0]) / (1.0 - 2.0 * a1 * a1));
    }
    a[0] = a1;
    for (std::size_t i = first_scaled; i < half; ++i) a[i] = -m[i] / fac;
    return a;
}

void require_nonempty(std::size_t n, const char* who) {
    if (n == 0) throw ArgumentError(std::string(who) + ": empty input");
}

}  // namespace

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw ArgumentError("normal_quantile: p must be in (0,1)");
    static constexpr double a[] = {3.3871328727963666080e0, 1.3314166789178437745e+2, 1.9715909503065514427e+3,
                                   1.3731693765509461125e+4, 4.5921953931549871457e+4, 6.7265770927008700853e+4,
                                   3.3430575583588128105e+4, 2.5090809287301226727e+3};
    static constexpr double b[] = {1.0,
                                   4.2313330701600911252e+1, 6.8718700749205790830e+2, 5.3941960214247511077e+3,
                                   2.1213794301586595867e+4, 3.9307895800092710610e+4, 2.8729085735721942674e+4,
                                   5.2264952788528545610e+3};
    static constexpr double c[] = {1.42343711074968357734e0, 4.63033784615654529590e0, 5.76949722146069140550e0,
                                   3.64784832476320460504e0, 1.27045825245236838258e0, 2.41780725177450611770e-1,
                                   2.27238449892691845833e-2, 7.74545014278341407640e-4};
    static constexpr double d[] = {1.0,
                                   2.05319162663775882187e0, 1.67638483018380384940e0, 6.89767334985100004550e-1,
                                   1.48103976427480074590e-1, 1.51986665636164571966e-2, 5.47593808499534494600e-4,
                                   1.05075007164441684324e-9};
    static constexpr double e[] = {6.65790464350110377720e0, 5.46378491116411436990e0, 1.78482653991729133580e0,
                                   2.96560571828504891230e-1, 2.65321895265761230930e-2, 1.24266094738807843860e-3,
                                   2.71155556874348757815e-5, 2.01033439929228813265e-7};
    static constexpr double f[] = {1.0,
                                   5.99832206555887937690e-1, 1.36929880922735805310e-1, 1.48753612908506148525e-2,
                                   7.86869131145613259100e-4, 1.84631831751005468180e-5, 1.42151175831644588870e-7,
                                   2.04426310338993978564e-15};
    const double q = p - 0.5;
    if (std::fabs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        return q * poly(a, 8, r) / poly(b, 8, r);
    }
    double r = q < 0.0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double val = 0.0;
    if (r <= 5.0) {
        r -= 1.6;
        val = poly(c, 8, r) / poly(d, 8, r);
    } else {
        r -= 5.0;
        val = poly(e, 8, r) / poly(f, 8, r);
    }
    return q < 0.0 ? -val : val;
}

double normal_upper_tail(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

double shapiro_wilk(std::span<const double> sample) {
    const std::size_t n = sample.size();
    if (n < 3) throw ArgumentError("shapiro_wilk: need at least 3 values");
    if (n > kShapiroMaxN) throw ArgumentError("shapiro_wilk: n exceeds " + std::to_string(kShapiroMaxN) + "; subsample first");
    std::vector<double> x(sample.begin(), sample.end());
    std::sort(x.begin(), x.end());
    if (!(x.back() > x.front())) throw DegenerateError("shapiro_wilk: zero variance sample");

    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
    double ss = 0.0;
    for (double& v : x) {
        v -= mean;
        ss += v * v;
    }
    const auto a = shapiro_coefficients(n);
    double num = 0.0;
    double asum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += a[i] * (x[n - 1 - i] - x[i]);
        asum += 2.0 * a[i] * a[i];
    }
    const double w = (num * num) / (asum * ss);
    return std::min(w, 1.0);
}

double eps_band_proportion(std::span<const float> x, double eps) {
    if (!(eps > 0.0)) throw ArgumentError("eps_band_proportion: eps must be positive");
    require_nonempty(x.size(), "eps_band_proportion");
    const auto inside = std::count_if(x.begin(), x.end(), [eps](float v) { return std::fabs(static_cast<double>(v)) <= eps; });
    return static_cast<double>(inside) / static_cast<double>(x.size());
}

double eps_band_proportion(const Tensor& x, double eps) { return eps_band_proportion(x.values(), eps); }

double tensor_range(std::span<const float> x) {
    require_nonempty(x.size(), "tensor_range");
    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    return static_cast<double>(*hi) - static_cast<double>(*lo);
}

double tensor_range(const Tensor& x) { return tensor_range(x.values()); }

double cohens_dz(std::span<const double> deltas) {
    if (deltas.size() < 2) throw DegenerateError("cohens_dz: need at least 2 deltas");
    const double n = static_cast<double>(deltas.size());
    const double mean = std::accumulate(deltas.begin(), deltas.end(), 0.0) / n;
    double ss = 0.0;
    for (double d : deltas) ss += (d - mean) * (d - mean);
    const double sd = std::sqrt(ss / (n - 1.0));
    if (!(sd > 0.0)) throw DegenerateError("cohens_dz: zero variance deltas");
    return mean / sd;
}

TestResult wilcoxon_one_sided(std::span<const double> deltas) {
    if (deltas.empty()) throw ArgumentError("wilcoxon_one_sided: no deltas");
    for (double d : deltas)
        if (!std::isfinite(d)) throw ValidationError("wilcoxon_one_sided: non-finite delta");

    std::vector<double> nz;
    for (double d : deltas)
        if (d != 0.0) nz.push_back(d);
    if (nz.empty()) throw DegenerateError("wilcoxon_one_sided: all deltas are zero");
    const std::size_t n = nz.size();

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return std::fabs(nz[a]) < std::fabs(nz[b]); });

    // Ranks are stored doubled so that tie averages stay integral.
    std::vector<std::uint64_t> rank2(n);
    double tie_term = 0.0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j + 1 < n && std::fabs(nz[order[j + 1]]) == std::fabs(nz[order[i]])) ++j;
        const std::uint64_t r2 = (i + 1) + (j + 1);
        for (std::size_t k = i; k <= j; ++k) rank2[order[k]] = r2;
        const double t = static_cast<double>(j - i + 1);
        tie_term += t * t * t - t;
        i = j + 1;
    }
    std::uint64_t w_plus2 = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (nz[i] > 0.0) w_plus2 += rank2[i];

    TestResult res;
    res.n_effective = n;
    res.statistic = static_cast<double>(w_plus2) / 2.0;
    res.d_z = cohens_dz(deltas);

    if (n <= kWilcoxonExactMaxN) {
        // counts[s] = number of sign assignments whose doubled W+ equals s.
        const std::uint64_t total2 = std::accumulate(rank2.begin(), rank2.end(), std::uint64_t{0});
        std::vector<std::uint64_t> counts(total2 + 1, 0);
        counts[0] = 1;
        std::uint64_t reach = 0;
        for (auto r : rank2) {
            for (std::uint64_t s = reach + 1; s-- > 0;)
                if (counts[s]) counts[s + r] += counts[s];
            reach += r;
        }
        std::uint64_t at_least = 0;
        for (std::uint64_t s = w_plus2; s <= total2; ++s) at_least += counts[s];
        res.p_value = std::ldexp(static_cast<double>(at_least), -static_cast<int>(n));
        res.exact = true;
    } else {
        const double nn = static_cast<double>(n);
        const double mean = nn * (nn + 1.0) / 4.0;
        const double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie_term / 48.0;
        if (!(var > 0.0)) throw DegenerateError("wilcoxon_one_sided: zero null variance");
        const double z = (res.statistic - mean - 0.5) / std::sqrt(var);
        res.p_value = std::clamp(normal_upper_tail(z), 0.0, 1.0);
    }
    return res;
}

std::vector<PairedSummary> summarize_pairs(std::span<const TensorPair> pairs, const AnalysisOptions& opts) {
    if (opts.sample_k == 0 || opts.shapiro_cap < 3 || opts.shapiro_cap > kShapiroMaxN)
        throw ArgumentError("summarize_pairs: sample size must be >= 1 and shapiro cap in [3, 5000]");
    const std::size_t k = std::min(opts.sample_k, opts.shapiro_cap);
    std::vector<PairedSummary> out;
    out.reserve(pairs.size());
    for (std::size_t j = 0; j < pairs.size(); ++j) {
        const auto& [pre, post] = pairs[j];
        if (post.numel() < pre.numel()) throw ArgumentError("summarize_pairs: post tensor shorter than pre");
        PairedSummary s;
        s.epsilon = opts.epsilon;

        const auto pre_sample = sample_elements(pre, k, derive_seed(opts.seed, 2 * j));
        const auto post_sample = sample_elements(post, k, derive_seed(opts.seed, 2 * j + 1));
        s.w_pre = shapiro_wilk(std::vector<double>(pre_sample.begin(), pre_sample.end()));
        s.w_post = shapiro_wilk(std::vector<double>(post_sample.begin(), post_sample.end()));

        s.range_pre = tensor_range(pre);
        if (post.numel() > pre.numel()) {
            // Right-padding with zeros puts 0 inside the pre range.
            const auto [lo, hi] = std::minmax_element(pre.values().begin(), pre.values().end());
            s.range_pre = std::max(0.0, static_cast<double>(*hi)) - std::min(0.0, static_cast<double>(*lo));
        }
        s.range_post = tensor_range(post);
        s.pband_pre = eps_band_proportion(pre, opts.epsilon);
        s.pband_post = eps_band_proportion(post, opts.epsilon);
        out.push_back(s);
    }
    return out;
}

namespace {

struct DeltaSets {
    std::vector<double> w, r, p;
};

DeltaSets deltas_of(std::span<const PairedSummary> summaries) {
    DeltaSets d;
    for (const auto& s : summaries) {
        d.w.push_back(s.w_post - s.w_pre);
        d.r.push_back(s.range_pre - s.range_post);
        d.p.push_back(s.pband_post - s.pband_pre);
    }
    return d;
}

std::optional<TestResult> try_test(std::span<const double> deltas) {
    try {
        return wilcoxon_one_sided(deltas);
    } catch (const DegenerateError&) {
        return std::nullopt;
    }
}

}  // namespace

HadamardAnalysis paired_hadamard_analysis(std::span<const TensorPair> pairs, const AnalysisOptions& opts) {
    if (pairs.size() < 2) throw ArgumentError("paired_hadamard_analysis: need at least 2 pairs");
    HadamardAnalysis out;
    out.summaries = summarize_pairs(pairs, opts);
    const auto d = deltas_of(out.summaries);
    out.delta_w = wilcoxon_one_sided(d.w);
    out.delta_r = wilcoxon_one_sided(d.r);
    out.delta_p = wilcoxon_one_sided(d.p);
    return out;
}

std::vector<double> default_eps_grid() {
    std::vector<double> grid{0.01};
    for (int i = 1; i <= 10; ++i) grid.push_back(i / 10.0);
    return grid;
}

std::vector<SweepRow> eps_sweep(std::span<const TensorPair> pairs, std::span<const double> grid,
                                const AnalysisOptions& opts) {
    if (pairs.size() < 2) throw ArgumentError("eps_sweep: need at least 2 pairs");
    if (grid.empty()) throw ArgumentError("eps_sweep: empty epsilon grid");
    auto summaries = summarize_pairs(pairs, opts);
    const auto base = deltas_of(summaries);
    const auto w_result = try_test(base.w);
    const auto r_result = try_test(base.r);

    std::vector<SweepRow> rows;
    for (double eps : grid) {
        SweepRow row;
        row.epsilon = eps;
        std::vector<double> dp;
        for (const auto& [pre, post] : pairs) {
            row.pband_pre.push_back(eps_band_proportion(pre, eps));
            row.pband_post.push_back(eps_band_proportion(post, eps));
            dp.push_back(row.pband_post.back() - row.pband_pre.back());
        }
        row.delta_w = w_result;
        row.delta_r = r_result;
        row.delta_p = try_test(dp);
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<TensorPair> synthetic_hadamard_pairs(std::size_t count, Seed seed, int df, double scale) {
    std::vector<TensorPair> pairs;
    pairs.reserve(count);
    for (std::size_t j = 0; j < count; ++j) {
        Rng rng(derive_seed(seed, j));
        const std::size_t rows = 8 + rng.below(25);
        const std::size_t cols = 20 + rng.below(101);
        Tensor pre = student_t_tensor({rows, cols}, df, scale, rng);
        Tensor post = hadamard_transform(pre).tensor;
        pairs.push_back({std::move(pre), std::move(post)});
    }
    return pairs;
}

}  // namespace csrt
