#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "compsrt/rng.hpp"
#include "compsrt/tensor.hpp"

namespace csrt {

/// Largest sample accepted by shapiro_wilk.
inline constexpr std::size_t kShapiroMaxN = 5000;
/// Wilcoxon switches from exact enumeration to the normal approximation above this n.
inline constexpr std::size_t kWilcoxonExactMaxN = 25;

/// Inverse standard normal CDF (Wichura AS241, PPND16).
double normal_quantile(double p);
/// 1 - Phi(z).
double normal_upper_tail(double z);

/// Shapiro-Wilk W with Royston's (1992/1995) coefficient approximation.
/// Requires 3 <= n <= kShapiroMaxN; zero variance raises DegenerateError.
double shapiro_wilk(std::span<const double> sample);

/// Fraction of entries with |x| <= eps.
double eps_band_proportion(std::span<const float> x, double eps);
double eps_band_proportion(const Tensor& x, double eps);

/// max - min.
double tensor_range(std::span<const float> x);
double tensor_range(const Tensor& x);

struct TestResult {
    double statistic = 0.0;      // W+ (sum of ranks of positive deltas)
    double p_value = 1.0;        // one-sided, H1: median > 0
    std::size_t n_effective = 0; // after dropping zero deltas
    double d_z = 0.0;            // mean / sample std over all deltas
    bool exact = false;
};

/// One-sided Wilcoxon signed-rank test, zeros dropped, average ranks for
/// tied magnitudes. Exact null distribution when n_effective <= 25,
/// otherwise normal approximation with tie-corrected variance and a 0.5
/// continuity correction.
TestResult wilcoxon_one_sided(std::span<const double> deltas);

/// Cohen's d_z = mean / sample standard deviation (n - 1).
double cohens_dz(std::span<const double> deltas);

struct TensorPair {
    Tensor pre;
    Tensor post;
};

struct PairedSummary {
    double w_pre = 0.0;
    double w_post = 0.0;
    double range_pre = 0.0;   // pre right-padded with zeros to the post length
    double range_post = 0.0;
    double pband_pre = 0.0;
    double pband_post = 0.0;
    double epsilon = 0.0;
};

struct AnalysisOptions {
    double epsilon = 0.05;
    std::size_t sample_k = 1'000'000;
    /// Shapiro-Wilk runs on min(sample_k, shapiro_cap) sampled elements.
    std::size_t shapiro_cap = kShapiroMaxN;
    Seed seed{};
};

/// Per-pair summaries. Pair j samples pre with derive_seed(seed, 2j) and
/// post with derive_seed(seed, 2j + 1).
std::vector<PairedSummary> summarize_pairs(std::span<const TensorPair> pairs, const AnalysisOptions& opts);

struct HadamardAnalysis {
    std::vector<PairedSummary> summaries;
    TestResult delta_w;  // W_post - W_pre
    TestResult delta_r;  // R_pre - R_post
    TestResult delta_p;  // p_post - p_pre
};

/// Requires at least two pairs. Degenerate deltas propagate DegenerateError.
HadamardAnalysis paired_hadamard_analysis(std::span<const TensorPair> pairs, const AnalysisOptions& opts);

struct SweepRow {
    double epsilon = 0.0;
    std::vector<double> pband_pre;   // per pair
    std::vector<double> pband_post;
    std::optional<TestResult> delta_w;  // nullopt when degenerate
    std::optional<TestResult> delta_r;
    std::optional<TestResult> delta_p;
};

/// {0.01, 0.1, 0.2, ..., 1.0}.
std::vector<double> default_eps_grid();

/// Re-runs the three tests for every epsilon; W and range are computed once.
std::vector<SweepRow> eps_sweep(std::span<const TensorPair> pairs, std::span<const double> grid,
                                const AnalysisOptions& opts);

/// Synthetic suite of heavy-tailed tensors paired with their Hadamard
/// transforms. Shapes are [rows, cols] with rows in [8, 32] and cols in
/// [20, 120]; entries are scale * Student-t(df).
std::vector<TensorPair> synthetic_hadamard_pairs(std::size_t count, Seed seed, int df = 3, double scale = 0.01);

}  // namespace csrt
