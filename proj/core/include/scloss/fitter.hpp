#pragma once
#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "scloss/baseline_models.hpp"
#include "scloss/metric_grid.hpp"
#include "scloss/unified_model.hpp"

namespace scloss {

/// Configuration of the full-batch gradient-descent fitter.
///
/// alphas[i] is the learning rate of parameter group mu_i (alphas[0] for the
/// offset). Defaults follow the published setup: 1e-4 for mu0..mu2, 1e-9 for
/// mu3/mu4, 1e-10 for mu5; mu6 was not given a published rate and defaults to
/// the smallest one, 1e-10, since like mu5 it multiplies rho inside every term.
struct FitConfig {
    int n_c = 6;
    std::array<double, 7> alphas{1e-4, 1e-4, 1e-4, 1e-9, 1e-9, 1e-10, 1e-10};
    long max_iters = 200000;
    int n_starts = 16;
    std::uint64_t seed = 0;
    double rel_tol = 1e-12;
    int patience = 500;
    /// Gradient accumulators are cleared at the top of every iteration. The
    /// source pseudocode zeroes them once, outside the loop, which makes each
    /// update proportional to the running sum of all past gradients and
    /// diverges under constant step sizes; set false to run that literal
    /// variant anyway.
    bool reset_gradients = true;

    /// Throws std::invalid_argument on out-of-range fields.
    void validate() const;
};

/// Outcome of one multi-start fit.
struct FitReport {
    double final_sse = 0.0;
    double final_avg_mse = 0.0; ///< final_sse / data cell count
    long iterations_used = 0;   ///< iterations run by the winning start
    bool converged = false;     ///< winning start stopped on the rel_tol/patience rule
    int best_start_index = -1;
    std::vector<double> loss_curve; ///< winning start's loss every 100 iterations, plus final
    bool divergence_flag = false;   ///< some start produced a non-finite loss
    std::vector<double> start_final_sse; ///< per start; NaN where diverged
    std::vector<bool> start_diverged;
};

/// Fits the unified model to a 2D grid: for each start, parameters are drawn
/// from seeded data-scaled ranges (RNG seeded with cfg.seed + start index) and
/// updated by plain gradient descent with per-group learning rates until
/// max_iters or until the relative loss change stays below rel_tol for
/// `patience` iterations. Returns the lowest-SSE start (ties break to the
/// lowest index). Deterministic for fixed inputs. Throws DivergenceError only
/// if every start produced a non-finite loss.
std::pair<UnifiedParams, FitReport> fit_unified(const MetricGrid& grid, const FitConfig& cfg);

/// Per-slice baseline fits: multi-start gradient descent from data-scaled
/// initializations followed by a derivative-free polish pass (three rounds of
/// coordinate-wise golden-section search, bracket +/-10% per parameter; the
/// sum-of-exponentials objective is too ill-conditioned for descent alone).
/// Baseline learning rates scale proportionally with cfg.alphas[1].
std::pair<GSigmoidParams, FitReport> fit_gsigmoid(const MetricSlice& slice, const FitConfig& cfg);
std::pair<SumExpParams, FitReport> fit_sumexp(const MetricSlice& slice, const FitConfig& cfg);

/// Verification of the analytic gradient against central finite differences.
struct GradientCheckReport {
    int draws = 0;
    std::uint64_t seed = 0;
    double tolerance = 1e-6;
    double abs_floor = 1e-8;
    std::array<double, 7> max_rel_err{}; ///< worst relative error per parameter group
    bool passed = false;
};

/// Hook applied to the analytic gradient before comparison; used by tests and
/// the CLI as a negative control.
using GradientHook = std::function<void(UnifiedGradient&)>;

/// Draws `n_draws` seeded random parameter sets (n_c = 6) and compares
/// analytic_gradient against finite_diff_gradient_scaled on `grid`. A
/// component passes when |a - f| <= max(tolerance * max(|a|,|f|), abs_floor).
/// Failures are reported, never thrown.
GradientCheckReport gradient_check(const MetricGrid& grid, int n_draws, std::uint64_t seed,
                                   const GradientHook& corrupt = nullptr);

} // namespace scloss
