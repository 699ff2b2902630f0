#pragma once
#include <array>
#include <cstddef>
#include <vector>

#include "scloss/metric_grid.hpp"

namespace scloss {

/// SNR scale a parameter set was calibrated against. Grids always carry dB;
/// a `linear` parameter set maps gamma to 10^(gamma_db/10) before evaluation.
/// Sets fitted by this library use `db` (the axis is consumed as tabulated);
/// the published sets shipped in tables.hpp were calibrated against linear
/// SNR and are tagged accordingly.
enum class GammaScale { db, linear };

/// Converts an SNR in dB to linear scale.
double snr_db_to_linear(double gamma_db);

/// One additive term of the unified loss surface:
///   (mu1 + mu2 / (1 + exp(-mu3*g - mu4))) * (exp(mu5*rho) + mu6*rho)
struct TermParams {
    double mu1 = 0.0; ///< amplitude
    double mu2 = 0.0; ///< sigmoid amplitude
    double mu3 = 0.0; ///< sigmoid slope in g
    double mu4 = 0.0; ///< sigmoid offset
    double mu5 = 0.0; ///< exponential rate in rho
    double mu6 = 0.0; ///< linear-in-rho coefficient
};

/// Full parameter set of the unified two-dimensional loss model: an offset
/// mu0 plus n_c() product terms.
struct UnifiedParams {
    double mu0 = 0.0;
    std::vector<TermParams> terms;
    GammaScale gamma_scale = GammaScale::db;

    std::size_t n_c() const { return terms.size(); }
};

/// Per-term intermediate quantities shared by evaluation and gradients.
struct TermIntermediates {
    double sigma; ///< sigmoid value, in (0,1) after argument clamping
    double eta;   ///< exp(mu5*rho), > 0
    double beta;  ///< eta + mu6*rho
};

/// Gradient of the sum of squared residuals with respect to every parameter.
/// d_terms[k] holds d/d{mu1..mu6} of term k, in that order.
struct UnifiedGradient {
    double d_mu0 = 0.0;
    std::vector<std::array<double, 6>> d_terms;
};

/// Exponent arguments are clamped to [-500, 500] before exp() so exploratory
/// parameter values cannot overflow. 500 is far outside any fitted regime.
inline constexpr double kExpClamp = 500.0;

/// sigma = 1/(1+exp(-mu3*gamma - mu4)), eta = exp(mu5*rho), beta = eta + mu6*rho.
/// `gamma` is consumed exactly as given (scale handling lives in eval_point).
TermIntermediates term_intermediates(const TermParams& t, double gamma, double rho);

/// Evaluates the unified model at one point. Summation order is fixed: terms
/// in ascending index order, mu0 added last.
double eval_point(const UnifiedParams& p, double gamma_db, double rho);

/// values[i][j] = eval_point(p, grid.gamma_axis[i], grid.rho_axis[j]).
std::vector<std::vector<double>> eval_grid(const UnifiedParams& p, const MetricGrid& grid);

/// Element-wise measured-minus-fitted residual matrix.
std::vector<std::vector<double>> residuals(const UnifiedParams& p, const MetricGrid& grid);

/// Sum of squared residuals over the whole grid.
double sse(const UnifiedParams& p, const MetricGrid& grid);

/// Analytic gradient of sse accumulated over all grid cells.
UnifiedGradient analytic_gradient(const UnifiedParams& p, const MetricGrid& grid);

/// Central finite difference (sse(theta+h) - sse(theta-h)) / (2h) per
/// parameter, with a fixed absolute step. The objective is accumulated in
/// extended precision so the subtraction does not drown small components.
UnifiedGradient finite_diff_gradient(const UnifiedParams& p, const MetricGrid& grid, double h);

/// Finite differences with a per-parameter step max(rel_step*|theta|, abs_floor).
UnifiedGradient finite_diff_gradient_scaled(const UnifiedParams& p, const MetricGrid& grid,
                                            double rel_step = 1e-6, double abs_floor = 1e-8);

} // namespace scloss
