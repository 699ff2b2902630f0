#pragma once
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "scloss/metric_grid.hpp"
#include "scloss/unified_model.hpp"

// Shared internals of the unified-model evaluation and the descent loop.
// Arithmetic order is fixed everywhere (terms ascending, mu0 last, cells
// row-major) so results are reproducible bit-for-bit across entry points.

namespace scloss::detail {

template <typename Real>
Real clamp_exp_arg(Real x) {
    return std::clamp(x, Real(-kExpClamp), Real(kExpClamp));
}

/// Grid flattened for the inner loop, with the gamma axis already transformed
/// to the scale the parameter set consumes.
struct FlatProblem {
    std::vector<double> gamma;
    std::vector<double> rho;
    std::vector<double> y; // row-major, y[i * R + j]
    std::size_t G = 0;
    std::size_t R = 0;

    static FlatProblem from_grid(const MetricGrid& grid, GammaScale scale) {
        FlatProblem pb;
        pb.G = grid.rows();
        pb.R = grid.cols();
        pb.gamma.reserve(pb.G);
        for (double g : grid.gamma_axis)
            pb.gamma.push_back(scale == GammaScale::linear ? snr_db_to_linear(g) : g);
        pb.rho = grid.rho_axis;
        pb.y.reserve(pb.G * pb.R);
        for (std::size_t i = 0; i < pb.G; ++i)
            for (std::size_t j = 0; j < pb.R; ++j)
                pb.y.push_back(grid.values[i][j]);
        return pb;
    }
};

/// Reusable per-term factor buffers for the descent loop.
struct UnifiedWork {
    std::vector<double> sig;  // K*G
    std::vector<double> eta;  // K*R
    std::vector<double> beta; // K*R

    void resize(std::size_t k, std::size_t g, std::size_t r) {
        sig.resize(k * g);
        eta.resize(k * r);
        beta.resize(k * r);
    }
};

/// Computes the sum of squared residuals of `p` over `pb` and, when `grad` is
/// non-null, accumulates the analytic gradient into it (zeroing it first when
/// `zero_grad`). This is the single source of truth for both the standalone
/// gradient and the fitter iteration.
double unified_sse_grad(const FlatProblem& pb, const UnifiedParams& p, UnifiedWork& ws,
                        UnifiedGradient* grad, bool zero_grad);

/// Same objective evaluated in a chosen precision; the finite-difference
/// oracle instantiates this with long double so differencing does not lose
/// the small components to rounding.
template <typename Real>
Real sse_precise(const FlatProblem& pb, const UnifiedParams& p) {
    const std::size_t K = p.terms.size();
    std::vector<Real> sig(K * pb.G), beta(K * pb.R);
    for (std::size_t k = 0; k < K; ++k) {
        const Real mu3 = Real(p.terms[k].mu3), mu4 = Real(p.terms[k].mu4);
        const Real mu5 = Real(p.terms[k].mu5), mu6 = Real(p.terms[k].mu6);
        for (std::size_t i = 0; i < pb.G; ++i) {
            Real z = clamp_exp_arg(-mu3 * Real(pb.gamma[i]) - mu4);
            sig[k * pb.G + i] = Real(1) / (Real(1) + std::exp(z));
        }
        for (std::size_t j = 0; j < pb.R; ++j) {
            Real r = Real(pb.rho[j]);
            beta[k * pb.R + j] = std::exp(clamp_exp_arg(mu5 * r)) + mu6 * r;
        }
    }
    Real loss = 0;
    for (std::size_t i = 0; i < pb.G; ++i) {
        for (std::size_t j = 0; j < pb.R; ++j) {
            Real xi = 0;
            for (std::size_t k = 0; k < K; ++k)
                xi += (Real(p.terms[k].mu1) + Real(p.terms[k].mu2) * sig[k * pb.G + i]) *
                      beta[k * pb.R + j];
            xi += Real(p.mu0);
            Real e = Real(pb.y[i * pb.R + j]) - xi;
            loss += e * e;
        }
    }
    return loss;
}

} // namespace scloss::detail
