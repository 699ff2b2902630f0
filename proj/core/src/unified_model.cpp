#include "scloss/unified_model.hpp"

#include <cmath>

#include "fit_internal.hpp"

namespace scloss {

double snr_db_to_linear(double gamma_db) {
    return std::pow(10.0, gamma_db / 10.0);
}

TermIntermediates term_intermediates(const TermParams& t, double gamma, double rho) {
    TermIntermediates out;
    const double z = detail::clamp_exp_arg(-t.mu3 * gamma - t.mu4);
    out.sigma = 1.0 / (1.0 + std::exp(z));
    out.eta = std::exp(detail::clamp_exp_arg(t.mu5 * rho));
    out.beta = out.eta + t.mu6 * rho;
    return out;
}

double eval_point(const UnifiedParams& p, double gamma_db, double rho) {
    const double g = p.gamma_scale == GammaScale::linear ? snr_db_to_linear(gamma_db) : gamma_db;
    double acc = 0.0;
    for (const TermParams& t : p.terms) {
        const TermIntermediates ti = term_intermediates(t, g, rho);
        acc += (t.mu1 + t.mu2 * ti.sigma) * ti.beta;
    }
    return acc + p.mu0;
}

std::vector<std::vector<double>> eval_grid(const UnifiedParams& p, const MetricGrid& grid) {
    std::vector<std::vector<double>> out(grid.rows(), std::vector<double>(grid.cols()));
    for (std::size_t i = 0; i < grid.rows(); ++i)
        for (std::size_t j = 0; j < grid.cols(); ++j)
            out[i][j] = eval_point(p, grid.gamma_axis[i], grid.rho_axis[j]);
    return out;
}

std::vector<std::vector<double>> residuals(const UnifiedParams& p, const MetricGrid& grid) {
    auto out = eval_grid(p, grid);
    for (std::size_t i = 0; i < grid.rows(); ++i)
        for (std::size_t j = 0; j < grid.cols(); ++j)
            out[i][j] = grid.values[i][j] - out[i][j];
    return out;
}

double sse(const UnifiedParams& p, const MetricGrid& grid) {
    auto pb = detail::FlatProblem::from_grid(grid, p.gamma_scale);
    detail::UnifiedWork ws;
    return detail::unified_sse_grad(pb, p, ws, nullptr, false);
}

UnifiedGradient analytic_gradient(const UnifiedParams& p, const MetricGrid& grid) {
    auto pb = detail::FlatProblem::from_grid(grid, p.gamma_scale);
    detail::UnifiedWork ws;
    UnifiedGradient grad;
    detail::unified_sse_grad(pb, p, ws, &grad, true);
    return grad;
}

namespace {

// Enumerates parameters in a fixed order: mu0, then mu1..mu6 per term.
double* param_slot(UnifiedParams& p, std::size_t idx) {
    if (idx == 0)
        return &p.mu0;
    TermParams& t = p.terms[(idx - 1) / 6];
    switch ((idx - 1) % 6) {
    case 0: return &t.mu1;
    case 1: return &t.mu2;
    case 2: return &t.mu3;
    case 3: return &t.mu4;
    case 4: return &t.mu5;
    default: return &t.mu6;
    }
}

UnifiedGradient finite_diff_impl(const UnifiedParams& p, const MetricGrid& grid,
                                 double fixed_h, double rel_step, double abs_floor) {
    auto pb = detail::FlatProblem::from_grid(grid, p.gamma_scale);
    UnifiedGradient grad;
    grad.d_terms.assign(p.terms.size(), {});
    UnifiedParams work = p;
    const std::size_t n = 1 + 6 * p.terms.size();
    for (std::size_t idx = 0; idx < n; ++idx) {
        double* slot = param_slot(work, idx);
        const double theta = *slot;
        const double h = fixed_h > 0.0 ? fixed_h
                                       : std::max(rel_step * std::abs(theta), abs_floor);
        *slot = theta + h;
        const long double up = detail::sse_precise<long double>(pb, work);
        *slot = theta - h;
        const long double down = detail::sse_precise<long double>(pb, work);
        *slot = theta;
        const double d = static_cast<double>((up - down) / (2.0L * (long double)h));
        if (idx == 0)
            grad.d_mu0 = d;
        else
            grad.d_terms[(idx - 1) / 6][(idx - 1) % 6] = d;
    }
    return grad;
}

} // namespace

UnifiedGradient finite_diff_gradient(const UnifiedParams& p, const MetricGrid& grid, double h) {
    if (!(h > 0.0))
        throw Error("finite difference step must be positive");
    return finite_diff_impl(p, grid, h, 0.0, 0.0);
}

UnifiedGradient finite_diff_gradient_scaled(const UnifiedParams& p, const MetricGrid& grid,
                                            double rel_step, double abs_floor) {
    if (!(rel_step > 0.0) || !(abs_floor > 0.0))
        throw Error("finite difference steps must be positive");
    return finite_diff_impl(p, grid, 0.0, rel_step, abs_floor);
}

namespace detail {

double unified_sse_grad(const FlatProblem& pb, const UnifiedParams& p, UnifiedWork& ws,
                        UnifiedGradient* grad, bool zero_grad) {
    const std::size_t K = p.terms.size(), G = pb.G, R = pb.R;
    ws.resize(K, G, R);
    for (std::size_t k = 0; k < K; ++k) {
        const TermParams& t = p.terms[k];
        for (std::size_t i = 0; i < G; ++i) {
            const double z = clamp_exp_arg(-t.mu3 * pb.gamma[i] - t.mu4);
            ws.sig[k * G + i] = 1.0 / (1.0 + std::exp(z));
        }
        for (std::size_t j = 0; j < R; ++j) {
            const double eta = std::exp(clamp_exp_arg(t.mu5 * pb.rho[j]));
            ws.eta[k * R + j] = eta;
            ws.beta[k * R + j] = eta + t.mu6 * pb.rho[j];
        }
    }

    if (grad) {
        if (grad->d_terms.size() != K)
            grad->d_terms.assign(K, {});
        if (zero_grad) {
            grad->d_mu0 = 0.0;
            for (auto& g : grad->d_terms)
                g.fill(0.0);
        }
    }

    double loss = 0.0;
    for (std::size_t i = 0; i < G; ++i) {
        for (std::size_t j = 0; j < R; ++j) {
            double xi = 0.0;
            for (std::size_t k = 0; k < K; ++k)
                xi += (p.terms[k].mu1 + p.terms[k].mu2 * ws.sig[k * G + i]) * ws.beta[k * R + j];
            xi += p.mu0;
            const double e = pb.y[i * R + j] - xi;
            loss += e * e;
            if (!grad)
                continue;
            const double m2e = -2.0 * e;
            for (std::size_t k = 0; k < K; ++k) {
                const TermParams& t = p.terms[k];
                const double sig = ws.sig[k * G + i];
                const double beta = ws.beta[k * R + j];
                const double amp = t.mu1 + t.mu2 * sig;
                const double slope = t.mu2 * sig * (1.0 - sig);
                auto& g = grad->d_terms[k];
                g[0] += m2e * beta;
                g[1] += m2e * beta * sig;
                g[2] += m2e * beta * slope * pb.gamma[i];
                g[3] += m2e * beta * slope;
                g[4] += m2e * ws.eta[k * R + j] * pb.rho[j] * amp;
                g[5] += m2e * pb.rho[j] * amp;
            }
            grad->d_mu0 += m2e;
        }
    }
    return loss;
}

} // namespace detail

} // namespace scloss
