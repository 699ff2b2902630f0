#include "scloss/baseline_models.hpp"

#include <cmath>

#include "fit_internal.hpp"

namespace scloss {

double eval_gsigmoid(const GSigmoidParams& p, double gamma_db) {
    const double s = snr_db_to_linear(gamma_db);
    const double z = detail::clamp_exp_arg(p.k3 * s + p.k4);
    return p.k1 + p.k2 / (1.0 + std::exp(z));
}

double eval_sumexp(const SumExpParams& p, double gamma_db) {
    const double s = snr_db_to_linear(gamma_db);
    return p.k5 * std::exp(detail::clamp_exp_arg(p.k6 * s)) +
           p.k7 * std::exp(detail::clamp_exp_arg(p.k8 * s)) + p.k9;
}

double sse_gsigmoid(const GSigmoidParams& p, const MetricSlice& slice) {
    double loss = 0.0;
    for (std::size_t i = 0; i < slice.size(); ++i) {
        const double e = slice.values[i] - eval_gsigmoid(p, slice.gamma_axis[i]);
        loss += e * e;
    }
    return loss;
}

double sse_sumexp(const SumExpParams& p, const MetricSlice& slice) {
    double loss = 0.0;
    for (std::size_t i = 0; i < slice.size(); ++i) {
        const double e = slice.values[i] - eval_sumexp(p, slice.gamma_axis[i]);
        loss += e * e;
    }
    return loss;
}

std::array<double, 4> gradient_gsigmoid(const GSigmoidParams& p, const MetricSlice& slice) {
    std::array<double, 4> g{};
    for (std::size_t i = 0; i < slice.size(); ++i) {
        const double s = snr_db_to_linear(slice.gamma_axis[i]);
        const double z = detail::clamp_exp_arg(p.k3 * s + p.k4);
        const double sig = 1.0 / (1.0 + std::exp(z)); // d sig / dz = -sig(1-sig)
        const double e = slice.values[i] - (p.k1 + p.k2 * sig);
        const double m2e = -2.0 * e;
        const double dz = -p.k2 * sig * (1.0 - sig);
        g[0] += m2e;
        g[1] += m2e * sig;
        g[2] += m2e * dz * s;
        g[3] += m2e * dz;
    }
    return g;
}

std::array<double, 5> gradient_sumexp(const SumExpParams& p, const MetricSlice& slice) {
    std::array<double, 5> g{};
    for (std::size_t i = 0; i < slice.size(); ++i) {
        const double s = snr_db_to_linear(slice.gamma_axis[i]);
        const double e6 = std::exp(detail::clamp_exp_arg(p.k6 * s));
        const double e8 = std::exp(detail::clamp_exp_arg(p.k8 * s));
        const double e = slice.values[i] - (p.k5 * e6 + p.k7 * e8 + p.k9);
        const double m2e = -2.0 * e;
        g[0] += m2e * e6;
        g[1] += m2e * p.k5 * s * e6;
        g[2] += m2e * e8;
        g[3] += m2e * p.k7 * s * e8;
        g[4] += m2e;
    }
    return g;
}

} // namespace scloss
