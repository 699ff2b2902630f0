#pragma once
#include <array>

#include "scloss/metric_grid.hpp"

namespace scloss {

/// The two published one-dimensional comparison models. Both are functions of
/// the linear-scale SNR s; like everywhere else in this library the public
/// interfaces take gamma in dB and the conversion s = 10^(gamma_db/10)
/// happens inside evaluation. The published fit-quality reference values are
/// reproducible only with this convention. Neither model reads rho: they are
/// fitted per fixed-rho slice.

/// Generalized sigmoid: k1 + k2 / (1 + exp(k3*s + k4)).
struct GSigmoidParams {
    double k1 = 0.0;
    double k2 = 0.0;
    double k3 = 0.0;
    double k4 = 0.0;
};

/// Sum of exponentials: k5*exp(k6*s) + k7*exp(k8*s) + k9.
struct SumExpParams {
    double k5 = 0.0;
    double k6 = 0.0;
    double k7 = 0.0;
    double k8 = 0.0;
    double k9 = 0.0;
};

double eval_gsigmoid(const GSigmoidParams& p, double gamma_db);
double eval_sumexp(const SumExpParams& p, double gamma_db);

double sse_gsigmoid(const GSigmoidParams& p, const MetricSlice& slice);
double sse_sumexp(const SumExpParams& p, const MetricSlice& slice);

/// Gradients of the squared-error objective over a slice, via the chain rule.
/// Order matches the parameter declaration order.
std::array<double, 4> gradient_gsigmoid(const GSigmoidParams& p, const MetricSlice& slice);
std::array<double, 5> gradient_sumexp(const SumExpParams& p, const MetricSlice& slice);

} // namespace scloss
