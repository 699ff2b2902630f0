#include "scloss/fitter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "fit_internal.hpp"

namespace scloss {

namespace {

constexpr int kCurveStride = 100;

double uniform(std::mt19937_64& rng, double lo, double hi) {
    // fixed 53-bit mapping, identical on every platform
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return lo + u * (hi - lo);
}

struct DataStats {
    double mean = 0.0;
    double min = 0.0;
    double max = 0.0;
    double range() const { return max - min; }
};

DataStats stats_of(const std::vector<double>& y) {
    DataStats s;
    s.min = s.max = y.front();
    double sum = 0.0;
    for (double v : y) {
        sum += v;
        s.min = std::min(s.min, v);
        s.max = std::max(s.max, v);
    }
    s.mean = sum / static_cast<double>(y.size());
    return s;
}

struct StartOutcome {
    double final_sse = std::numeric_limits<double>::quiet_NaN();
    long iterations = 0;
    bool converged = false;
    bool diverged = false;
    std::vector<double> curve;
};

/// Shared stopping rule: relative loss change below rel_tol for `patience`
/// consecutive iterations.
class StallCounter {
public:
    StallCounter(double rel_tol, int patience) : rel_tol_(rel_tol), patience_(patience) {}
    bool update(double loss) {
        if (has_prev_) {
            const double rel = std::abs(prev_ - loss) / std::max(prev_, 1e-300);
            stall_ = rel <= rel_tol_ ? stall_ + 1 : 0;
        }
        prev_ = loss;
        has_prev_ = true;
        return stall_ >= patience_;
    }

private:
    double rel_tol_;
    int patience_;
    double prev_ = 0.0;
    bool has_prev_ = false;
    int stall_ = 0;
};

StartOutcome descend_unified(const detail::FlatProblem& pb, UnifiedParams& p,
                             const FitConfig& cfg) {
    StartOutcome out;
    detail::UnifiedWork ws;
    UnifiedGradient grad;
    grad.d_terms.assign(p.terms.size(), {});
    StallCounter stop(cfg.rel_tol, cfg.patience);
    for (long iter = 0; iter < cfg.max_iters; ++iter) {
        const double loss = detail::unified_sse_grad(pb, p, ws, &grad, cfg.reset_gradients);
        if (iter % kCurveStride == 0)
            out.curve.push_back(loss);
        if (!std::isfinite(loss)) {
            out.diverged = true;
            return out;
        }
        if (stop.update(loss)) {
            out.converged = true;
            break;
        }
        p.mu0 -= cfg.alphas[0] * grad.d_mu0;
        for (std::size_t k = 0; k < p.terms.size(); ++k) {
            TermParams& t = p.terms[k];
            const auto& g = grad.d_terms[k];
            t.mu1 -= cfg.alphas[1] * g[0];
            t.mu2 -= cfg.alphas[2] * g[1];
            t.mu3 -= cfg.alphas[3] * g[2];
            t.mu4 -= cfg.alphas[4] * g[3];
            t.mu5 -= cfg.alphas[5] * g[4];
            t.mu6 -= cfg.alphas[6] * g[5];
        }
        ++out.iterations;
    }
    out.final_sse = detail::unified_sse_grad(pb, p, ws, nullptr, false);
    if (!std::isfinite(out.final_sse)) {
        out.diverged = true;
        return out;
    }
    out.curve.push_back(out.final_sse);
    return out;
}

UnifiedParams draw_unified_start(std::uint64_t seed, int n_c, const DataStats& st) {
    std::mt19937_64 rng(seed);
    UnifiedParams p;
    p.mu0 = st.mean;
    p.terms.resize(static_cast<std::size_t>(n_c));
    for (TermParams& t : p.terms) {
        t.mu1 = uniform(rng, -1.0, 1.0) * st.range();
        t.mu2 = uniform(rng, -1.0, 1.0) * st.range();
        t.mu3 = uniform(rng, -1.0, 1.0);
        t.mu4 = uniform(rng, -2.0, 2.0);
        t.mu5 = uniform(rng, -0.05, 0.0); // keeps exp(mu5*rho) <= 1 at the start
        t.mu6 = uniform(rng, -0.1, 0.1);
    }
    return p;
}

template <typename Params, typename RunStart>
std::pair<Params, FitReport> multi_start(const FitConfig& cfg, std::size_t cells,
                                         const RunStart& run_start) {
    FitReport report;
    report.start_final_sse.resize(static_cast<std::size_t>(cfg.n_starts),
                                  std::numeric_limits<double>::quiet_NaN());
    report.start_diverged.assign(static_cast<std::size_t>(cfg.n_starts), false);

    Params best{};
    StartOutcome best_out;
    bool have_best = false;
    for (int s = 0; s < cfg.n_starts; ++s) {
        Params p{};
        StartOutcome out = run_start(s, p);
        report.start_diverged[static_cast<std::size_t>(s)] = out.diverged;
        report.divergence_flag = report.divergence_flag || out.diverged;
        if (out.diverged)
            continue;
        report.start_final_sse[static_cast<std::size_t>(s)] = out.final_sse;
        if (!have_best || out.final_sse < best_out.final_sse) {
            best = p;
            best_out = std::move(out);
            report.best_start_index = s;
            have_best = true;
        }
    }
    if (!have_best)
        throw DivergenceError("loss became non-finite in every start");
    report.final_sse = best_out.final_sse;
    report.final_avg_mse = best_out.final_sse / static_cast<double>(cells);
    report.iterations_used = best_out.iterations;
    report.converged = best_out.converged;
    report.loss_curve = std::move(best_out.curve);
    return {best, report};
}

} // namespace

void FitConfig::validate() const {
    if (n_c < 0)
        throw std::invalid_argument("n_c must be >= 0");
    for (double a : alphas)
        if (!(a >= 0.0) || !std::isfinite(a))
            throw std::invalid_argument("learning rates must be finite and >= 0");
    if (max_iters < 1)
        throw std::invalid_argument("max_iters must be >= 1");
    if (n_starts < 1)
        throw std::invalid_argument("n_starts must be >= 1");
    if (!(rel_tol >= 0.0))
        throw std::invalid_argument("rel_tol must be >= 0");
    if (patience < 1)
        throw std::invalid_argument("patience must be >= 1");
}

std::pair<UnifiedParams, FitReport> fit_unified(const MetricGrid& grid, const FitConfig& cfg) {
    cfg.validate();
    grid.validate();
    const auto pb = detail::FlatProblem::from_grid(grid, GammaScale::db);
    const DataStats st = stats_of(pb.y);
    return multi_start<UnifiedParams>(cfg, grid.cells(), [&](int s, UnifiedParams& p) {
        p = draw_unified_start(cfg.seed + static_cast<std::uint64_t>(s), cfg.n_c, st);
        return descend_unified(pb, p, cfg);
    });
}

// ---------------------------------------------------------------------------
// baselines: gradient descent over a small parameter array + polish pass
// ---------------------------------------------------------------------------

namespace {

/// Slice with the SNR axis pre-converted to linear scale for the inner loop.
struct SliceProblem {
    std::vector<double> s;
    std::vector<double> y;
};

SliceProblem slice_problem(const MetricSlice& slice) {
    SliceProblem pb;
    pb.s.reserve(slice.size());
    for (double g : slice.gamma_axis)
        pb.s.push_back(snr_db_to_linear(g));
    pb.y = slice.values;
    return pb;
}

struct GSigTraits {
    static constexpr std::size_t n_params = 4;
    using Array = std::array<double, 4>;

    static double eval(const Array& k, double s) {
        const double z = detail::clamp_exp_arg(k[2] * s + k[3]);
        return k[0] + k[1] / (1.0 + std::exp(z));
    }
    static void add_gradient(const Array& k, double s, double m2e, Array& g) {
        const double z = detail::clamp_exp_arg(k[2] * s + k[3]);
        const double sig = 1.0 / (1.0 + std::exp(z));
        const double dz = -k[1] * sig * (1.0 - sig);
        g[0] += m2e;
        g[1] += m2e * sig;
        g[2] += m2e * dz * s;
        g[3] += m2e * dz;
    }
    // amplitudes first (k1, k2), exponent shape last (k3, k4)
    static Array rates(double scale) {
        return {2e-3 * scale, 2e-3 * scale, 2e-5 * scale, 2e-5 * scale};
    }
    static Array heuristic_start(const DataStats& st) {
        return {st.min, st.range(), -0.5, 0.0};
    }
    static Array jittered_start(std::mt19937_64& rng, const DataStats& st, double s_lo,
                                double s_hi) {
        Array k;
        if (uniform(rng, 0.0, 1.0) < 0.5) {
            // transition regime: sigmoid midpoint inside the observed SNR span
            k[0] = st.min + uniform(rng, -0.3, 0.3) * st.range();
            const double orient = uniform(rng, 0.0, 1.0) < 0.5 ? 1.0 : -1.0;
            k[1] = orient * st.range() * uniform(rng, 0.5, 2.5);
            k[2] = -orient * uniform(rng, 0.1, 3.0);
            k[3] = -k[2] * uniform(rng, s_lo, s_hi);
        } else {
            // tail regime: large |k2| with the sigmoid in its exponential tail,
            // k1 + k2*exp(-(k3*s + k4)); good slice fits often live here
            const double mag = uniform(rng, 0.0, 6.0); // log10(|k2| / range)
            const bool saturate_high = uniform(rng, 0.0, 1.0) < 0.5;
            k[0] = (saturate_high ? st.max : st.min) + uniform(rng, -0.2, 0.2) * st.range();
            k[1] = (saturate_high ? -1.0 : 1.0) * std::max(st.range(), 1e-3) *
                   std::pow(10.0, mag);
            k[2] = uniform(rng, 0.2, 3.0);
            // match the low end of the span to the data scale
            k[3] = mag * std::numbers::ln10 - k[2] * s_lo + uniform(rng, -1.0, 1.0);
        }
        return k;
    }
};

struct SumExpTraits {
    static constexpr std::size_t n_params = 5;
    using Array = std::array<double, 5>;

    static double eval(const Array& k, double s) {
        return k[0] * std::exp(detail::clamp_exp_arg(k[1] * s)) +
               k[2] * std::exp(detail::clamp_exp_arg(k[3] * s)) + k[4];
    }
    static void add_gradient(const Array& k, double s, double m2e, Array& g) {
        const double e6 = std::exp(detail::clamp_exp_arg(k[1] * s));
        const double e8 = std::exp(detail::clamp_exp_arg(k[3] * s));
        g[0] += m2e * e6;
        g[1] += m2e * k[0] * s * e6;
        g[2] += m2e * e8;
        g[3] += m2e * k[2] * s * e8;
        g[4] += m2e;
    }
    static Array rates(double scale) {
        return {1e-3 * scale, 1e-5 * scale, 1e-3 * scale, 1e-5 * scale, 1e-3 * scale};
    }
    static Array heuristic_start(const DataStats& st, std::mt19937_64& rng) {
        Array k;
        k[0] = 0.05 * st.range() * uniform(rng, -1.0, 1.0);
        k[1] = 0.1;
        k[2] = 0.05 * st.range() * uniform(rng, -1.0, 1.0);
        k[3] = -0.1;
        k[4] = st.mean;
        return k;
    }
    static Array jittered_start(std::mt19937_64& rng, const DataStats& st, double, double) {
        Array k;
        k[0] = uniform(rng, -1.0, 1.0) * st.range();
        k[1] = uniform(rng, -1.5, 0.3);
        k[2] = uniform(rng, -1.0, 1.0) * st.range();
        k[3] = uniform(rng, -1.5, 0.3);
        k[4] = st.mean + uniform(rng, -0.3, 0.3) * st.range();
        return k;
    }
};

template <typename Traits>
double slice_sse(const SliceProblem& pb, const typename Traits::Array& k) {
    double loss = 0.0;
    for (std::size_t i = 0; i < pb.s.size(); ++i) {
        const double e = pb.y[i] - Traits::eval(k, pb.s[i]);
        loss += e * e;
    }
    return loss;
}

/// Golden-section minimum of f over [lo, hi].
template <typename F>
double golden_section(const F& f, double lo, double hi) {
    constexpr double inv_phi = 0.6180339887498949;
    double a = lo, b = hi;
    double c = b - (b - a) * inv_phi;
    double d = a + (b - a) * inv_phi;
    double fc = f(c), fd = f(d);
    for (int it = 0; it < 80 && (b - a) > 1e-14 * (std::abs(a) + std::abs(b) + 1e-12); ++it) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - (b - a) * inv_phi;
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + (b - a) * inv_phi;
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

/// Three rounds of coordinate-wise golden-section refinement, bracket +/-10%
/// of each parameter (with a small absolute floor so zero coordinates still
/// get a bracket). Each move is accepted only if it lowers the objective.
template <typename Traits>
void polish(const SliceProblem& pb, typename Traits::Array& k) {
    for (int round = 0; round < 3; ++round) {
        for (std::size_t c = 0; c < Traits::n_params; ++c) {
            const double delta = std::max(0.1 * std::abs(k[c]), 1e-6);
            const double cur = slice_sse<Traits>(pb, k);
            auto f = [&](double x) {
                auto trial = k;
                trial[c] = x;
                return slice_sse<Traits>(pb, trial);
            };
            const double x = golden_section(f, k[c] - delta, k[c] + delta);
            if (f(x) < cur)
                k[c] = x;
        }
    }
}

template <typename Traits>
StartOutcome descend_baseline(const SliceProblem& pb, typename Traits::Array& k,
                              const typename Traits::Array& rates, const FitConfig& cfg) {
    StartOutcome out;
    StallCounter stop(cfg.rel_tol, cfg.patience);
    for (long iter = 0; iter < cfg.max_iters; ++iter) {
        typename Traits::Array grad{};
        double loss = 0.0;
        for (std::size_t i = 0; i < pb.s.size(); ++i) {
            const double e = pb.y[i] - Traits::eval(k, pb.s[i]);
            loss += e * e;
            Traits::add_gradient(k, pb.s[i], -2.0 * e, grad);
        }
        if (iter % kCurveStride == 0)
            out.curve.push_back(loss);
        if (!std::isfinite(loss)) {
            out.diverged = true;
            return out;
        }
        if (stop.update(loss)) {
            out.converged = true;
            break;
        }
        for (std::size_t c = 0; c < Traits::n_params; ++c)
            k[c] -= rates[c] * grad[c];
        ++out.iterations;
    }
    polish<Traits>(pb, k);
    out.final_sse = slice_sse<Traits>(pb, k);
    if (!std::isfinite(out.final_sse)) {
        out.diverged = true;
        return out;
    }
    out.curve.push_back(out.final_sse);
    return out;
}

template <typename Traits, typename Params>
std::pair<Params, FitReport> fit_baseline(const MetricSlice& slice, const FitConfig& cfg) {
    cfg.validate();
    slice.validate();
    const SliceProblem pb = slice_problem(slice);
    const DataStats st = stats_of(pb.y);
    const double s_lo = *std::min_element(pb.s.begin(), pb.s.end());
    const double s_hi = *std::max_element(pb.s.begin(), pb.s.end());
    const double rate_scale = cfg.alphas[1] / 1e-4;
    const auto rates = Traits::rates(rate_scale);

    auto [arr, report] = multi_start<typename Traits::Array>(
        cfg, slice.size(), [&](int s, typename Traits::Array& k) {
            std::mt19937_64 rng(cfg.seed + static_cast<std::uint64_t>(s));
            if constexpr (std::is_same_v<Traits, GSigTraits>)
                k = s == 0 ? Traits::heuristic_start(st)
                           : Traits::jittered_start(rng, st, s_lo, s_hi);
            else
                k = s == 0 ? Traits::heuristic_start(st, rng)
                           : Traits::jittered_start(rng, st, s_lo, s_hi);
            return descend_baseline<Traits>(pb, k, rates, cfg);
        });

    Params p{};
    if constexpr (std::is_same_v<Params, GSigmoidParams>) {
        p.k1 = arr[0];
        p.k2 = arr[1];
        p.k3 = arr[2];
        p.k4 = arr[3];
    } else {
        p.k5 = arr[0];
        p.k6 = arr[1];
        p.k7 = arr[2];
        p.k8 = arr[3];
        p.k9 = arr[4];
    }
    return {p, report};
}

} // namespace

std::pair<GSigmoidParams, FitReport> fit_gsigmoid(const MetricSlice& slice, const FitConfig& cfg) {
    return fit_baseline<GSigTraits, GSigmoidParams>(slice, cfg);
}

std::pair<SumExpParams, FitReport> fit_sumexp(const MetricSlice& slice, const FitConfig& cfg) {
    return fit_baseline<SumExpTraits, SumExpParams>(slice, cfg);
}

// ---------------------------------------------------------------------------

GradientCheckReport gradient_check(const MetricGrid& grid, int n_draws, std::uint64_t seed,
                                   const GradientHook& corrupt) {
    if (n_draws < 1)
        throw std::invalid_argument("n_draws must be >= 1");
    grid.validate();

    const auto pb = detail::FlatProblem::from_grid(grid, GammaScale::db);
    const DataStats st = stats_of(pb.y);
    GradientCheckReport rep;
    rep.draws = n_draws;
    rep.seed = seed;
    rep.passed = true;

    std::mt19937_64 rng(seed);
    for (int d = 0; d < n_draws; ++d) {
        UnifiedParams p;
        p.mu0 = st.mean + uniform(rng, -0.5, 0.5) * st.range();
        p.terms.resize(6);
        for (TermParams& t : p.terms) {
            t.mu1 = uniform(rng, -0.5, 0.5) * std::max(st.range(), 1.0);
            t.mu2 = uniform(rng, -0.5, 0.5) * std::max(st.range(), 1.0);
            t.mu3 = uniform(rng, -1.0, 1.0);
            t.mu4 = uniform(rng, -2.0, 2.0);
            t.mu5 = uniform(rng, -0.1, 0.05);
            t.mu6 = uniform(rng, -0.2, 0.2);
        }

        UnifiedGradient a = analytic_gradient(p, grid);
        if (corrupt)
            corrupt(a);
        const UnifiedGradient f = finite_diff_gradient_scaled(p, grid, 1e-6, rep.abs_floor);

        auto check = [&](int group, double av, double fv) {
            const double mag = std::max(std::abs(av), std::abs(fv));
            const double diff = std::abs(av - fv);
            const double rel = diff / std::max(mag, rep.abs_floor);
            rep.max_rel_err[static_cast<std::size_t>(group)] =
                std::max(rep.max_rel_err[static_cast<std::size_t>(group)], rel);
            if (diff > std::max(rep.tolerance * mag, rep.abs_floor))
                rep.passed = false;
        };
        check(0, a.d_mu0, f.d_mu0);
        for (std::size_t k = 0; k < p.terms.size(); ++k)
            for (int c = 0; c < 6; ++c)
                check(c + 1, a.d_terms[k][static_cast<std::size_t>(c)],
                      f.d_terms[k][static_cast<std::size_t>(c)]);
    }
    return rep;
}

} // namespace scloss
