// Acceptance suite: one check per release criterion, each printing a single
// PASS/FAIL line with its measured numbers. Run with no arguments for the
// whole suite or with a criterion number (1-8) for one check.

#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>
#include <sys/wait.h>

#include "scloss/evaluation.hpp"
#include "scloss/fitter.hpp"
#include "scloss/params_io.hpp"
#include "scloss/tables.hpp"
#include "scloss/unified_model.hpp"

using namespace scloss;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

#include "fidelity_reference.inc"

struct Outcome {
    bool pass = false;
    std::string detail;
};

double elapsed(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof(buf), f, args...);
    return buf;
}

// --- 1: analytic gradients match finite differences on every embedded grid ---
Outcome criterion_gradients() {
    const auto t0 = Clock::now();
    bool all = true;
    double worst = 0.0;
    for (const auto& name : embedded_table_names()) {
        const GradientCheckReport rep = gradient_check(embedded_table(name), 100, 42);
        all = all && rep.passed;
        for (double e : rep.max_rel_err)
            worst = std::max(worst, e);
    }
    const double dt = elapsed(t0);
    return {all && dt < 10.0,
            fmt("100 draws x 6 grids, worst rel err %.2e (tol 1e-6), %.1fs (budget 10s)", worst,
                dt)};
}

// --- 2: published accuracy parameters reproduce the measured grid ---
Outcome criterion_published() {
    const auto t0 = Clock::now();
    const MetricGrid& grid = embedded_table("evit-accuracy");
    const UnifiedParams& p = published_params("evit-accuracy");
    double ss = 0.0;
    for (std::size_t i = 0; i < grid.rows(); ++i)
        for (std::size_t j = 0; j < grid.cols(); ++j) {
            const double d =
                grid.values[i][j] - eval_point(p, grid.gamma_axis[i], grid.rho_axis[j]);
            ss += d * d;
        }
    const double rmse = std::sqrt(ss / static_cast<double>(grid.cells()));
    const double dt = elapsed(t0);
    return {rmse <= 2.0 && dt < 1.0,
            fmt("RMSE %.4f percentage points (bound 2.0), %.3fs (budget 1s)", rmse, dt)};
}

// --- 3: the published comparison protocol, end to end through the CLI ---
Outcome criterion_comparison() {
    const auto t0 = Clock::now();
    const fs::path dir = fs::temp_directory_path() / "scloss_acceptance_compare";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const std::string cmd =
        std::string(SCFIT_BIN) + " compare --table evit-accuracy --out-dir " + dir.string() +
        " > " + (dir / "stdout.txt").string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0)
        return {false, "cmd_compare exited with status " + std::to_string(status)};

    const auto rep = nlohmann::json::parse(read_text_file(dir / "comparison.json"));
    double u8 = -1, u12 = -1, g8 = -1, g12 = -1, s8 = -1, s12 = -1;
    for (const auto& row : rep["rows"]) {
        if (row["rho"] == 8.0) {
            u8 = row["unified_avg_mse"];
            g8 = row["gsigmoid_avg_mse"];
            s8 = row["sumexp_avg_mse"];
        } else if (row["rho"] == 12.0) {
            u12 = row["unified_avg_mse"];
            g12 = row["gsigmoid_avg_mse"];
            s12 = row["sumexp_avg_mse"];
        }
    }
    const double dt = elapsed(t0);
    const bool unified_ok = u8 >= 0 && u8 <= 0.15 && u12 >= 0 && u12 <= 0.25;
    const bool gsig_ok = g8 <= 1.5 * 0.1425 && g12 <= 1.5 * 0.2474;
    const bool sexp_ok = s8 <= 1.5 * 0.1133 && s12 <= 1.5 * 0.0521;
    const bool order_ok = u8 < g8 && u12 < g12;
    return {unified_ok && gsig_ok && sexp_ok && order_ok && dt < 600.0,
            fmt("unified %.4f/%.4f (<=0.15/0.25), gsig %.4f/%.4f (<=%.4f/%.4f), "
                "sexp %.4f/%.4f (<=%.4f/%.4f), unified<gsig %s, %.0fs (budget 600s)",
                u8, u12, g8, g12, 1.5 * 0.1425, 1.5 * 0.2474, s8, s12, 1.5 * 0.1133,
                1.5 * 0.0521, order_ok ? "yes" : "NO", dt)};
}

// --- 4: synthetic data generated from known parameters is recovered ---
Outcome criterion_recovery() {
    const auto t0 = Clock::now();
    const MetricGrid& axes = embedded_table("evit-accuracy");

    auto synth = [&](const UnifiedParams& gen) {
        MetricGrid g;
        g.metric_name = "synthetic";
        g.gamma_axis = axes.gamma_axis;
        g.rho_axis = axes.rho_axis;
        g.values = eval_grid(gen, g);
        return g;
    };

    UnifiedParams one;
    one.mu0 = 55.0;
    one.terms = {{2.0, 8.0, 0.7, 0.5, -0.03, 0.05}};
    FitConfig cfg1;
    cfg1.n_c = 1;
    cfg1.alphas = {1e-4, 1e-4, 1e-4, 1e-5, 1e-5, 1e-7, 1e-7};
    cfg1.max_iters = 400000;
    cfg1.n_starts = 24;
    const double mse1 = fit_unified(synth(one), cfg1).second.final_avg_mse;

    UnifiedParams two;
    two.mu0 = 40.0;
    two.terms = {{1.0, 10.0, 0.6, 0.2, -0.02, 0.0}, {5.0, 0.0, 0.3, 0.0, -0.06, 0.04}};
    FitConfig cfg2 = cfg1;
    cfg2.n_c = 2;
    cfg2.max_iters = 600000;
    const double mse2 = fit_unified(synth(two), cfg2).second.final_avg_mse;

    MetricSlice gslice = slice_at_rho(axes, 8.0);
    const GSigmoidParams gtrue{80.0, 15.0, -1.2, 1.0};
    for (std::size_t i = 0; i < gslice.size(); ++i)
        gslice.values[i] = eval_gsigmoid(gtrue, gslice.gamma_axis[i]);
    FitConfig bcfg;
    bcfg.alphas[1] = 1e-3; // 10x baseline rate scale for the recovery run
    bcfg.n_starts = 32;
    const double gmse = fit_gsigmoid(gslice, bcfg).second.final_avg_mse;

    MetricSlice sslice = gslice;
    const SumExpParams strue{-8.0, -0.9, -4.0, -0.15, 97.0};
    for (std::size_t i = 0; i < sslice.size(); ++i)
        sslice.values[i] = eval_sumexp(strue, sslice.gamma_axis[i]);
    const double smse = fit_sumexp(sslice, bcfg).second.final_avg_mse;

    const double dt = elapsed(t0);
    const bool ok = mse1 < 1e-4 && mse2 < 1e-4 && gmse < 1e-6 && smse < 1e-6 && dt < 120.0;
    return {ok, fmt("unified n_c=1 %.2e, n_c=2 %.2e (<1e-4); gsig %.2e, sexp %.2e (<1e-6); "
                    "%.0fs (budget 120s)",
                    mse1, mse2, gmse, smse, dt)};
}

// --- 5: descent property at one tenth of the default learning rates ---
Outcome criterion_descent() {
    FitConfig cfg;
    for (double& a : cfg.alphas)
        a *= 0.1;
    int violations = 0;
    std::size_t checkpoints = 0;
    for (const auto& name : embedded_table_names()) {
        const FitReport rep = fit_unified(embedded_table(name), cfg).second;
        checkpoints += rep.loss_curve.size();
        for (std::size_t i = 1; i < rep.loss_curve.size(); ++i)
            if (rep.loss_curve[i] > rep.loss_curve[i - 1] * (1.0 + 1e-9))
                ++violations;
    }
    return {violations == 0,
            fmt("%zu recorded checkpoints over 6 grids, %d increases (tol 1e-9 relative)",
                checkpoints, violations)};
}

// --- 6: identical CLI invocations give byte-identical outputs ---
Outcome criterion_determinism() {
    const fs::path base = fs::temp_directory_path() / "scloss_acceptance_det";
    fs::remove_all(base);
    for (const char* sub : {"a", "b"}) {
        fs::create_directories(base / sub);
        const std::string cmd = std::string(SCFIT_BIN) +
                                " fit --table evit-accuracy --seed 7 --out-dir " +
                                (base / sub).string() + " > /dev/null 2>&1";
        const int status = std::system(cmd.c_str());
        if (!WIFEXITED(status) || WEXITSTATUS(status) != 0)
            return {false, "cmd_fit exited with status " + std::to_string(status)};
    }
    const bool params_same =
        read_text_file(base / "a" / "params.json") == read_text_file(base / "b" / "params.json");
    const bool report_same =
        read_text_file(base / "a" / "report.json") == read_text_file(base / "b" / "report.json");
    return {params_same && report_same,
            fmt("params byte-identical: %s, report byte-identical: %s",
                params_same ? "yes" : "NO", report_same ? "yes" : "NO")};
}

// --- 7: the degenerate one-parameter fit reaches its closed-form optimum ---
Outcome criterion_mean_fit() {
    double worst = 0.0;
    for (const auto& name : embedded_table_names()) {
        const MetricGrid& grid = embedded_table(name);
        FitConfig cfg;
        cfg.n_c = 0;
        const UnifiedParams p = fit_unified(grid, cfg).first;
        double mean = 0.0;
        for (const auto& row : grid.values)
            for (double v : row)
                mean += v;
        mean /= static_cast<double>(grid.cells());
        worst = std::max(worst, std::abs(p.mu0 - mean) / std::abs(mean));
    }
    return {worst <= 1e-6, fmt("worst relative distance to the grid mean %.2e (tol 1e-6)", worst)};
}

// --- 8: embedded data matches the transcription reference digit for digit ---
Outcome criterion_fidelity() {
    std::size_t values = 0, mismatches = 0;
    auto compare_tokens = [&](std::string_view got, std::string_view want) {
        std::istringstream a{std::string(got)}, b{std::string(want)};
        std::string ta, tb;
        while (true) {
            const bool ha = static_cast<bool>(a >> ta);
            const bool hb = static_cast<bool>(b >> tb);
            if (!ha && !hb)
                return;
            ++values;
            if (!ha || !hb || ta != tb)
                ++mismatches;
        }
    };
    compare_tokens(embedded_table_text("djscc-psnr"), ref_kDjsccPsnrText);
    compare_tokens(embedded_table_text("djscc-ssim"), ref_kDjsccSsimText);
    compare_tokens(embedded_table_text("djscc-mse"), ref_kDjsccMseText);
    compare_tokens(embedded_table_text("evit-accuracy"), ref_kEvitAccuracyText);
    compare_tokens(embedded_table_text("evit-precision"), ref_kEvitPrecisionText);
    compare_tokens(embedded_table_text("evit-recall"), ref_kEvitRecallText);
    compare_tokens(published_params_text("djscc-mse"), ref_kParamsDjsccMseText);
    compare_tokens(published_params_text("djscc-psnr"), ref_kParamsDjsccPsnrText);
    compare_tokens(published_params_text("djscc-ssim"), ref_kParamsDjsccSsimText);
    compare_tokens(published_params_text("evit-accuracy"), ref_kParamsEvitAccuracyText);
    compare_tokens(published_params_text("evit-precision"), ref_kParamsEvitPrecisionText);
    compare_tokens(published_params_text("evit-recall"), ref_kParamsEvitRecallText);
    compare_tokens(published_comparison_text(), ref_kComparisonMseText);
    // 342 grid cells+gammas, 228 parameter fields, 8 comparison numbers
    return {mismatches == 0 && values == 578,
            fmt("%zu values compared at string level, %zu mismatches", values, mismatches)};
}

struct Criterion {
    int number;
    const char* name;
    std::function<Outcome()> check;
};

const std::vector<Criterion>& criteria() {
    static const std::vector<Criterion> list = {
        {1, "gradient correctness", criterion_gradients},
        {2, "published-parameter reproduction", criterion_published},
        {3, "model comparison reproduction", criterion_comparison},
        {4, "synthetic recovery", criterion_recovery},
        {5, "descent property", criterion_descent},
        {6, "determinism", criterion_determinism},
        {7, "closed-form degenerate fit", criterion_mean_fit},
        {8, "data fidelity", criterion_fidelity},
    };
    return list;
}

} // namespace

int main(int argc, char** argv) {
    int only = 0;
    if (argc > 1) {
        if (std::strcmp(argv[1], "--list") == 0) {
            for (const Criterion& c : criteria())
                std::printf("%d: %s\n", c.number, c.name);
            return 0;
        }
        std::from_chars(argv[1], argv[1] + std::strlen(argv[1]), only);
        if (only < 1 || only > static_cast<int>(criteria().size())) {
            std::fprintf(stderr, "usage: %s [--list | 1..%zu]\n", argv[0], criteria().size());
            return 2;
        }
    }
    bool all_pass = true;
    for (const Criterion& c : criteria()) {
        if (only != 0 && c.number != only)
            continue;
        Outcome o;
        try {
            o = c.check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        all_pass = all_pass && o.pass;
        std::printf("%s criterion %d (%s): %s\n", o.pass ? "PASS" : "FAIL", c.number, c.name,
                    o.detail.c_str());
        std::fflush(stdout);
    }
    return all_pass ? 0 : 1;
}
