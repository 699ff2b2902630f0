// scfit: fit, compare, evaluate and verify semantic-quality surface models
// from the command line. Every successful run writes a manifest that pins the
// exact configuration, seed and input needed to reproduce it.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "scloss/evaluation.hpp"
#include "scloss/fitter.hpp"
#include "scloss/params_io.hpp"
#include "scloss/tables.hpp"
#include "scloss/version.hpp"

namespace fs = std::filesystem;
using namespace scloss;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;

struct CommonArgs {
    std::string table;
    std::string input;
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<int> starts;
    std::optional<long> iters;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_fit_flags = true) {
    auto* table = cmd->add_option("--table", args.table, "embedded table identifier");
    auto* input = cmd->add_option("--input", args.input, "CSV grid file");
    table->excludes(input);
    cmd->add_option("--out-dir", args.out_dir,
                    "output directory (default: $SCFIT_OUT_DIR or '.')");
    if (with_fit_flags) {
        cmd->add_option("--config", args.config_path, "fit configuration JSON file");
        cmd->add_option("--seed", args.seed, "base RNG seed");
        cmd->add_option("--starts", args.starts, "multi-start count");
        cmd->add_option("--iters", args.iters, "iteration budget");
    }
}

fs::path resolve_out_dir(const CommonArgs& args) {
    fs::path dir;
    if (!args.out_dir.empty())
        dir = args.out_dir;
    else if (const char* env = std::getenv("SCFIT_OUT_DIR"); env && *env)
        dir = env;
    else
        dir = ".";
    fs::create_directories(dir);
    return dir;
}

FitConfig resolve_config(const CommonArgs& args) {
    FitConfig cfg;
    if (!args.config_path.empty())
        cfg = load_config(args.config_path);
    if (args.seed)
        cfg.seed = *args.seed;
    if (args.starts)
        cfg.n_starts = *args.starts;
    if (args.iters)
        cfg.max_iters = *args.iters;
    cfg.validate();
    return cfg;
}

MetricGrid resolve_grid(const CommonArgs& args) {
    if (!args.table.empty())
        return embedded_table(args.table);
    if (!args.input.empty())
        return load_grid(args.input);
    throw Error("one of --table or --input is required");
}

std::string input_ref(const CommonArgs& args) {
    return !args.table.empty() ? args.table : args.input;
}

void write_manifest(const fs::path& out_dir, RunManifest m) {
    m.version = kVersion;
    const fs::path path = out_dir / "manifest.json";
    m.outputs.push_back(path.string());
    write_text_file(path, manifest_to_json(m));
}

void write_slice_residuals(const fs::path& path, const MetricSlice& slice,
                           const std::vector<double>& fitted) {
    std::string text = "gamma_db,rho,measured,fitted,residual\n";
    for (std::size_t i = 0; i < slice.size(); ++i) {
        text += format_double(slice.gamma_axis[i]) + ',' + format_double(slice.rho) + ',' +
                format_double(slice.values[i]) + ',' + format_double(fitted[i]) + ',' +
                format_double(slice.values[i] - fitted[i]) + '\n';
    }
    write_text_file(path, text);
}

// ---------------------------------------------------------------------------

int run_fit(const CommonArgs& args, const std::string& model, double rho, int surface_res) {
    const FitConfig cfg = resolve_config(args);
    const MetricGrid grid = resolve_grid(args);
    const fs::path out_dir = resolve_out_dir(args);

    RunManifest manifest;
    manifest.command = "fit";
    manifest.config_hash = config_hash(cfg);
    manifest.seed = cfg.seed;
    manifest.input_ref = input_ref(args);

    const fs::path params_path = out_dir / "params.json";
    const fs::path report_path = out_dir / "report.json";
    const fs::path residuals_path = out_dir / "residuals.csv";

    FitReport report;
    if (model == "unified") {
        auto [params, rep] = fit_unified(grid, cfg);
        report = rep;
        save_params(ModelParams(params), params_path);
        residual_table(params, grid, residuals_path);
        if (surface_res > 0) {
            const fs::path surface_path = out_dir / "surface.csv";
            export_surface(params, grid.gamma_axis.front(), grid.gamma_axis.back(),
                           grid.rho_axis.front(), grid.rho_axis.back(), surface_res,
                           surface_res, surface_path);
            manifest.outputs.push_back(surface_path.string());
        }
    } else {
        if (surface_res > 0)
            throw Error("--surface requires --model unified");
        const MetricSlice slice = slice_at_rho(grid, rho);
        std::vector<double> fitted(slice.size());
        if (model == "gsigmoid") {
            auto [params, rep] = fit_gsigmoid(slice, cfg);
            report = rep;
            save_params(ModelParams(params), params_path);
            for (std::size_t i = 0; i < slice.size(); ++i)
                fitted[i] = eval_gsigmoid(params, slice.gamma_axis[i]);
        } else {
            auto [params, rep] = fit_sumexp(slice, cfg);
            report = rep;
            save_params(ModelParams(params), params_path);
            for (std::size_t i = 0; i < slice.size(); ++i)
                fitted[i] = eval_sumexp(params, slice.gamma_axis[i]);
        }
        write_slice_residuals(residuals_path, slice, fitted);
    }
    write_text_file(report_path, report_to_json(report));
    manifest.outputs.insert(manifest.outputs.begin(),
                            {params_path.string(), report_path.string(),
                             residuals_path.string()});
    write_manifest(out_dir, manifest);

    std::printf("fit %s on %s: avg MSE %.6g over %d starts (best #%d, %ld iterations%s)\n",
                model.c_str(), manifest.input_ref.c_str(), report.final_avg_mse, cfg.n_starts,
                report.best_start_index, report.iterations_used,
                report.converged ? ", converged" : "");
    std::printf("wrote %s\n", params_path.string().c_str());
    return kExitOk;
}

int run_compare(const CommonArgs& args, std::vector<double> rhos) {
    const FitConfig cfg = resolve_config(args);
    const MetricGrid grid = resolve_grid(args);
    const fs::path out_dir = resolve_out_dir(args);
    if (rhos.empty())
        rhos = {8.0, 12.0};

    const ComparisonReport rep = compare_models(grid, rhos, cfg);

    const fs::path report_path = out_dir / "comparison.json";
    write_text_file(report_path, comparison_to_json(rep));

    RunManifest manifest;
    manifest.command = "compare";
    manifest.config_hash = config_hash(cfg);
    manifest.seed = cfg.seed;
    manifest.input_ref = input_ref(args);
    manifest.outputs.push_back(report_path.string());
    write_manifest(out_dir, manifest);

    std::printf("metric: %s (average MSE per fixed-rho slice)\n", rep.metric_name.c_str());
    std::printf("%-8s %-12s %-12s %-12s %s\n", "rho", "unified", "gsigmoid", "sumexp", "winner");
    for (const ComparisonRow& row : rep.rows)
        std::printf("%-8g %-12.6g %-12.6g %-12.6g %s\n", row.rho, row.unified_avg_mse,
                    row.gsigmoid_avg_mse, row.sumexp_avg_mse, row.winner.c_str());
    if (!rep.published.empty()) {
        std::printf("published reference values:\n");
        std::printf("%-8s %-12s %-12s %-12s\n", "rho", "proposed", "gsigmoid", "sumexp");
        for (const PublishedComparison& pc : rep.published)
            std::printf("%-8g %-12.6g %-12.6g %-12.6g\n", pc.rho, pc.proposed, pc.gsigmoid,
                        pc.sumexp);
    }
    std::printf("wrote %s\n", report_path.string().c_str());
    return kExitOk;
}

int run_predict(const CommonArgs& args, const std::string& params_path, double gamma,
                double rho) {
    const ModelParams params = load_params(params_path);
    double value = 0.0;
    if (const auto* u = std::get_if<UnifiedParams>(&params))
        value = eval_point(*u, gamma, rho);
    else if (const auto* g = std::get_if<GSigmoidParams>(&params))
        value = eval_gsigmoid(*g, gamma);
    else
        value = eval_sumexp(std::get<SumExpParams>(params), gamma);
    std::printf("%#.6g\n", value);

    const fs::path out_dir = resolve_out_dir(args);
    RunManifest manifest;
    manifest.command = "predict";
    manifest.config_hash = config_hash(FitConfig{});
    manifest.input_ref = params_path;
    write_manifest(out_dir, manifest);
    return kExitOk;
}

int run_gradcheck(const CommonArgs& args, int draws, bool corrupt) {
    const FitConfig cfg = resolve_config(args);
    const MetricGrid grid = resolve_grid(args);
    const fs::path out_dir = resolve_out_dir(args);

    GradientHook hook;
    if (corrupt)
        hook = [](UnifiedGradient& g) {
            g.d_mu0 *= 1.001;
            for (auto& t : g.d_terms)
                for (double& v : t)
                    v *= 1.001;
        };
    const GradientCheckReport rep = gradient_check(grid, draws, cfg.seed, hook);

    nlohmann::ordered_json j;
    j["draws"] = rep.draws;
    j["seed"] = rep.seed;
    j["tolerance"] = rep.tolerance;
    j["abs_floor"] = rep.abs_floor;
    j["max_rel_err"] = rep.max_rel_err;
    j["passed"] = rep.passed;
    const fs::path report_path = out_dir / "gradcheck.json";
    write_text_file(report_path, j.dump(2) + "\n");

    RunManifest manifest;
    manifest.command = "gradcheck";
    manifest.config_hash = config_hash(cfg);
    manifest.seed = cfg.seed;
    manifest.input_ref = input_ref(args);
    manifest.outputs.push_back(report_path.string());
    write_manifest(out_dir, manifest);

    for (std::size_t g = 0; g < rep.max_rel_err.size(); ++g)
        std::printf("mu%zu: max relative error %.3e\n", g, rep.max_rel_err[g]);
    std::printf("gradient check %s (%d draws on %s, tolerance %g)\n",
                rep.passed ? "PASSED" : "FAILED", rep.draws, manifest.input_ref.c_str(),
                rep.tolerance);
    return rep.passed ? kExitOk : kExitCheckFailed;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"semantic-quality surface model fitting toolkit"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    CommonArgs fit_args;
    std::string fit_model = "unified";
    double fit_rho = 0.0;
    int fit_surface = 0;
    auto* fit_cmd = app.add_subcommand("fit", "fit a model to a measurement grid");
    add_common(fit_cmd, fit_args);
    fit_cmd->add_option("--model", fit_model, "unified | gsigmoid | sumexp")
        ->check(CLI::IsMember({"unified", "gsigmoid", "sumexp"}));
    auto* rho_opt = fit_cmd->add_option("--rho", fit_rho, "slice ratio for baseline models");
    fit_cmd->add_option("--surface", fit_surface,
                        "also sample the fitted surface on an NxN grid (unified only)");

    CommonArgs cmp_args;
    std::vector<double> cmp_rhos;
    auto* cmp_cmd = app.add_subcommand("compare", "fit all three models and compare per slice");
    add_common(cmp_cmd, cmp_args);
    cmp_cmd->add_option("--rhos", cmp_rhos, "slice ratios (default 8 12)")->delimiter(',');

    CommonArgs pred_args;
    std::string pred_params;
    double pred_gamma = 0.0, pred_rho = 0.0;
    auto* pred_cmd = app.add_subcommand("predict", "evaluate a saved parameter file");
    pred_cmd->add_option("--params", pred_params, "parameter JSON file")->required();
    pred_cmd->add_option("--gamma", pred_gamma, "SNR in dB")->required();
    pred_cmd->add_option("--rho", pred_rho, "compression ratio (unified model)");
    pred_cmd->add_option("--out-dir", pred_args.out_dir,
                         "output directory (default: $SCFIT_OUT_DIR or '.')");

    CommonArgs gc_args;
    int gc_draws = 100;
    bool gc_corrupt = false;
    auto* gc_cmd =
        app.add_subcommand("gradcheck", "verify analytic gradients against finite differences");
    add_common(gc_cmd, gc_args);
    gc_cmd->add_option("--draws", gc_draws, "random parameter draws (default 100)");
    gc_cmd->add_flag("--debug-corrupt-gradient", gc_corrupt,
                     "negative control: perturb the analytic gradient before checking");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitInput;
    }

    try {
        if (fit_cmd->parsed()) {
            if (fit_model != "unified" && rho_opt->count() == 0)
                throw Error("--rho is required for baseline models");
            return run_fit(fit_args, fit_model, fit_rho, fit_surface);
        }
        if (cmp_cmd->parsed())
            return run_compare(cmp_args, cmp_rhos);
        if (pred_cmd->parsed())
            return run_predict(pred_args, pred_params, pred_gamma, pred_rho);
        if (gc_cmd->parsed())
            return run_gradcheck(gc_args, gc_draws, gc_corrupt);
        return kExitInput;
    } catch (const DivergenceError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitInput;
    } catch (...) {
        std::fprintf(stderr, "error: unknown failure\n");
        return kExitNumerical;
    }
}
