#include "scloss/evaluation.hpp"

#include <cmath>
#include <fstream>

namespace scloss {

double avg_mse_on_slice(const std::vector<double>& predictions, const MetricSlice& slice) {
    if (predictions.size() != slice.size())
        throw Error("prediction length " + std::to_string(predictions.size()) +
                    " does not match slice length " + std::to_string(slice.size()));
    double acc = 0.0;
    for (std::size_t i = 0; i < slice.size(); ++i) {
        const double d = predictions[i] - slice.values[i];
        acc += d * d;
    }
    return acc / static_cast<double>(slice.size());
}

std::vector<double> unified_slice_predictions(const UnifiedParams& p, const MetricSlice& slice) {
    std::vector<double> out;
    out.reserve(slice.size());
    for (double g : slice.gamma_axis)
        out.push_back(eval_point(p, g, slice.rho));
    return out;
}

ComparisonReport compare_models(const MetricGrid& grid, const std::vector<double>& rhos,
                                const FitConfig& cfg) {
    grid.validate();
    for (double r : rhos)
        slice_at_rho(grid, r); // fail fast before any fitting

    ComparisonReport rep;
    rep.metric_name = grid.metric_name;

    auto [unified, unified_report] = fit_unified(grid, cfg);
    rep.unified = unified;

    FitConfig bcfg = cfg;
    bcfg.n_starts = std::max(cfg.n_starts, 32);

    for (double r : rhos) {
        const MetricSlice slice = slice_at_rho(grid, r);
        auto [gs, gs_report] = fit_gsigmoid(slice, bcfg);
        auto [se, se_report] = fit_sumexp(slice, bcfg);

        ComparisonRow row;
        row.rho = r;
        row.unified_avg_mse = avg_mse_on_slice(unified_slice_predictions(unified, slice), slice);
        row.gsigmoid_avg_mse = gs_report.final_avg_mse;
        row.sumexp_avg_mse = se_report.final_avg_mse;
        row.winner = "unified";
        double best = row.unified_avg_mse;
        if (row.gsigmoid_avg_mse < best) {
            best = row.gsigmoid_avg_mse;
            row.winner = "gsigmoid";
        }
        if (row.sumexp_avg_mse < best)
            row.winner = "sumexp";
        rep.rows.push_back(row);
        rep.gsigmoid_fits.emplace_back(r, gs);
        rep.sumexp_fits.emplace_back(r, se);
    }

    if (grid.metric_name == "evit-accuracy") {
        for (const PublishedComparison& pc : published_comparison_mse())
            for (double r : rhos)
                if (pc.rho == r)
                    rep.published.push_back(pc);
    }
    return rep;
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot open file for writing: " + path.string());
    return out;
}

} // namespace

void export_surface(const UnifiedParams& p, double gamma_min, double gamma_max,
                    double rho_min, double rho_max, int n_gamma, int n_rho,
                    const std::filesystem::path& path) {
    if (!(gamma_max > gamma_min) || !(rho_max > rho_min))
        throw Error("surface ranges must be non-degenerate");
    if (n_gamma < 2 || n_rho < 2)
        throw Error("surface resolution must be >= 2 per axis");
    auto out = open_out(path);
    out << "gamma_db,rho,value\n";
    for (int i = 0; i < n_gamma; ++i) {
        const double g = gamma_min + (gamma_max - gamma_min) * i / (n_gamma - 1);
        for (int j = 0; j < n_rho; ++j) {
            const double r = rho_min + (rho_max - rho_min) * j / (n_rho - 1);
            out << format_double(g) << ',' << format_double(r) << ','
                << format_double(eval_point(p, g, r)) << '\n';
        }
    }
    if (!out)
        throw IoError("write failed: " + path.string());
}

void residual_table(const UnifiedParams& p, const MetricGrid& grid,
                    const std::filesystem::path& path) {
    grid.validate();
    auto out = open_out(path);
    out << "gamma_db,rho,measured,fitted,residual\n";
    const auto fit = eval_grid(p, grid);
    for (std::size_t i = 0; i < grid.rows(); ++i) {
        for (std::size_t j = 0; j < grid.cols(); ++j) {
            const double measured = grid.values[i][j];
            const double fitted = fit[i][j];
            out << format_double(grid.gamma_axis[i]) << ',' << format_double(grid.rho_axis[j])
                << ',' << format_double(measured) << ',' << format_double(fitted) << ','
                << format_double(measured - fitted) << '\n';
        }
    }
    if (!out)
        throw IoError("write failed: " + path.string());
}

} // namespace scloss
