#pragma once
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "scloss/baseline_models.hpp"
#include "scloss/fitter.hpp"
#include "scloss/metric_grid.hpp"
#include "scloss/tables.hpp"
#include "scloss/unified_model.hpp"

namespace scloss {

/// Mean squared difference between predictions and slice values.
/// Throws Error on length mismatch.
double avg_mse_on_slice(const std::vector<double>& predictions, const MetricSlice& slice);

/// eval_point of p along a slice's gamma axis at its fixed rho.
std::vector<double> unified_slice_predictions(const UnifiedParams& p, const MetricSlice& slice);

struct ComparisonRow {
    double rho = 0.0;
    double unified_avg_mse = 0.0;
    double gsigmoid_avg_mse = 0.0;
    double sumexp_avg_mse = 0.0;
    std::string winner; ///< model with the row minimum: unified|gsigmoid|sumexp
};

/// Per-slice fit-quality comparison of the three models. `published` carries
/// the published reference values when the metric has them (evit-accuracy),
/// so reports show computed and published numbers side by side.
struct ComparisonReport {
    std::string metric_name;
    std::vector<ComparisonRow> rows;
    std::vector<PublishedComparison> published;
    UnifiedParams unified;
    std::vector<std::pair<double, GSigmoidParams>> gsigmoid_fits; ///< (rho, params)
    std::vector<std::pair<double, SumExpParams>> sumexp_fits;
};

/// Fits the unified model once on the full 2D grid, fits each baseline per
/// requested slice, and evaluates all three on each slice. The unified
/// predictions come from the single 2D fit (the comparison is precisely that
/// it captures both dimensions at once). Baseline fits use at least 32 starts
/// regardless of cfg.n_starts. Deterministic for fixed inputs.
ComparisonReport compare_models(const MetricGrid& grid, const std::vector<double>& rhos,
                                const FitConfig& cfg);

/// Samples p on a uniform gamma x rho grid and writes CSV rows
/// `gamma_db,rho,value`. Ranges must be non-degenerate and resolutions >= 2.
void export_surface(const UnifiedParams& p, double gamma_min, double gamma_max,
                    double rho_min, double rho_max, int n_gamma, int n_rho,
                    const std::filesystem::path& path);

/// Writes CSV rows `gamma_db,rho,measured,fitted,residual`, one per grid cell.
void residual_table(const UnifiedParams& p, const MetricGrid& grid,
                    const std::filesystem::path& path);

} // namespace scloss
