#pragma once
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scloss/metric_grid.hpp"
#include "scloss/unified_model.hpp"

namespace scloss {

/// Embedded reference measurements: reconstruction metrics of a deep JSCC
/// codec (djscc-*) and task metrics of an EfficientViT classifier fed by it
/// (evit-*), each over an SNR x compression-ratio grid. Values are stored as
/// the published decimal text and parsed on first use, so the numbers in the
/// binary are auditable against the source digits.

/// Valid identifiers: djscc-psnr, djscc-ssim, djscc-mse, evit-accuracy,
/// evit-precision, evit-recall.
const std::vector<std::string>& embedded_table_names();

/// Returns the cached grid for `name`; throws UnknownTableError listing the
/// valid identifiers otherwise. DJSCC grids have 10 SNR rows (-7..-1, 0, 4,
/// 8 dB), EfficientViT grids 9 (-6..-1, 0, 4, 8 dB); all use rho in
/// {2, 4, 6, 8, 12}.
const MetricGrid& embedded_table(std::string_view name);

/// Raw transcription text backing embedded_table(name): one line per
/// published row (descending SNR), "gamma v1 v2 v3 v4 v5".
std::string_view embedded_table_text(std::string_view name);

/// Published unified-model parameter sets for the same six metrics, keyed by
/// the matching table identifier. mu5 is printed scaled by 1e3 in the source
/// and is de-scaled here; the sets are tagged GammaScale::linear because they
/// were calibrated against linear-scale SNR (evaluating them on the dB axis
/// does not reproduce the measurements).
const UnifiedParams& published_params(std::string_view name);

/// Raw transcription text backing published_params(name): a "mu0 <value>"
/// line then one "mu1 mu2 mu3 mu4 mu5e3 mu6" line per term.
std::string_view published_params_text(std::string_view name);

/// Published average fit MSE of the three models on the evit-accuracy metric
/// at fixed rho (the comparison this toolkit reproduces).
struct PublishedComparison {
    double rho;
    double proposed;
    double gsigmoid;
    double sumexp;
};
std::span<const PublishedComparison> published_comparison_mse();
std::string_view published_comparison_text();

} // namespace scloss
