#pragma once
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "scloss/baseline_models.hpp"
#include "scloss/evaluation.hpp"
#include "scloss/fitter.hpp"
#include "scloss/unified_model.hpp"

namespace scloss {

/// Any fitted parameter set, tagged by model kind in the file format.
using ModelParams = std::variant<UnifiedParams, GSigmoidParams, SumExpParams>;

/// Model-kind labels used in files and CLI flags: unified, gsigmoid, sumexp.
std::string model_kind(const ModelParams& p);

/// JSON parameter file. Unified sets store mu0, n_c, gamma_scale and a terms
/// array of {mu1..mu6} (mu5 raw, not scaled); baselines store their k fields.
/// Doubles are serialized with full round-trip precision, so save followed by
/// load reproduces the exact values.
std::string params_to_json(const ModelParams& p);
ModelParams params_from_json(const std::string& text);
void save_params(const ModelParams& p, const std::filesystem::path& path);
ModelParams load_params(const std::filesystem::path& path);

/// Fit configuration file: every field optional, defaults as documented on
/// FitConfig. Unknown keys are rejected.
FitConfig config_from_json(const std::string& text);
FitConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const FitConfig& cfg);

/// FNV-1a digest of the canonical config serialization; identifies a resolved
/// configuration in run manifests.
std::string config_hash(const FitConfig& cfg);

std::string report_to_json(const FitReport& r);
std::string comparison_to_json(const ComparisonReport& r);

/// Record of one CLI run: enough to reproduce it bit-identically.
struct RunManifest {
    std::string command;
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string input_ref;
    std::vector<std::string> outputs;
    std::string version;
};
std::string manifest_to_json(const RunManifest& m);

void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

} // namespace scloss
