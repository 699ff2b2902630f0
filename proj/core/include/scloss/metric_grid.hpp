#pragma once
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "scloss/errors.hpp"

namespace scloss {

/// A measured semantic-quality metric over a (SNR, compression ratio) grid.
///
/// gamma_axis holds channel SNR values in dB, strictly increasing.
/// rho_axis holds compression ratios (> 0), strictly increasing.
/// values[i][j] is the metric measured at (gamma_axis[i], rho_axis[j]).
/// Instances are treated as immutable after construction and may be shared
/// freely across threads.
struct MetricGrid {
    std::string metric_name;
    std::vector<double> gamma_axis;
    std::vector<double> rho_axis;
    std::vector<std::vector<double>> values;

    std::size_t rows() const { return gamma_axis.size(); }
    std::size_t cols() const { return rho_axis.size(); }
    std::size_t cells() const { return rows() * cols(); }
    double at(std::size_t i, std::size_t j) const { return values[i][j]; }

    /// Throws GridError unless all invariants hold (monotone axes, finite
    /// values, consistent shape, positive rho).
    void validate() const;
};

/// One column of a MetricGrid: the metric over SNR at a fixed compression ratio.
struct MetricSlice {
    std::string metric_name;
    double rho = 0.0;
    std::vector<double> gamma_axis;
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
    void validate() const;
};

/// Extracts the column at `rho`, which must be an exact member of grid.rho_axis.
/// Throws GridError listing the available ratios otherwise.
MetricSlice slice_at_rho(const MetricGrid& grid, double rho);

/// CSV grid format:
///   first header cell is the literal `gamma_db\rho`, remaining header cells
///   are the rho axis in increasing order; each following row is a gamma value
///   in dB followed by one metric value per rho. UTF-8, '.' decimal separator.
/// Parse errors carry row/column locations. Axes must be strictly increasing
/// and every value finite.
MetricGrid parse_grid_csv(std::istream& in, std::string metric_name);

/// Reads a grid from a CSV file (see parse_grid_csv). `metric_name` defaults
/// to the file stem.
MetricGrid load_grid(const std::filesystem::path& path, std::string metric_name = {});

/// Writes the same CSV format. Numbers are printed with the shortest decimal
/// form that reparses to the identical double (at least 6 significant digits
/// of information), so export followed by load_grid is the identity.
void write_grid_csv(const MetricGrid& grid, std::ostream& out);
void export_grid(const MetricGrid& grid, const std::filesystem::path& path);

/// Shortest decimal form of `v` that round-trips exactly.
std::string format_double(double v);

} // namespace scloss
