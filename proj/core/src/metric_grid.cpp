#include "scloss/metric_grid.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace scloss {

namespace {

void check_axis(const std::vector<double>& axis, const char* what) {
    if (axis.empty())
        throw GridError(std::string(what) + " axis is empty");
    for (std::size_t i = 0; i < axis.size(); ++i) {
        if (!std::isfinite(axis[i]))
            throw GridError(std::string(what) + " axis has a non-finite entry at index " +
                            std::to_string(i));
        if (i > 0 && !(axis[i] > axis[i - 1]))
            throw GridError("non-monotone " + std::string(what) + " axis at index " +
                            std::to_string(i) + " (" + format_double(axis[i - 1]) + " then " +
                            format_double(axis[i]) + ")");
    }
}

double parse_cell(const std::string& cell, std::size_t row, std::size_t col) {
    const char* first = cell.data();
    const char* last = first + cell.size();
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last)
        throw GridError("parse error at row " + std::to_string(row) + ", column " +
                        std::to_string(col) + ": '" + cell + "'");
    if (!std::isfinite(v))
        throw GridError("non-finite value at row " + std::to_string(row) + ", column " +
                        std::to_string(col));
    return v;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    cells.push_back(cur);
    return cells;
}

} // namespace

std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

void MetricGrid::validate() const {
    check_axis(gamma_axis, "gamma");
    check_axis(rho_axis, "rho");
    for (std::size_t j = 0; j < rho_axis.size(); ++j)
        if (!(rho_axis[j] > 0.0))
            throw GridError("rho axis entry " + std::to_string(j) + " is not positive");
    if (values.size() != gamma_axis.size())
        throw GridError("values has " + std::to_string(values.size()) + " rows, expected " +
                        std::to_string(gamma_axis.size()));
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i].size() != rho_axis.size())
            throw GridError("row " + std::to_string(i) + " has " +
                            std::to_string(values[i].size()) + " columns, expected " +
                            std::to_string(rho_axis.size()));
        for (std::size_t j = 0; j < values[i].size(); ++j)
            if (!std::isfinite(values[i][j]))
                throw GridError("non-finite value at row " + std::to_string(i) + ", column " +
                                std::to_string(j));
    }
}

void MetricSlice::validate() const {
    check_axis(gamma_axis, "gamma");
    if (values.size() != gamma_axis.size())
        throw GridError("slice has " + std::to_string(values.size()) + " values for " +
                        std::to_string(gamma_axis.size()) + " gamma entries");
    for (std::size_t i = 0; i < values.size(); ++i)
        if (!std::isfinite(values[i]))
            throw GridError("non-finite slice value at index " + std::to_string(i));
}

MetricSlice slice_at_rho(const MetricGrid& grid, double rho) {
    for (std::size_t j = 0; j < grid.rho_axis.size(); ++j) {
        if (grid.rho_axis[j] == rho) {
            MetricSlice s;
            s.metric_name = grid.metric_name;
            s.rho = rho;
            s.gamma_axis = grid.gamma_axis;
            s.values.reserve(grid.rows());
            for (std::size_t i = 0; i < grid.rows(); ++i)
                s.values.push_back(grid.values[i][j]);
            return s;
        }
    }
    std::string avail;
    for (double r : grid.rho_axis)
        avail += (avail.empty() ? "" : ", ") + format_double(r);
    throw GridError("rho " + format_double(rho) + " not present; available: " + avail);
}

MetricGrid parse_grid_csv(std::istream& in, std::string metric_name) {
    MetricGrid g;
    g.metric_name = std::move(metric_name);

    std::string line;
    if (!std::getline(in, line))
        throw GridError("empty input: missing header row");
    auto header = split_csv_line(line);
    if (header.empty() || header[0] != "gamma_db\\rho")
        throw GridError("header must start with the literal cell 'gamma_db\\rho'");
    if (header.size() < 2)
        throw GridError("header has no rho columns");
    for (std::size_t j = 1; j < header.size(); ++j)
        g.rho_axis.push_back(parse_cell(header[j], 0, j));

    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r")
            continue;
        auto cells = split_csv_line(line);
        if (cells.size() != header.size())
            throw GridError("row " + std::to_string(row) + " has " +
                            std::to_string(cells.size() - 1) + " values, expected " +
                            std::to_string(g.rho_axis.size()));
        g.gamma_axis.push_back(parse_cell(cells[0], row, 0));
        std::vector<double> vals;
        vals.reserve(cells.size() - 1);
        for (std::size_t j = 1; j < cells.size(); ++j)
            vals.push_back(parse_cell(cells[j], row, j));
        g.values.push_back(std::move(vals));
    }
    g.validate();
    return g;
}

MetricGrid load_grid(const std::filesystem::path& path, std::string metric_name) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open grid file: " + path.string());
    if (metric_name.empty())
        metric_name = path.stem().string();
    return parse_grid_csv(in, std::move(metric_name));
}

void write_grid_csv(const MetricGrid& grid, std::ostream& out) {
    out << "gamma_db\\rho";
    for (double r : grid.rho_axis)
        out << ',' << format_double(r);
    out << '\n';
    for (std::size_t i = 0; i < grid.rows(); ++i) {
        out << format_double(grid.gamma_axis[i]);
        for (std::size_t j = 0; j < grid.cols(); ++j)
            out << ',' << format_double(grid.values[i][j]);
        out << '\n';
    }
}

void export_grid(const MetricGrid& grid, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot open file for writing: " + path.string());
    write_grid_csv(grid, out);
    if (!out)
        throw IoError("write failed: " + path.string());
}

} // namespace scloss
