#include "scloss/tables.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <map>
#include <numeric>
#include <sstream>

namespace scloss {

namespace {

#include "embedded_data.inc"

constexpr std::array<double, 5> kRhoAxis{2.0, 4.0, 6.0, 8.0, 12.0};

std::vector<std::string> split_ws(std::string_view line) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && line[i] == ' ')
            ++i;
        std::size_t j = i;
        while (j < line.size() && line[j] != ' ')
            ++j;
        if (j > i)
            out.emplace_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

double parse_num(const std::string& tok) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || ptr != tok.data() + tok.size())
        throw Error("bad embedded number: '" + tok + "'");
    return v;
}

std::vector<std::vector<std::string>> tokenize_block(std::string_view text) {
    std::vector<std::vector<std::string>> rows;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos)
            end = text.size();
        auto toks = split_ws(text.substr(pos, end - pos));
        if (!toks.empty())
            rows.push_back(std::move(toks));
        if (end == text.size())
            break;
        pos = end + 1;
    }
    return rows;
}

MetricGrid build_grid(std::string_view text, std::string name) {
    MetricGrid g;
    g.metric_name = std::move(name);
    g.rho_axis.assign(kRhoAxis.begin(), kRhoAxis.end());
    struct Row {
        double gamma;
        std::vector<double> vals;
    };
    std::vector<Row> rows;
    for (const auto& toks : tokenize_block(text)) {
        if (toks.size() != 1 + kRhoAxis.size())
            throw Error("embedded grid row has " + std::to_string(toks.size()) + " fields");
        Row r;
        r.gamma = parse_num(toks[0]);
        for (std::size_t j = 1; j < toks.size(); ++j)
            r.vals.push_back(parse_num(toks[j]));
        rows.push_back(std::move(r));
    }
    // publication order is descending SNR; the grid axis ascends
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.gamma < b.gamma; });
    for (auto& r : rows) {
        g.gamma_axis.push_back(r.gamma);
        g.values.push_back(std::move(r.vals));
    }
    g.validate();
    return g;
}

UnifiedParams build_params(std::string_view text) {
    UnifiedParams p;
    p.gamma_scale = GammaScale::linear;
    auto rows = tokenize_block(text);
    if (rows.empty() || rows[0].size() != 2 || rows[0][0] != "mu0")
        throw Error("embedded parameter block must start with 'mu0 <value>'");
    p.mu0 = parse_num(rows[0][1]);
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].size() != 6)
            throw Error("embedded parameter row has " + std::to_string(rows[r].size()) + " fields");
        TermParams t;
        t.mu1 = parse_num(rows[r][0]);
        t.mu2 = parse_num(rows[r][1]);
        t.mu3 = parse_num(rows[r][2]);
        t.mu4 = parse_num(rows[r][3]);
        t.mu5 = parse_num(rows[r][4]) * 1e-3; // printed scaled by 1e3
        t.mu6 = parse_num(rows[r][5]);
        p.terms.push_back(t);
    }
    return p;
}

struct TableEntry {
    std::string_view grid_text;
    std::string_view params_text;
};

const std::map<std::string, TableEntry, std::less<>>& registry() {
    static const std::map<std::string, TableEntry, std::less<>> reg{
        {"djscc-psnr", {kDjsccPsnrText, kParamsDjsccPsnrText}},
        {"djscc-ssim", {kDjsccSsimText, kParamsDjsccSsimText}},
        {"djscc-mse", {kDjsccMseText, kParamsDjsccMseText}},
        {"evit-accuracy", {kEvitAccuracyText, kParamsEvitAccuracyText}},
        {"evit-precision", {kEvitPrecisionText, kParamsEvitPrecisionText}},
        {"evit-recall", {kEvitRecallText, kParamsEvitRecallText}},
    };
    return reg;
}

const TableEntry& lookup(std::string_view name) {
    auto it = registry().find(name);
    if (it == registry().end()) {
        std::string msg = "unknown table '" + std::string(name) + "'; valid names:";
        for (const auto& [key, _] : registry())
            msg += " " + key;
        throw UnknownTableError(msg);
    }
    return it->second;
}

} // namespace

const std::vector<std::string>& embedded_table_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto& [key, _] : registry())
            v.push_back(key);
        return v;
    }();
    return names;
}

const MetricGrid& embedded_table(std::string_view name) {
    static const std::map<std::string, MetricGrid, std::less<>> grids = [] {
        std::map<std::string, MetricGrid, std::less<>> m;
        for (const auto& [key, entry] : registry())
            m.emplace(key, build_grid(entry.grid_text, key));
        return m;
    }();
    lookup(name); // throws with the valid-name list
    return grids.find(name)->second;
}

std::string_view embedded_table_text(std::string_view name) {
    return lookup(name).grid_text;
}

const UnifiedParams& published_params(std::string_view name) {
    static const std::map<std::string, UnifiedParams, std::less<>> sets = [] {
        std::map<std::string, UnifiedParams, std::less<>> m;
        for (const auto& [key, entry] : registry())
            m.emplace(key, build_params(entry.params_text));
        return m;
    }();
    lookup(name);
    return sets.find(name)->second;
}

std::string_view published_params_text(std::string_view name) {
    return lookup(name).params_text;
}

std::span<const PublishedComparison> published_comparison_mse() {
    static const std::vector<PublishedComparison> rows = [] {
        std::vector<PublishedComparison> v;
        for (const auto& toks : tokenize_block(kComparisonMseText)) {
            if (toks.size() != 4)
                throw Error("embedded comparison row has " + std::to_string(toks.size()) + " fields");
            v.push_back({parse_num(toks[0]), parse_num(toks[1]), parse_num(toks[2]),
                         parse_num(toks[3])});
        }
        return v;
    }();
    return rows;
}

std::string_view published_comparison_text() {
    return kComparisonMseText;
}

} // namespace scloss
