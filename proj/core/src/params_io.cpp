#include "scloss/params_io.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "scloss/version.hpp"

namespace scloss {

using json = nlohmann::ordered_json;

namespace {

double get_num(const json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_number())
        throw Error(std::string("parameter file: missing or non-numeric field '") + key + "'");
    return j[key].get<double>();
}

} // namespace

std::string model_kind(const ModelParams& p) {
    if (std::holds_alternative<UnifiedParams>(p))
        return "unified";
    if (std::holds_alternative<GSigmoidParams>(p))
        return "gsigmoid";
    return "sumexp";
}

std::string params_to_json(const ModelParams& p) {
    json j;
    if (const auto* u = std::get_if<UnifiedParams>(&p)) {
        j["model"] = "unified";
        j["gamma_scale"] = u->gamma_scale == GammaScale::linear ? "linear" : "db";
        j["mu0"] = u->mu0;
        j["n_c"] = u->terms.size();
        j["terms"] = json::array();
        for (const TermParams& t : u->terms)
            j["terms"].push_back({{"mu1", t.mu1},
                                  {"mu2", t.mu2},
                                  {"mu3", t.mu3},
                                  {"mu4", t.mu4},
                                  {"mu5", t.mu5},
                                  {"mu6", t.mu6}});
    } else if (const auto* g = std::get_if<GSigmoidParams>(&p)) {
        j["model"] = "gsigmoid";
        j["k1"] = g->k1;
        j["k2"] = g->k2;
        j["k3"] = g->k3;
        j["k4"] = g->k4;
    } else {
        const auto& s = std::get<SumExpParams>(p);
        j["model"] = "sumexp";
        j["k5"] = s.k5;
        j["k6"] = s.k6;
        j["k7"] = s.k7;
        j["k8"] = s.k8;
        j["k9"] = s.k9;
    }
    return j.dump(2) + "\n";
}

ModelParams params_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(std::string("parameter file is not valid JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("model") || !j["model"].is_string())
        throw Error("parameter file must be an object with a 'model' kind tag");
    const std::string kind = j["model"].get<std::string>();
    if (kind == "unified") {
        UnifiedParams u;
        u.mu0 = get_num(j, "mu0");
        if (j.contains("gamma_scale")) {
            const std::string s = j["gamma_scale"].get<std::string>();
            if (s == "linear")
                u.gamma_scale = GammaScale::linear;
            else if (s == "db")
                u.gamma_scale = GammaScale::db;
            else
                throw Error("gamma_scale must be 'db' or 'linear'");
        }
        if (!j.contains("terms") || !j["terms"].is_array())
            throw Error("unified parameter file needs a 'terms' array");
        for (const json& tj : j["terms"]) {
            TermParams t;
            t.mu1 = get_num(tj, "mu1");
            t.mu2 = get_num(tj, "mu2");
            t.mu3 = get_num(tj, "mu3");
            t.mu4 = get_num(tj, "mu4");
            t.mu5 = get_num(tj, "mu5");
            t.mu6 = get_num(tj, "mu6");
            u.terms.push_back(t);
        }
        if (j.contains("n_c") && j["n_c"].get<std::size_t>() != u.terms.size())
            throw Error("n_c does not match the number of terms");
        return u;
    }
    if (kind == "gsigmoid") {
        GSigmoidParams g;
        g.k1 = get_num(j, "k1");
        g.k2 = get_num(j, "k2");
        g.k3 = get_num(j, "k3");
        g.k4 = get_num(j, "k4");
        return g;
    }
    if (kind == "sumexp") {
        SumExpParams s;
        s.k5 = get_num(j, "k5");
        s.k6 = get_num(j, "k6");
        s.k7 = get_num(j, "k7");
        s.k8 = get_num(j, "k8");
        s.k9 = get_num(j, "k9");
        return s;
    }
    throw Error("unknown model kind '" + kind + "' (expected unified, gsigmoid or sumexp)");
}

void save_params(const ModelParams& p, const std::filesystem::path& path) {
    write_text_file(path, params_to_json(p));
}

ModelParams load_params(const std::filesystem::path& path) {
    return params_from_json(read_text_file(path));
}

// ---------------------------------------------------------------------------

std::string config_to_json(const FitConfig& cfg) {
    json j;
    j["n_c"] = cfg.n_c;
    j["alphas"] = cfg.alphas;
    j["max_iters"] = cfg.max_iters;
    j["n_starts"] = cfg.n_starts;
    j["seed"] = cfg.seed;
    j["rel_tol"] = cfg.rel_tol;
    j["patience"] = cfg.patience;
    j["reset_gradients"] = cfg.reset_gradients;
    return j.dump(2) + "\n";
}

FitConfig config_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(std::string("config file is not valid JSON: ") + e.what());
    }
    if (!j.is_object())
        throw Error("config file must be a JSON object");
    FitConfig cfg;
    for (const auto& [key, value] : j.items()) {
        try {
            if (key == "n_c")
                cfg.n_c = value.get<int>();
            else if (key == "alphas") {
                if (!value.is_array() || value.size() != cfg.alphas.size())
                    throw Error("alphas must be an array of 7 learning rates");
                for (std::size_t i = 0; i < cfg.alphas.size(); ++i)
                    cfg.alphas[i] = value[i].get<double>();
            } else if (key == "max_iters")
                cfg.max_iters = value.get<long>();
            else if (key == "n_starts")
                cfg.n_starts = value.get<int>();
            else if (key == "seed")
                cfg.seed = value.get<std::uint64_t>();
            else if (key == "rel_tol")
                cfg.rel_tol = value.get<double>();
            else if (key == "patience")
                cfg.patience = value.get<int>();
            else if (key == "reset_gradients")
                cfg.reset_gradients = value.get<bool>();
            else
                throw Error("unknown config key '" + key + "'");
        } catch (const json::exception& e) {
            throw Error("config key '" + key + "': " + e.what());
        }
    }
    cfg.validate();
    return cfg;
}

FitConfig load_config(const std::filesystem::path& path) {
    return config_from_json(read_text_file(path));
}

std::string config_hash(const FitConfig& cfg) {
    const std::string canon = config_to_json(cfg);
    std::uint64_t h = 1469598103934665603ull; // FNV-1a
    for (unsigned char c : canon) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string report_to_json(const FitReport& r) {
    json j;
    j["final_sse"] = r.final_sse;
    j["final_avg_mse"] = r.final_avg_mse;
    j["iterations_used"] = r.iterations_used;
    j["converged"] = r.converged;
    j["best_start_index"] = r.best_start_index;
    j["divergence_flag"] = r.divergence_flag;
    j["loss_curve"] = r.loss_curve;
    j["start_final_sse"] = json::array();
    for (std::size_t s = 0; s < r.start_final_sse.size(); ++s) {
        if (r.start_diverged[s])
            j["start_final_sse"].push_back(nullptr);
        else
            j["start_final_sse"].push_back(r.start_final_sse[s]);
    }
    j["start_diverged"] = r.start_diverged;
    return j.dump(2) + "\n";
}

std::string comparison_to_json(const ComparisonReport& r) {
    json j;
    j["metric_name"] = r.metric_name;
    j["rows"] = json::array();
    for (const ComparisonRow& row : r.rows)
        j["rows"].push_back({{"rho", row.rho},
                             {"unified_avg_mse", row.unified_avg_mse},
                             {"gsigmoid_avg_mse", row.gsigmoid_avg_mse},
                             {"sumexp_avg_mse", row.sumexp_avg_mse},
                             {"winner", row.winner}});
    j["published"] = json::array();
    for (const PublishedComparison& pc : r.published)
        j["published"].push_back({{"rho", pc.rho},
                                  {"proposed", pc.proposed},
                                  {"gsigmoid", pc.gsigmoid},
                                  {"sumexp", pc.sumexp}});
    j["unified_params"] = json::parse(params_to_json(r.unified));
    j["gsigmoid_params"] = json::array();
    for (const auto& [rho, p] : r.gsigmoid_fits) {
        json e = json::parse(params_to_json(ModelParams(p)));
        e["rho"] = rho;
        j["gsigmoid_params"].push_back(e);
    }
    j["sumexp_params"] = json::array();
    for (const auto& [rho, p] : r.sumexp_fits) {
        json e = json::parse(params_to_json(ModelParams(p)));
        e["rho"] = rho;
        j["sumexp_params"].push_back(e);
    }
    return j.dump(2) + "\n";
}

std::string manifest_to_json(const RunManifest& m) {
    json j;
    j["command"] = m.command;
    j["config_hash"] = m.config_hash;
    j["seed"] = m.seed;
    j["input_ref"] = m.input_ref;
    j["outputs"] = m.outputs;
    j["version"] = m.version;
    return j.dump(2) + "\n";
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot open file for writing: " + path.string());
    out << text;
    if (!out)
        throw IoError("write failed: " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open file: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace scloss
