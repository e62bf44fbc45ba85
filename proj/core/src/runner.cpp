#include "fracheat/runner.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "fracheat/kpz.hpp"

namespace fracheat::runner {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

class Args {
public:
    Args(const std::map<std::string, std::string>& kv) : kv_(kv) {}

    double num(const std::string& key, double def) {
        seen_.insert(key);
        auto it = kv_.find(key);
        return it == kv_.end() ? def : std::stod(it->second);
    }
    long integer(const std::string& key, long def) {
        seen_.insert(key);
        auto it = kv_.find(key);
        return it == kv_.end() ? def : std::stol(it->second);
    }
    std::string str(const std::string& key, const std::string& def) {
        seen_.insert(key);
        auto it = kv_.find(key);
        return it == kv_.end() ? def : it->second;
    }
    bool flag(const std::string& key, bool def) {
        seen_.insert(key);
        auto it = kv_.find(key);
        if (it == kv_.end()) return def;
        return it->second == "1" || it->second == "true";
    }
    template <typename T>
    std::vector<T> list(const std::string& key, std::vector<T> def) {
        seen_.insert(key);
        auto it = kv_.find(key);
        if (it == kv_.end()) return def;
        std::vector<T> out;
        std::stringstream ss(it->second);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            tok = trim(tok);
            if (tok.empty()) continue;
            if constexpr (std::is_same_v<T, int>)
                out.push_back(std::stoi(tok));
            else
                out.push_back(std::stod(tok));
        }
        return out;
    }
    void finish() const {
        for (const auto& [k, v] : kv_)
            if (!seen_.count(k))
                throw std::invalid_argument("unknown config key '" + k + "'");
    }

private:
    const std::map<std::string, std::string>& kv_;
    std::set<std::string> seen_;
};

stats::PipelineConfig pipe_from(Args& a) {
    stats::PipelineConfig p;
    p.alpha = a.num("alpha", p.alpha);
    p.half_length = a.num("L", p.half_length);
    p.n_space = static_cast<int>(a.integer("grid_n", p.n_space));
    p.t = a.num("t", p.t);
    p.sigma = a.str("sigma", p.sigma);
    p.u0 = a.str("u0", p.u0);
    p.replicas = a.integer("replicas", p.replicas);
    if (p.replicas <= 0)
        throw std::invalid_argument("replicas must be positive");
    p.base_seed = static_cast<uint64_t>(a.integer("base_seed", 1234));
    p.workers = static_cast<int>(a.integer("workers", 0));
    p.t_ext_factor = a.num("t_ext_factor", p.t_ext_factor);
    return p;
}

stats::ExperimentReport dispatch(const RunConfig& cfg) {
    Args a(cfg.kv);
    const std::string& name = cfg.experiment;
    stats::ExperimentReport rep;
    if (name == "sampler-oracle") {
        stats::SamplerOracleConfig c;
        c.pipe = pipe_from(a);
        c.eps_cells = a.list<int>("eps_cells", c.eps_cells);
        c.rel_tolerance = a.num("rel_tolerance", c.rel_tolerance);
        a.finish();
        rep = stats::sampler_vs_oracle(c);
    } else if (name == "decomposition") {
        stats::DecompositionConfig c;
        c.pipe = pipe_from(a);
        c.eps_cells = a.list<int>("eps_cells", c.eps_cells);
        c.rel_tolerance = a.num("rel_tolerance", c.rel_tolerance);
        c.identity_tol = a.num("identity_tol", c.identity_tol);
        a.finish();
        rep = stats::decomposition_check(c);
    } else if (name == "ratio") {
        stats::RatioConfig c;
        c.pipe = pipe_from(a);
        c.eps_cells = a.list<int>("eps_cells", c.eps_cells);
        c.lambda0 = a.num("lambda0", c.lambda0);
        c.final_threshold = a.num("final_threshold", c.final_threshold);
        a.finish();
        rep = stats::ratio_statistic(c);
    } else if (name == "rate") {
        stats::RateConfig c;
        c.pipe = pipe_from(a);
        c.eps_cells = a.list<int>("eps_cells", c.eps_cells);
        c.rel_band = a.num("rel_band", c.rel_band);
        a.finish();
        rep = stats::rate_exponent_fit(c);
    } else if (name == "lil") {
        stats::LilConfig c;
        c.pipe = pipe_from(a);
        c.k_min = static_cast<int>(a.integer("k_min", c.k_min));
        c.envelope_slack = a.num("envelope_slack", c.envelope_slack);
        c.quantile_target = a.num("quantile_target", c.quantile_target);
        c.norm_const = a.num("norm_const", c.norm_const);
        a.finish();
        rep = stats::lil_scan(c);
    } else if (name == "density") {
        stats::DensityConfig c;
        c.pipe = pipe_from(a);
        c.s_values = a.list<double>("s_values", c.s_values);
        a.finish();
        rep = stats::density_average(c);
    } else if (name == "clt") {
        stats::CltConfig c;
        c.pipe = pipe_from(a);
        c.eps_cells = static_cast<int>(a.integer("eps_cells", c.eps_cells));
        c.reference_replicas =
            a.integer("reference_replicas", c.reference_replicas);
        c.bootstrap = static_cast<int>(a.integer("bootstrap", c.bootstrap));
        c.ks_threshold = a.num("ks_threshold", c.ks_threshold);
        a.finish();
        rep = stats::clt_check(c);
    } else if (name == "variation") {
        stats::VariationConfig c;
        c.pipe = pipe_from(a);
        c.mesh_cells = static_cast<int>(a.integer("mesh_cells", c.mesh_cells));
        c.a = a.num("a", c.a);
        c.b = a.num("b", c.b);
        c.phi = a.str("phi", c.phi);
        c.rel_tolerance = a.num("rel_tolerance", c.rel_tolerance);
        a.finish();
        rep = stats::variation_sum(c);
    } else if (name == "localization" || name == "localization-u") {
        stats::LocalizationConfig c;
        c.pipe = pipe_from(a);
        c.eps_cells = static_cast<int>(a.integer("eps_cells", c.eps_cells));
        c.betas = a.list<double>("betas", c.betas);
        c.slope_threshold = a.num("slope_threshold", c.slope_threshold);
        c.match_tolerance = a.num("match_tolerance", c.match_tolerance);
        c.sigma_weighted = name == "localization-u";
        a.finish();
        rep = stats::localization_mc(c);
    } else if (name == "holder") {
        stats::HolderConfig c;
        c.pipe = pipe_from(a);
        c.space_lags = a.list<int>("space_lags", c.space_lags);
        c.time_lags = a.list<int>("time_lags", c.time_lags);
        c.tolerance = a.num("tolerance", c.tolerance);
        a.finish();
        rep = stats::holder_slope(c);
    } else if (name == "moment") {
        stats::MomentConfig c;
        c.pipe = pipe_from(a);
        c.k = static_cast<int>(a.integer("k", c.k));
        c.snapshots = static_cast<int>(a.integer("snapshots", c.snapshots));
        a.finish();
        rep = stats::moment_bound_check(c);
    } else if (name.rfind("kpz-", 0) == 0) {
        kpz::KpzConfig c;
        c.pipe = pipe_from(a);
        c.eps_cells = static_cast<int>(a.integer("eps_cells", c.eps_cells));
        c.mesh_cells = static_cast<int>(a.integer("mesh_cells", c.mesh_cells));
        c.a = a.num("a", c.a);
        c.b = a.num("b", c.b);
        c.phi = a.str("phi", c.phi);
        c.qv_tolerance = a.num("qv_tolerance", c.qv_tolerance);
        c.ks_threshold = a.num("ks_threshold", c.ks_threshold);
        c.ratio_eps_cells = a.list<int>("ratio_eps_cells", c.ratio_eps_cells);
        c.ratio_threshold = a.num("ratio_threshold", c.ratio_threshold);
        c.envelope_slack = a.num("envelope_slack", c.envelope_slack);
        c.quantile_target = a.num("quantile_target", c.quantile_target);
        a.finish();
        if (name == "kpz-qv")
            rep = kpz::kpz_quadratic_variation(c);
        else if (name == "kpz-clt")
            rep = kpz::kpz_clt(c);
        else if (name == "kpz-lil")
            rep = kpz::kpz_lil(c);
        else if (name == "kpz-ratio")
            rep = kpz::kpz_ratio(c);
        else
            throw std::invalid_argument("unknown kpz experiment " + name);
    } else {
        throw std::invalid_argument("unknown experiment '" + name + "'");
    }
    return rep;
}

}  // namespace

std::vector<std::string> experiment_names() {
    return {"sampler-oracle", "decomposition", "ratio",        "rate",
            "lil",            "density",       "clt",          "variation",
            "localization",   "localization-u", "holder",      "moment",
            "kpz-qv",         "kpz-clt",       "kpz-lil",      "kpz-ratio"};
}

RunConfig parse_config_text(const std::string& text) {
    RunConfig cfg;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " +
                                        std::to_string(lineno) +
                                        ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty() || val.empty())
            throw std::invalid_argument("config line " +
                                        std::to_string(lineno) +
                                        ": empty key or value");
        if (key == "experiment")
            cfg.experiment = val;
        else if (key == "out_dir")
            cfg.out_dir = val;
        else if (!cfg.kv.emplace(key, val).second)
            throw std::invalid_argument("duplicate config key '" + key + "'");
    }
    if (cfg.experiment.empty())
        throw std::invalid_argument("config: missing 'experiment' key");
    return cfg;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

std::string config_hash(const RunConfig& cfg) {
    std::string canon = "experiment=" + cfg.experiment + "\n";
    for (const auto& [k, v] : cfg.kv) canon += k + "=" + v + "\n";
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : canon) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(h));
    return buf;
}

int run(const RunConfig& cfg, stats::ExperimentReport* report_out) {
    stats::ExperimentReport rep;
    try {
        rep = dispatch(cfg);
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kConfigError;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "runtime error: %s\n", e.what());
        return kRuntimeError;
    }

    const std::string hash = config_hash(cfg);
    rep.config_echo.emplace_back("config_hash", hash);
    try {
        namespace fs = std::filesystem;
        fs::create_directories(cfg.out_dir);
        {
            std::ofstream out(fs::path(cfg.out_dir) /
                              ("report_" + hash + ".json"));
            out << rep.to_json() << "\n";
        }
        for (const auto& curve : rep.curves) {
            std::ofstream out(fs::path(cfg.out_dir) /
                              (hash + "_" + curve.name + ".csv"));
            for (size_t i = 0; i < curve.columns.size(); ++i)
                out << (i ? "," : "") << curve.columns[i];
            out << "\n";
            char buf[40];
            for (const auto& row : curve.rows) {
                for (size_t i = 0; i < row.size(); ++i) {
                    std::snprintf(buf, sizeof(buf), "%.17g", row[i]);
                    out << (i ? "," : "") << buf;
                }
                out << "\n";
            }
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "runtime error writing outputs: %s\n", e.what());
        return kRuntimeError;
    }
    if (report_out) *report_out = rep;
    return rep.pass() ? kPass : kCriteriaFail;
}

}  // namespace fracheat::runner
