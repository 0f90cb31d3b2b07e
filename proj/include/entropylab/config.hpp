#pragma once

#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "entropylab/conformal_metric.hpp"
#include "entropylab/errors.hpp"

namespace entropylab {

enum class SurfaceType { Torus, Genus2 };
enum class ExperimentKind { Volume, MinimalEntropy, Strip, BowenOracles, Compare };

// Batch-run description. Grammar: one `key = value` per line, `#` comments,
// every key single-shot except `bump` (center_x center_y radius amplitude).
// Unknown keys are rejected. Keys prefixed tol_ / expect_ collect into the
// tolerance table.
struct ExperimentConfig {
    SurfaceType surface = SurfaceType::Genus2;
    ExperimentKind experiment = ExperimentKind::Volume;
    std::vector<BumpSpec> bumps;
    double u_offset = 0.0;
    std::vector<double> r_grid;
    std::vector<double> T_grid;
    std::vector<double> eps_grid;
    std::vector<int> strip_T_grid;
    std::uint64_t seed = 42;
    unsigned threads = 0; // 0: resolve at run time
    std::string out_dir = "out";
    double eps_net = 0.5;
    double family_r = 5.5;
    double trim = 1.5;
    int cert_pairs = 8;
    int probes = 0; // spanning probes; 0 disables the spanning stage
    std::size_t mc_samples = 100000;
    double strip_beta = 1.0;
    double strip_delta = 0.2;
    int strip_pool = 0; // 0 disables strips inside `compare`
    double base_x = 0.0, base_y = 0.0;
    std::map<std::string, double> tolerances;

    std::string surface_name() const { return surface == SurfaceType::Torus ? "torus" : "genus2"; }
    std::string experiment_name() const {
        switch (experiment) {
            case ExperimentKind::Volume: return "volume";
            case ExperimentKind::MinimalEntropy: return "minimal-entropy";
            case ExperimentKind::Strip: return "strip";
            case ExperimentKind::BowenOracles: return "bowen-oracles";
            case ExperimentKind::Compare: return "compare";
        }
        return "volume";
    }
};

namespace config_detail {

inline std::string trim_ws(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

inline double parse_number(const std::string& v, int line, const std::string& key) {
    std::size_t pos = 0;
    double x = 0;
    try {
        x = std::stod(v, &pos);
    } catch (...) {
        throw ConfigError("line " + std::to_string(line) + ": key '" + key +
                          "': malformed number '" + v + "'");
    }
    if (pos != v.size())
        throw ConfigError("line " + std::to_string(line) + ": key '" + key +
                          "': trailing characters in number '" + v + "'");
    return x;
}

inline std::vector<double> parse_grid(const std::string& v, int line, const std::string& key) {
    std::istringstream ss(v);
    std::vector<double> out;
    std::string tok;
    while (ss >> tok) out.push_back(parse_number(tok, line, key));
    if (out.empty())
        throw ConfigError("line " + std::to_string(line) + ": key '" + key + "': empty grid");
    for (std::size_t i = 0; i + 1 < out.size(); ++i)
        if (out[i] >= out[i + 1])
            throw ConfigError("line " + std::to_string(line) + ": key '" + key +
                              "': grid must increase strictly");
    return out;
}

} // namespace config_detail

inline ExperimentConfig parse_config(const std::string& text) {
    using config_detail::parse_grid;
    using config_detail::parse_number;
    using config_detail::trim_ws;

    ExperimentConfig cfg;
    std::set<std::string> seen;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string s = raw;
        std::size_t hash = s.find('#');
        if (hash != std::string::npos) s = s.substr(0, hash);
        s = trim_ws(s);
        if (s.empty()) continue;
        std::size_t eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line) + ": expected 'key = value'");
        std::string key = trim_ws(s.substr(0, eq));
        std::string val = trim_ws(s.substr(eq + 1));
        if (key.empty() || val.empty())
            throw ConfigError("line " + std::to_string(line) + ": empty key or value");

        if (key != "bump" && !seen.insert(key).second)
            throw ConfigError("line " + std::to_string(line) + ": duplicate key '" + key + "'");

        if (key == "surface") {
            if (val == "torus")
                cfg.surface = SurfaceType::Torus;
            else if (val == "genus2")
                cfg.surface = SurfaceType::Genus2;
            else
                throw ConfigError("line " + std::to_string(line) + ": surface must be torus|genus2");
        } else if (key == "experiment") {
            if (val == "volume") cfg.experiment = ExperimentKind::Volume;
            else if (val == "minimal-entropy") cfg.experiment = ExperimentKind::MinimalEntropy;
            else if (val == "strip") cfg.experiment = ExperimentKind::Strip;
            else if (val == "bowen-oracles") cfg.experiment = ExperimentKind::BowenOracles;
            else if (val == "compare") cfg.experiment = ExperimentKind::Compare;
            else
                throw ConfigError("line " + std::to_string(line) + ": unknown experiment '" + val + "'");
        } else if (key == "bump") {
            std::istringstream bs(val);
            double cx, cy, radius, amp;
            if (!(bs >> cx >> cy >> radius >> amp))
                throw ConfigError("line " + std::to_string(line) +
                                  ": bump needs 'center_x center_y radius amplitude'");
            std::string rest;
            if (bs >> rest)
                throw ConfigError("line " + std::to_string(line) + ": bump has trailing tokens");
            if (radius <= 0.0)
                throw ConfigError("line " + std::to_string(line) + ": bump radius must be positive");
            cfg.bumps.push_back({Point(cx, cy), radius, amp});
        } else if (key == "u_offset") {
            cfg.u_offset = parse_number(val, line, key);
        } else if (key == "r_grid") {
            cfg.r_grid = parse_grid(val, line, key);
        } else if (key == "T_grid") {
            cfg.T_grid = parse_grid(val, line, key);
        } else if (key == "eps_grid") {
            cfg.eps_grid = parse_grid(val, line, key);
        } else if (key == "strip_T_grid") {
            auto g = parse_grid(val, line, key);
            cfg.strip_T_grid.clear();
            for (double x : g) {
                if (x != std::floor(x))
                    throw ConfigError("line " + std::to_string(line) + ": strip_T_grid must be integers");
                cfg.strip_T_grid.push_back(int(x));
            }
        } else if (key == "seed") {
            double x = parse_number(val, line, key);
            if (x < 0 || x != std::floor(x))
                throw ConfigError("line " + std::to_string(line) + ": seed must be a nonnegative integer");
            cfg.seed = std::uint64_t(x);
        } else if (key == "threads") {
            double x = parse_number(val, line, key);
            if (x < 0 || x != std::floor(x))
                throw ConfigError("line " + std::to_string(line) + ": threads must be a nonnegative integer");
            cfg.threads = unsigned(x);
        } else if (key == "out") {
            cfg.out_dir = val;
        } else if (key == "eps_net") {
            cfg.eps_net = parse_number(val, line, key);
        } else if (key == "family_r") {
            cfg.family_r = parse_number(val, line, key);
        } else if (key == "trim") {
            cfg.trim = parse_number(val, line, key);
        } else if (key == "cert_pairs") {
            cfg.cert_pairs = int(parse_number(val, line, key));
        } else if (key == "probes") {
            cfg.probes = int(parse_number(val, line, key));
        } else if (key == "mc_samples") {
            cfg.mc_samples = std::size_t(parse_number(val, line, key));
        } else if (key == "strip_beta") {
            cfg.strip_beta = parse_number(val, line, key);
        } else if (key == "strip_delta") {
            cfg.strip_delta = parse_number(val, line, key);
        } else if (key == "strip_pool") {
            cfg.strip_pool = int(parse_number(val, line, key));
        } else if (key == "base_x") {
            cfg.base_x = parse_number(val, line, key);
        } else if (key == "base_y") {
            cfg.base_y = parse_number(val, line, key);
        } else if (key.rfind("tol_", 0) == 0 || key.rfind("expect_", 0) == 0) {
            cfg.tolerances[key] = parse_number(val, line, key);
        } else {
            throw ConfigError("line " + std::to_string(line) + ": unknown key '" + key + "'");
        }
    }
    return cfg;
}

inline std::string serialize_config(const ExperimentConfig& cfg) {
    std::ostringstream out;
    out.precision(17);
    out << "surface = " << cfg.surface_name() << "\n";
    out << "experiment = " << cfg.experiment_name() << "\n";
    for (const auto& b : cfg.bumps)
        out << "bump = " << b.center.x() << " " << b.center.y() << " " << b.radius << " "
            << b.amplitude << "\n";
    if (cfg.u_offset != 0.0) out << "u_offset = " << cfg.u_offset << "\n";
    auto grid = [&](const char* key, const std::vector<double>& g) {
        if (g.empty()) return;
        out << key << " =";
        for (double x : g) out << " " << x;
        out << "\n";
    };
    grid("r_grid", cfg.r_grid);
    grid("T_grid", cfg.T_grid);
    grid("eps_grid", cfg.eps_grid);
    if (!cfg.strip_T_grid.empty()) {
        out << "strip_T_grid =";
        for (int x : cfg.strip_T_grid) out << " " << x;
        out << "\n";
    }
    out << "seed = " << cfg.seed << "\n";
    if (cfg.threads) out << "threads = " << cfg.threads << "\n";
    out << "out = " << cfg.out_dir << "\n";
    out << "eps_net = " << cfg.eps_net << "\n";
    out << "family_r = " << cfg.family_r << "\n";
    out << "trim = " << cfg.trim << "\n";
    out << "cert_pairs = " << cfg.cert_pairs << "\n";
    if (cfg.probes) out << "probes = " << cfg.probes << "\n";
    out << "mc_samples = " << cfg.mc_samples << "\n";
    out << "strip_beta = " << cfg.strip_beta << "\n";
    out << "strip_delta = " << cfg.strip_delta << "\n";
    if (cfg.strip_pool) out << "strip_pool = " << cfg.strip_pool << "\n";
    if (cfg.base_x != 0.0) out << "base_x = " << cfg.base_x << "\n";
    if (cfg.base_y != 0.0) out << "base_y = " << cfg.base_y << "\n";
    for (const auto& [k, v] : cfg.tolerances) out << k << " = " << v << "\n";
    return out.str();
}

} // namespace entropylab
