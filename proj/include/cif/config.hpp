#pragma once

#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

// Experiment configuration: flat "section.key = value" text files, strict
// about unknown keys and out-of-range values so that a typo never silently
// changes an experiment.

namespace cif {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
    // reward parameters
    std::string reward_preset = "baseline";  // baseline | b_squared | b_cubed | custom
    double delta1 = 0.3, delta2 = 0.95;
    double alpha1 = 0.288, alpha2 = 0.278;
    double beta1 = 0.11, beta2 = 0.1;
    double gamma1 = 0.1, gamma2 = 0.414;
    bool reward_custom_touched = false;

    // observation model
    std::string obs_source = "calibrate";  // calibrate | explicit | power
    int obs_power = 2;
    double b11 = 0.8, b12 = 0.2, b21 = 0.4, b22 = 0.6;

    // fusion cost
    std::string cost_kind = "linear";  // linear | entropy
    double phi_s = 0.4;
    double phi_e = 0.25;
    std::string psi_kind = "quadratic";  // quadratic | two_level | table
    double psi_offset = 0.1, psi_coeff = 1.0;
    double psi_lo = 0.6, psi_hi = 0.35, psi_split = 0.75;
    std::string psi_table;  // "p2:w,p2:w,..."

    // solver
    double rho = 0.4;
    int grid_points = 1000;
    int max_iters = 1000;
    double tol = 1e-9;

    // simulation
    int sim_paths = 100;
    int sim_horizon = 500;
    std::uint64_t seed = 1;
    std::string sim_policy = "threshold";  // zero | threshold | consistency | grid
    double sim_prior_p2 = 0.5;
    int sim_theta = 0;  // 0 = draw from prior
    double sim_epsilon = 0.1;
    double sim_threshold = -1.0;  // < 0: take the solved threshold
    std::vector<std::string> sim_models = {"b"};  // subset of b, b2, b3

    // regions command
    int regions_resolution = 101;

    // bound command
    int bound_starts = 21;
    int bound_paths = 200;

    std::string out_dir = "out";
    bool strict = false;
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

inline double parse_double(const std::string& key, const std::string& v) {
    std::size_t pos = 0;
    double x = 0;
    try {
        x = std::stod(v, &pos);
    } catch (const std::exception&) {
        throw ConfigError(key + ": expected a number, got '" + v + "'");
    }
    if (pos != v.size()) throw ConfigError(key + ": trailing characters in '" + v + "'");
    return x;
}

inline std::int64_t parse_int(const std::string& key, const std::string& v) {
    std::size_t pos = 0;
    std::int64_t x = 0;
    try {
        x = std::stoll(v, &pos);
    } catch (const std::exception&) {
        throw ConfigError(key + ": expected an integer, got '" + v + "'");
    }
    if (pos != v.size()) throw ConfigError(key + ": trailing characters in '" + v + "'");
    return x;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError(key + ": expected a boolean, got '" + v + "'");
}

inline std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

inline void require_in(const std::string& key, const std::string& v,
                       std::initializer_list<const char*> allowed) {
    for (const char* a : allowed)
        if (v == a) return;
    std::string msg = key + ": '" + v + "' is not one of {";
    bool first = true;
    for (const char* a : allowed) {
        if (!first) msg += ", ";
        msg += a;
        first = false;
    }
    throw ConfigError(msg + "}");
}

inline void require_range(const std::string& key, double v, double lo, double hi) {
    if (v < lo || v > hi) {
        std::ostringstream os;
        os << key << ": " << v << " outside [" << lo << ", " << hi << "]";
        throw ConfigError(os.str());
    }
}

}  // namespace detail

inline void apply_config_entry(ExperimentConfig& c, const std::string& key,
                               const std::string& value) {
    using namespace detail;
    const auto d = [&] { return parse_double(key, value); };
    const auto i = [&] { return parse_int(key, value); };

    if (key == "reward.preset") {
        require_in(key, value, {"baseline", "b_squared", "b_cubed", "custom"});
        c.reward_preset = value;
    } else if (key == "reward.delta1") { c.delta1 = d(); c.reward_custom_touched = true; }
    else if (key == "reward.delta2") { c.delta2 = d(); c.reward_custom_touched = true; }
    else if (key == "reward.alpha1") { c.alpha1 = d(); c.reward_custom_touched = true; }
    else if (key == "reward.alpha2") { c.alpha2 = d(); c.reward_custom_touched = true; }
    else if (key == "reward.beta1") { c.beta1 = d(); c.reward_custom_touched = true; }
    else if (key == "reward.beta2") { c.beta2 = d(); c.reward_custom_touched = true; }
    else if (key == "reward.gamma1") { c.gamma1 = d(); c.reward_custom_touched = true; }
    else if (key == "reward.gamma2") { c.gamma2 = d(); c.reward_custom_touched = true; }
    else if (key == "obs.source") {
        require_in(key, value, {"calibrate", "explicit", "power"});
        c.obs_source = value;
    } else if (key == "obs.power") {
        c.obs_power = static_cast<int>(i());
        if (c.obs_power < 1 || c.obs_power > 8) throw ConfigError("obs.power: must be in [1,8]");
    }
    else if (key == "obs.b11") { c.b11 = d(); require_range(key, c.b11, 0, 1); }
    else if (key == "obs.b12") { c.b12 = d(); require_range(key, c.b12, 0, 1); }
    else if (key == "obs.b21") { c.b21 = d(); require_range(key, c.b21, 0, 1); }
    else if (key == "obs.b22") { c.b22 = d(); require_range(key, c.b22, 0, 1); }
    else if (key == "cost.kind") {
        require_in(key, value, {"linear", "entropy"});
        c.cost_kind = value;
    }
    else if (key == "cost.phi_s") { c.phi_s = d(); require_range(key, c.phi_s, 1e-12, 1 - 1e-12); }
    else if (key == "cost.phi_e") { c.phi_e = d(); require_range(key, c.phi_e, 1e-12, 1 - 1e-12); }
    else if (key == "cost.psi_kind") {
        require_in(key, value, {"quadratic", "two_level", "table"});
        c.psi_kind = value;
    }
    else if (key == "cost.psi_offset") { c.psi_offset = d(); }
    else if (key == "cost.psi_coeff") { c.psi_coeff = d(); }
    else if (key == "cost.psi_lo") { c.psi_lo = d(); }
    else if (key == "cost.psi_hi") { c.psi_hi = d(); }
    else if (key == "cost.psi_split") { c.psi_split = d(); require_range(key, c.psi_split, 0, 1); }
    else if (key == "cost.psi_table") { c.psi_table = value; }
    else if (key == "solver.rho") { c.rho = d(); require_range(key, c.rho, 0, 1 - 1e-12); }
    else if (key == "solver.grid") {
        c.grid_points = static_cast<int>(i());
        if (c.grid_points < 2) throw ConfigError("solver.grid: need at least 2 points");
    }
    else if (key == "solver.max_iters") {
        c.max_iters = static_cast<int>(i());
        if (c.max_iters < 1) throw ConfigError("solver.max_iters: must be >= 1");
    }
    else if (key == "solver.tol") { c.tol = d(); require_range(key, c.tol, 0, 1); }
    else if (key == "sim.paths") {
        c.sim_paths = static_cast<int>(i());
        if (c.sim_paths < 1) throw ConfigError("sim.paths: must be >= 1");
    }
    else if (key == "sim.horizon") {
        c.sim_horizon = static_cast<int>(i());
        if (c.sim_horizon < 1) throw ConfigError("sim.horizon: must be >= 1");
    }
    else if (key == "sim.seed") { c.seed = static_cast<std::uint64_t>(i()); }
    else if (key == "sim.policy") {
        require_in(key, value, {"zero", "threshold", "consistency"});
        c.sim_policy = value;
    }
    else if (key == "sim.prior") { c.sim_prior_p2 = d(); require_range(key, c.sim_prior_p2, 0, 1); }
    else if (key == "sim.theta") {
        c.sim_theta = static_cast<int>(i());
        if (c.sim_theta < 0 || c.sim_theta > 2) throw ConfigError("sim.theta: must be 0, 1, or 2");
    }
    else if (key == "sim.epsilon") { c.sim_epsilon = d(); require_range(key, c.sim_epsilon, 1e-12, 1 - 1e-12); }
    else if (key == "sim.threshold") { c.sim_threshold = d(); }
    else if (key == "sim.models") {
        c.sim_models = split_list(value);
        if (c.sim_models.empty()) throw ConfigError("sim.models: empty list");
        for (const auto& m : c.sim_models) require_in("sim.models", m, {"b", "b2", "b3"});
    }
    else if (key == "regions.resolution") {
        c.regions_resolution = static_cast<int>(i());
        if (c.regions_resolution < 2) throw ConfigError("regions.resolution: need >= 2");
    }
    else if (key == "bound.starts") {
        c.bound_starts = static_cast<int>(i());
        if (c.bound_starts < 1) throw ConfigError("bound.starts: must be >= 1");
    }
    else if (key == "bound.paths") {
        c.bound_paths = static_cast<int>(i());
        if (c.bound_paths < 2) throw ConfigError("bound.paths: must be >= 2");
    }
    else if (key == "out.dir") { c.out_dir = value; }
    else {
        throw ConfigError("unknown key '" + key + "'");
    }
}

inline ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig c;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError("line " + std::to_string(lineno) + ": empty key or value");
        apply_config_entry(c, key, value);
    }
    if (c.reward_custom_touched && c.reward_preset != "custom")
        throw ConfigError("reward.*: explicit parameters require reward.preset = custom");
    return c;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

/// Canonical serialization of the effective configuration; the hash of
/// this string goes into every output file's metadata line.
inline std::string serialize_config(const ExperimentConfig& c) {
    std::ostringstream os;
    os.precision(17);
    os << "bound.paths=" << c.bound_paths << '\n'
       << "bound.starts=" << c.bound_starts << '\n'
       << "cost.kind=" << c.cost_kind << '\n'
       << "cost.phi_e=" << c.phi_e << '\n'
       << "cost.phi_s=" << c.phi_s << '\n'
       << "cost.psi_coeff=" << c.psi_coeff << '\n'
       << "cost.psi_hi=" << c.psi_hi << '\n'
       << "cost.psi_kind=" << c.psi_kind << '\n'
       << "cost.psi_lo=" << c.psi_lo << '\n'
       << "cost.psi_offset=" << c.psi_offset << '\n'
       << "cost.psi_split=" << c.psi_split << '\n'
       << "cost.psi_table=" << c.psi_table << '\n'
       << "obs.b11=" << c.b11 << '\n'
       << "obs.b12=" << c.b12 << '\n'
       << "obs.b21=" << c.b21 << '\n'
       << "obs.b22=" << c.b22 << '\n'
       << "obs.power=" << c.obs_power << '\n'
       << "obs.source=" << c.obs_source << '\n'
       << "regions.resolution=" << c.regions_resolution << '\n'
       << "reward.alpha1=" << c.alpha1 << '\n'
       << "reward.alpha2=" << c.alpha2 << '\n'
       << "reward.beta1=" << c.beta1 << '\n'
       << "reward.beta2=" << c.beta2 << '\n'
       << "reward.delta1=" << c.delta1 << '\n'
       << "reward.delta2=" << c.delta2 << '\n'
       << "reward.gamma1=" << c.gamma1 << '\n'
       << "reward.gamma2=" << c.gamma2 << '\n'
       << "reward.preset=" << c.reward_preset << '\n'
       << "sim.epsilon=" << c.sim_epsilon << '\n'
       << "sim.horizon=" << c.sim_horizon << '\n'
       << "sim.models=";
    for (std::size_t i = 0; i < c.sim_models.size(); ++i)
        os << (i ? "," : "") << c.sim_models[i];
    os << '\n'
       << "sim.paths=" << c.sim_paths << '\n'
       << "sim.policy=" << c.sim_policy << '\n'
       << "sim.prior=" << c.sim_prior_p2 << '\n'
       << "sim.seed=" << c.seed << '\n'
       << "sim.theta=" << c.sim_theta << '\n'
       << "sim.threshold=" << c.sim_threshold << '\n'
       << "solver.grid=" << c.grid_points << '\n'
       << "solver.max_iters=" << c.max_iters << '\n'
       << "solver.rho=" << c.rho << '\n'
       << "solver.tol=" << c.tol << '\n';
    return os.str();
}

inline std::uint64_t fnv1a_hash(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::uint64_t config_hash(const ExperimentConfig& c) {
    return fnv1a_hash(serialize_config(c));
}

}  // namespace cif
