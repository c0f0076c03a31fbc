#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "vns/errors.hpp"
#include "vns/kinetic.hpp"

namespace vns {

/// Run configuration. Parsed from the plain-text `key = value` format with
/// `#` comments and [fluid] [kinetic] [sweep] [output] sections; every field
/// is validated before any state is allocated and unknown keys are errors.
struct RunConfig {
    // [fluid]
    int dim = 2;
    int n = 64;
    double dt = 1e-3;
    double t_final = 1.0;
    std::string u0 = "taylor_green";       // taylor_green | bandlimited | constant | zero
    double u0_amplitude = 1.0;
    double u0_mean_x = 0.0;
    double u0_mean_y = 0.0;
    double u0_mean_z = 0.0;
    int u0_kmax = 2;                       // band limit for the bandlimited preset
    std::optional<double> cstar;           // user-supplied C* threshold, if any

    // [kinetic]
    std::string regime = "light";          // light | light_fast | fine
    double alpha = 0.25;
    double epsilon = 0.1;
    std::size_t particles = 200000;
    std::string init = "monokinetic";      // monokinetic | maxwellian
    std::string rho0 = "uniform";          // uniform | cosine
    double rho0_amplitude = 0.0;
    double theta = 0.0;
    std::uint64_t seed = 1;
    double force_smoothing = 0.0;
    std::vector<double> higher_r = {2.0};

    // [sweep]
    std::vector<double> epsilons;
    std::string reference = "none";        // tns | ins | none
    double ref_dt = 0.0;                   // 0: use dt
    int w1_grid = 16;
    int w1_samples = 20;

    // [output]
    std::string directory = "out";
    int cadence = 0;                       // steps between samples; 0: max(1, T/200/dt)
    bool snapshots = true;
    bool plot_script = true;

    ScalingRegime scaling(double eps) const {
        if (regime == "light") return ScalingRegime::light(eps);
        if (regime == "light_fast") return ScalingRegime::light_fast(eps, alpha);
        if (regime == "fine") return ScalingRegime::fine(eps);
        throw ConfigError("unknown regime '" + regime + "'");
    }

    int effective_cadence() const {
        if (cadence > 0) return cadence;
        const double target = t_final / 200.0;
        return std::max(1, static_cast<int>(std::llround(target / dt)));
    }

    void validate() const {
        if (dim != 2 && dim != 3) throw ConfigError("dim must be 2 or 3");
        if (n < 8 || n % 2 != 0) throw ConfigError("n must be even and >= 8");
        if (!(dt > 0.0)) throw ConfigError("dt must be > 0");
        if (!(t_final >= 0.0)) throw ConfigError("t_final must be >= 0");
        if (u0 != "taylor_green" && u0 != "bandlimited" && u0 != "constant" &&
            u0 != "zero")
            throw ConfigError("unknown u0 preset '" + u0 + "'");
        if (u0_kmax < 1) throw ConfigError("u0_kmax must be >= 1");
        if (regime != "light" && regime != "light_fast" && regime != "fine")
            throw ConfigError("unknown regime '" + regime + "'");
        if (alpha < 0.0 || alpha > 0.5) throw ConfigError("alpha must be in [0, 1/2]");
        if (!(epsilon > 0.0) || epsilon > 1.0)
            throw ConfigError("epsilon must be in (0, 1]");
        if (particles < 1) throw ConfigError("particles must be >= 1");
        if (init != "monokinetic" && init != "maxwellian")
            throw ConfigError("unknown init preset '" + init + "'");
        if (rho0 != "uniform" && rho0 != "cosine")
            throw ConfigError("unknown rho0 preset '" + rho0 + "'");
        if (rho0_amplitude < 0.0 || rho0_amplitude > 1.0)
            throw ConfigError("rho0_amplitude must be in [0, 1]");
        if (theta < 0.0) throw ConfigError("theta must be >= 0");
        for (double r : higher_r)
            if (r < 2.0) throw ConfigError("higher_r entries must be >= 2");
        for (double e : epsilons)
            if (!(e > 0.0) || e > 1.0)
                throw ConfigError("sweep epsilons must be in (0, 1]");
        for (std::size_t i = 1; i < epsilons.size(); ++i)
            if (epsilons[i] >= epsilons[i - 1])
                throw ConfigError("sweep epsilons must be strictly decreasing");
        if (reference != "tns" && reference != "ins" && reference != "none")
            throw ConfigError("unknown reference '" + reference + "'");
        if (ref_dt < 0.0) throw ConfigError("ref_dt must be >= 0");
        if (w1_grid < 4 || w1_grid > 32 || n % w1_grid != 0)
            throw ConfigError("w1_grid must divide n and lie in [4, 32]");
        if (w1_samples < 2) throw ConfigError("w1_samples must be >= 2");
        if (cadence < 0) throw ConfigError("cadence must be >= 0");
        if (cstar && !(*cstar > 0.0)) throw ConfigError("cstar must be > 0");
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return x;
    } catch (...) {
        throw ConfigError("invalid number for '" + key + "': " + v);
    }
}

inline long long parse_int(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const long long x = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return x;
    } catch (...) {
        throw ConfigError("invalid integer for '" + key + "': " + v);
    }
}

inline bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("invalid boolean for '" + key + "': " + v);
}

inline std::vector<double> parse_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(parse_double(key, item));
    }
    if (out.empty()) throw ConfigError("empty list for '" + key + "'");
    return out;
}

} // namespace detail

inline RunConfig parse_config_text(const std::string& text) {
    RunConfig cfg;
    std::string section;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("line " + std::to_string(lineno) + ": bad section");
            section = detail::trim(line.substr(1, line.size() - 2));
            if (section != "fluid" && section != "kinetic" && section != "sweep" &&
                section != "output")
                throw ConfigError("unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string val = detail::trim(line.substr(eq + 1));
        if (key.empty() || val.empty())
            throw ConfigError("line " + std::to_string(lineno) + ": empty key or value");

        auto unknown = [&]() -> ConfigError {
            return ConfigError("unknown key '" + key + "' in section [" + section + "]");
        };
        if (section == "fluid") {
            if (key == "dim") cfg.dim = static_cast<int>(detail::parse_int(key, val));
            else if (key == "n") cfg.n = static_cast<int>(detail::parse_int(key, val));
            else if (key == "dt") cfg.dt = detail::parse_double(key, val);
            else if (key == "t_final") cfg.t_final = detail::parse_double(key, val);
            else if (key == "u0") cfg.u0 = val;
            else if (key == "u0_amplitude") cfg.u0_amplitude = detail::parse_double(key, val);
            else if (key == "u0_mean_x") cfg.u0_mean_x = detail::parse_double(key, val);
            else if (key == "u0_mean_y") cfg.u0_mean_y = detail::parse_double(key, val);
            else if (key == "u0_mean_z") cfg.u0_mean_z = detail::parse_double(key, val);
            else if (key == "u0_kmax") cfg.u0_kmax = static_cast<int>(detail::parse_int(key, val));
            else if (key == "cstar") cfg.cstar = detail::parse_double(key, val);
            else throw unknown();
        } else if (section == "kinetic") {
            if (key == "regime") cfg.regime = val;
            else if (key == "alpha") cfg.alpha = detail::parse_double(key, val);
            else if (key == "epsilon") cfg.epsilon = detail::parse_double(key, val);
            else if (key == "particles")
                cfg.particles = static_cast<std::size_t>(detail::parse_int(key, val));
            else if (key == "init") cfg.init = val;
            else if (key == "rho0") cfg.rho0 = val;
            else if (key == "rho0_amplitude") cfg.rho0_amplitude = detail::parse_double(key, val);
            else if (key == "theta") cfg.theta = detail::parse_double(key, val);
            else if (key == "seed")
                cfg.seed = static_cast<std::uint64_t>(detail::parse_int(key, val));
            else if (key == "force_smoothing")
                cfg.force_smoothing = detail::parse_double(key, val);
            else if (key == "higher_r") cfg.higher_r = detail::parse_list(key, val);
            else throw unknown();
        } else if (section == "sweep") {
            if (key == "epsilons") cfg.epsilons = detail::parse_list(key, val);
            else if (key == "reference") cfg.reference = val;
            else if (key == "ref_dt") cfg.ref_dt = detail::parse_double(key, val);
            else if (key == "w1_grid") cfg.w1_grid = static_cast<int>(detail::parse_int(key, val));
            else if (key == "w1_samples")
                cfg.w1_samples = static_cast<int>(detail::parse_int(key, val));
            else throw unknown();
        } else if (section == "output") {
            if (key == "directory") cfg.directory = val;
            else if (key == "cadence") cfg.cadence = static_cast<int>(detail::parse_int(key, val));
            else if (key == "snapshots") cfg.snapshots = detail::parse_bool(key, val);
            else if (key == "plot_script") cfg.plot_script = detail::parse_bool(key, val);
            else throw unknown();
        } else {
            throw ConfigError("key '" + key + "' outside any section");
        }
    }
    cfg.validate();
    return cfg;
}

inline RunConfig parse_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file: " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_config_text(ss.str());
}

} // namespace vns
