#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include "liqsim/errors.hpp"
#include "liqsim/impact.hpp"
#include "liqsim/pdmp.hpp"
#include "liqsim/random.hpp"

namespace liqsim {

struct SolverConfig {
    int grid_points = 32;
    int stages = 20;
    long long mc_paths = -1; // defaulted to 200 * grid_points when unset
    long long eval_paths = 10000;
    long long training_paths = 4000;
};

/// One scenario of a batch: market constants, liquidation problem, intensity
/// dynamics, solver sizes, and the RNG seed.
struct ScenarioConfig {
    std::string label = "default";
    MarketParams market;
    LiquidationConfig liquidation;
    ImpactedIntensityState intensity0{2.0, 0.6, 0.1, {ImpactFamily::exponential, 0.02}};
    SolverConfig solver;
    RngSeed seed;
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return "";
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

[[noreturn]] inline void config_fail(const std::string& what, int line) {
    throw config_error(what + " (line " + std::to_string(line) + ")");
}

inline double parse_double(const std::string& key, const std::string& value, int line) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size() || !std::isfinite(v)) {
            config_fail("invalid numeric value for '" + key + "': " + value, line);
        }
        return v;
    } catch (const config_error&) {
        throw;
    } catch (...) {
        config_fail("invalid numeric value for '" + key + "': " + value, line);
    }
}

inline long long parse_int(const std::string& key, const std::string& value, int line) {
    try {
        std::size_t used = 0;
        const long long v = std::stoll(value, &used);
        if (used != value.size()) {
            config_fail("invalid integer value for '" + key + "': " + value, line);
        }
        return v;
    } catch (const config_error&) {
        throw;
    } catch (...) {
        config_fail("invalid integer value for '" + key + "': " + value, line);
    }
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& value, int line) {
    try {
        std::size_t used = 0;
        const std::uint64_t v = std::stoull(value, &used);
        if (used != value.size()) {
            config_fail("invalid unsigned value for '" + key + "': " + value, line);
        }
        return v;
    } catch (const config_error&) {
        throw;
    } catch (...) {
        config_fail("invalid unsigned value for '" + key + "': " + value, line);
    }
}

inline std::vector<double> parse_double_list(const std::string& key, const std::string& value,
                                             int line) {
    std::vector<double> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) {
            config_fail("empty entry in list for '" + key + "'", line);
        }
        out.push_back(parse_double(key, item, line));
    }
    if (out.empty()) {
        config_fail("empty list for '" + key + "'", line);
    }
    return out;
}

struct ScenarioDraft {
    ScenarioConfig config;
    double mark_halfwidth = 0.05;
    int first_line = 0;
    bool mc_paths_set = false;
};

inline void apply_key(ScenarioDraft& draft, const std::string& key, const std::string& value,
                      int line) {
    ScenarioConfig& sc = draft.config;
    if (key == "s0") {
        sc.market.s0 = parse_double(key, value, line);
        if (!(sc.market.s0 > 0.0)) config_fail("s0 must be > 0", line);
    } else if (key == "mu") {
        sc.market.mu = parse_double(key, value, line);
    } else if (key == "vol") {
        sc.market.vol = parse_double(key, value, line);
        if (!(sc.market.vol >= 0.0)) config_fail("vol must be >= 0", line);
    } else if (key == "r") {
        sc.market.r = parse_double(key, value, line);
        if (!(sc.market.r >= 0.0)) config_fail("r must be >= 0", line);
    } else if (key == "mark_halfwidth") {
        draft.mark_halfwidth = parse_double(key, value, line);
        if (!(draft.mark_halfwidth >= 0.0 && draft.mark_halfwidth < 1.0)) {
            config_fail("mark_halfwidth must lie in [0, 1)", line);
        }
    } else if (key == "q0") {
        sc.liquidation.q0 = parse_double(key, value, line);
        if (!(sc.liquidation.q0 > 0.0)) config_fail("q0 must be > 0", line);
    } else if (key == "slice") {
        sc.liquidation.slice = parse_double(key, value, line);
        if (!(sc.liquidation.slice > 0.0)) config_fail("slice must be > 0", line);
    } else if (key == "horizon") {
        sc.liquidation.horizon = parse_double(key, value, line);
        if (!(sc.liquidation.horizon > 0.0)) config_fail("horizon must be > 0", line);
    } else if (key == "haircut") {
        sc.liquidation.terminal_haircut = parse_double(key, value, line);
        if (!(sc.liquidation.terminal_haircut >= 0.0 && sc.liquidation.terminal_haircut <= 1.0)) {
            config_fail("haircut must lie in [0, 1]", line);
        }
    } else if (key == "actions") {
        sc.liquidation.action_grid = parse_double_list(key, value, line);
    } else if (key == "lambda0") {
        sc.intensity0.level = parse_double(key, value, line);
        if (!(sc.intensity0.level >= 0.0)) config_fail("lambda0 must be >= 0", line);
    } else if (key == "sigma") {
        sc.intensity0.excitation = parse_double(key, value, line);
    } else if (key == "kappa") {
        sc.intensity0.decay = parse_double(key, value, line);
        if (!(sc.intensity0.decay > 0.0)) config_fail("kappa must be > 0", line);
    } else if (key == "impact") {
        if (value == "power") {
            sc.intensity0.impact.family = ImpactFamily::power;
        } else if (value == "exponential") {
            sc.intensity0.impact.family = ImpactFamily::exponential;
        } else {
            config_fail("impact must be 'power' or 'exponential', got '" + value + "'", line);
        }
    } else if (key == "alpha") {
        sc.intensity0.impact.alpha = parse_double(key, value, line);
        if (!(sc.intensity0.impact.alpha > 0.0)) config_fail("alpha must be > 0", line);
    } else if (key == "grid_points") {
        const long long v = parse_int(key, value, line);
        if (v < 1) config_fail("grid_points must be >= 1", line);
        sc.solver.grid_points = static_cast<int>(v);
    } else if (key == "stages") {
        const long long v = parse_int(key, value, line);
        if (v < 1) config_fail("stages must be >= 1", line);
        sc.solver.stages = static_cast<int>(v);
    } else if (key == "mc_paths") {
        sc.solver.mc_paths = parse_int(key, value, line);
        if (sc.solver.mc_paths < 1) config_fail("mc_paths must be >= 1", line);
        draft.mc_paths_set = true;
    } else if (key == "eval_paths") {
        sc.solver.eval_paths = parse_int(key, value, line);
        if (sc.solver.eval_paths < 1) config_fail("eval_paths must be >= 1", line);
    } else if (key == "training_paths") {
        sc.solver.training_paths = parse_int(key, value, line);
        if (sc.solver.training_paths < 1) config_fail("training_paths must be >= 1", line);
    } else if (key == "seed") {
        sc.seed.seed = parse_u64(key, value, line);
    } else if (key == "stream") {
        sc.seed.stream = parse_u64(key, value, line);
    } else {
        config_fail("unknown key '" + key + "'", line);
    }
}

inline ScenarioConfig finalize_scenario(ScenarioDraft draft) {
    ScenarioConfig& sc = draft.config;
    if (!draft.mc_paths_set || sc.solver.mc_paths < 0) {
        sc.solver.mc_paths = 200LL * sc.solver.grid_points;
    }
    if (draft.mark_halfwidth > 0.0) {
        sc.market.mark_dist =
            PriceDistribution::uniform(-draft.mark_halfwidth, draft.mark_halfwidth);
    } else {
        // Degenerate "no mark" case: a vanishing symmetric interval.
        sc.market.mark_dist = PriceDistribution::uniform(-1e-300, 1e-300);
    }
    try {
        validate_market(sc.market);
        validate_liquidation(sc.liquidation);
        validate_intensity_state(sc.intensity0);
    } catch (const std::invalid_argument& e) {
        throw config_error(std::string(e.what()) + " (scenario '" + sc.label +
                           "' starting at line " + std::to_string(draft.first_line) + ")");
    }
    if (sc.solver.mc_paths < 100LL * sc.solver.grid_points) {
        throw config_error("mc_paths must be at least 100 * grid_points (scenario '" + sc.label +
                           "' starting at line " + std::to_string(draft.first_line) + ")");
    }
    return std::move(draft.config);
}

} // namespace detail

/// Parses the sectioned key=value scenario format. Every key is optional and
/// documented defaults apply; unknown keys and invalid values are rejected
/// with the offending key and line number.
inline std::vector<ScenarioConfig> parse_config(std::istream& in) {
    std::vector<ScenarioConfig> configs;
    std::vector<std::string> labels;
    detail::ScenarioDraft draft;
    bool in_section = false;
    std::string line;
    int line_no = 0;

    const auto flush = [&]() {
        if (!in_section) {
            return;
        }
        for (const std::string& label : labels) {
            if (label == draft.config.label) {
                detail::config_fail("duplicate scenario label '" + label + "'", draft.first_line);
            }
        }
        labels.push_back(draft.config.label);
        configs.push_back(detail::finalize_scenario(std::move(draft)));
    };

    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line = line.substr(0, hash);
        }
        line = detail::trim(line);
        if (line.empty()) {
            continue;
        }
        if (line.front() == '[') {
            if (line.back() != ']') {
                detail::config_fail("unterminated section header", line_no);
            }
            const std::string label = detail::trim(line.substr(1, line.size() - 2));
            if (label.empty()) {
                detail::config_fail("empty scenario label", line_no);
            }
            if (label.find('/') != std::string::npos || label.find('\\') != std::string::npos) {
                detail::config_fail("scenario label must not contain path separators", line_no);
            }
            flush();
            draft = detail::ScenarioDraft{};
            draft.config.label = label;
            draft.first_line = line_no;
            in_section = true;
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            detail::config_fail("expected 'key = value' or '[label]', got '" + line + "'", line_no);
        }
        if (!in_section) {
            detail::config_fail("key outside of a [scenario] section", line_no);
        }
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) {
            detail::config_fail("expected 'key = value', got '" + line + "'", line_no);
        }
        detail::apply_key(draft, key, value, line_no);
    }
    flush();
    if (configs.empty()) {
        throw config_error("configuration contains no [scenario] section");
    }
    return configs;
}

inline std::vector<ScenarioConfig> parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open config file: " + path);
    }
    return parse_config(in);
}

} // namespace liqsim
