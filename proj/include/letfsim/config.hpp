#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "letfsim/types.hpp"

namespace letfsim {

enum class MisorderMarket : std::uint8_t { none, letf, futures };

inline std::string_view to_string(MisorderMarket m) {
    switch (m) {
        case MisorderMarket::letf: return "letf";
        case MisorderMarket::futures: return "futures";
        default: return "none";
    }
}

// Complete parameter set of one run. Field defaults are the baseline
// experiment configuration (see configs/default.cfg).
struct SimConfig {
    int normal_agents_per_market = 1000;   // n
    Time total_steps = 100000;             // t_e
    Time formation_steps = 20000;          // t_c: formation period and order lifetime
    Time misorder_start = 30000;           // t_ms
    Time misorder_end = 60000;             // t_me
    double misorder_prob = 0.2;            // p_m
    double letf_order_prob = 0.2;          // r_l
    double w1_max = 1.0;
    double w2_max = 10.0;
    double w3_max = 1.0;
    int tau_max = 10000;
    double sigma_noise = 0.03;             // sigma_eps
    double order_half_width = 1000.0;      // p_d, futures market; letf uses p_d / leverage
    Money tick_size = 1;                   // delta_p
    double fundamental_futures = 10000.0;  // p_ff
    double leverage = 2.0;
    double initial_position = 10000.0;     // s0
    Time rebalance_interval = 10;          // t_r
    double rebalance_threshold = 0.01;     // w_r
    std::uint64_t seed = 1;
    bool arbitrage_enabled = true;
    bool rebalance_enabled = true;
    MisorderMarket misorder_market = MisorderMarket::none;

    double fundamental(Market m) const {
        return m == Market::futures ? fundamental_futures : fundamental_futures / leverage;
    }
    double half_width(Market m) const {
        return m == Market::futures ? order_half_width : order_half_width / leverage;
    }
    // Conversion constant of the two-market price relation: P_fF (1 - 1/L).
    double parity_offset() const { return fundamental_futures * (1.0 - 1.0 / leverage); }

    bool in_formation(Time t) const { return t <= formation_steps; }
    bool in_misorder_window(Time t) const { return t >= misorder_start && t <= misorder_end; }

    // Field-level validation messages; empty means the config is usable.
    // The misorder window may extend past t_e (it then just truncates).
    std::vector<std::string> validate() const {
        std::vector<std::string> errors;
        auto require = [&](bool ok, const char* msg) {
            if (!ok) errors.emplace_back(msg);
        };
        require(normal_agents_per_market >= 1, "n: must be >= 1");
        require(total_steps >= 1, "t_e: must be >= 1");
        require(formation_steps >= 0, "t_c: must be >= 0");
        require(misorder_start >= 0, "t_ms: must be >= 0");
        require(misorder_start < misorder_end, "t_ms/t_me: window must satisfy t_ms < t_me");
        require(formation_steps < misorder_start, "t_c/t_ms: window must start after formation");
        require(misorder_prob >= 0.0 && misorder_prob <= 1.0, "p_m: must be in [0, 1]");
        require(letf_order_prob >= 0.0 && letf_order_prob <= 1.0, "r_l: must be in [0, 1]");
        require(w1_max >= 0.0 && w2_max >= 0.0 && w3_max >= 0.0, "w_max: weights must be nonnegative");
        require(w1_max + w2_max + w3_max > 0.0, "w_max: at least one weight bound must be positive");
        require(tau_max >= 1, "tau_max: must be >= 1");
        require(sigma_noise >= 0.0, "sigma_eps: must be nonnegative");
        require(order_half_width > 0.0, "p_d: must be positive");
        require(tick_size >= 1, "delta_p: must be >= 1");
        require(fundamental_futures > 0.0, "p_ff: must be positive");
        require(leverage > 1.0, "leverage: must be > 1");
        require(initial_position >= 0.0, "s0: must be nonnegative");
        require(rebalance_interval >= 1, "t_r: must be >= 1");
        require(rebalance_threshold > 0.0 && rebalance_threshold < 1.0, "w_r: must be in (0, 1)");
        return errors;
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return {};
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

inline std::optional<bool> parse_flag(std::string v) {
    std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
    if (v == "on" || v == "true" || v == "1" || v == "yes") return true;
    if (v == "off" || v == "false" || v == "0" || v == "no") return false;
    return std::nullopt;
}

template <typename T>
bool parse_number(const std::string& v, T& out) {
    std::istringstream iss(v);
    T value{};
    if (!(iss >> value)) return false;
    std::string rest;
    if (iss >> rest) return false;
    out = value;
    return true;
}

}  // namespace detail

inline std::optional<MisorderMarket> parse_misorder(std::string v) {
    std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
    if (v == "none") return MisorderMarket::none;
    if (v == "letf") return MisorderMarket::letf;
    if (v == "futures") return MisorderMarket::futures;
    return std::nullopt;
}

// Applies one "key = value" assignment; returns an error message on failure.
inline std::optional<std::string> apply_setting(SimConfig& cfg, const std::string& key,
                                                const std::string& value) {
    auto bad = [&](const char* what) {
        return std::optional<std::string>(key + ": " + what + " (got \"" + value + "\")");
    };
    if (key == "n") {
        if (!detail::parse_number(value, cfg.normal_agents_per_market)) return bad("expected integer");
    } else if (key == "t_e") {
        if (!detail::parse_number(value, cfg.total_steps)) return bad("expected integer");
    } else if (key == "t_c") {
        if (!detail::parse_number(value, cfg.formation_steps)) return bad("expected integer");
    } else if (key == "t_ms") {
        if (!detail::parse_number(value, cfg.misorder_start)) return bad("expected integer");
    } else if (key == "t_me") {
        if (!detail::parse_number(value, cfg.misorder_end)) return bad("expected integer");
    } else if (key == "p_m") {
        if (!detail::parse_number(value, cfg.misorder_prob)) return bad("expected number");
    } else if (key == "r_l") {
        if (!detail::parse_number(value, cfg.letf_order_prob)) return bad("expected number");
    } else if (key == "w1_max") {
        if (!detail::parse_number(value, cfg.w1_max)) return bad("expected number");
    } else if (key == "w2_max") {
        if (!detail::parse_number(value, cfg.w2_max)) return bad("expected number");
    } else if (key == "w3_max") {
        if (!detail::parse_number(value, cfg.w3_max)) return bad("expected number");
    } else if (key == "tau_max") {
        if (!detail::parse_number(value, cfg.tau_max)) return bad("expected integer");
    } else if (key == "sigma_eps") {
        if (!detail::parse_number(value, cfg.sigma_noise)) return bad("expected number");
    } else if (key == "p_d") {
        if (!detail::parse_number(value, cfg.order_half_width)) return bad("expected number");
    } else if (key == "delta_p") {
        if (!detail::parse_number(value, cfg.tick_size)) return bad("expected integer");
    } else if (key == "p_ff") {
        if (!detail::parse_number(value, cfg.fundamental_futures)) return bad("expected number");
    } else if (key == "leverage") {
        if (!detail::parse_number(value, cfg.leverage)) return bad("expected number");
    } else if (key == "s0") {
        if (!detail::parse_number(value, cfg.initial_position)) return bad("expected number");
    } else if (key == "t_r") {
        if (!detail::parse_number(value, cfg.rebalance_interval)) return bad("expected integer");
    } else if (key == "w_r") {
        if (!detail::parse_number(value, cfg.rebalance_threshold)) return bad("expected number");
    } else if (key == "seed") {
        if (!detail::parse_number(value, cfg.seed)) return bad("expected integer");
    } else if (key == "arbitrage") {
        auto f = detail::parse_flag(value);
        if (!f) return bad("expected on/off");
        cfg.arbitrage_enabled = *f;
    } else if (key == "rebalance") {
        auto f = detail::parse_flag(value);
        if (!f) return bad("expected on/off");
        cfg.rebalance_enabled = *f;
    } else if (key == "misorder") {
        auto m = parse_misorder(value);
        if (!m) return bad("expected none/letf/futures");
        cfg.misorder_market = *m;
    } else {
        return std::optional<std::string>("unknown key \"" + key + "\"");
    }
    return std::nullopt;
}

struct ConfigResult {
    SimConfig config;
    std::vector<std::string> errors;
    bool ok() const { return errors.empty(); }
};

// Loads a flat key=value config file ('#' comments, blank lines ignored),
// then applies "key=value" overrides in order. Validation errors are
// collected rather than thrown so the CLI can report all of them.
inline ConfigResult load_sim_config(const std::optional<std::string>& path,
                                    const std::vector<std::string>& overrides) {
    ConfigResult result;
    if (path) {
        std::ifstream in(*path);
        if (!in) {
            result.errors.push_back("cannot open config file: " + *path);
            return result;
        }
        std::string line;
        int line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            line = detail::trim(line);
            if (line.empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos) {
                result.errors.push_back(*path + ":" + std::to_string(line_no) + ": expected key = value");
                continue;
            }
            const std::string key = detail::trim(line.substr(0, eq));
            const std::string value = detail::trim(line.substr(eq + 1));
            if (auto err = apply_setting(result.config, key, value)) {
                result.errors.push_back(*path + ":" + std::to_string(line_no) + ": " + *err);
            }
        }
    }
    for (const auto& item : overrides) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) {
            result.errors.push_back("--set " + item + ": expected KEY=VALUE");
            continue;
        }
        const std::string key = detail::trim(item.substr(0, eq));
        const std::string value = detail::trim(item.substr(eq + 1));
        if (auto err = apply_setting(result.config, key, value)) {
            result.errors.push_back("--set " + *err);
        }
    }
    if (result.errors.empty()) {
        for (auto& err : result.config.validate()) result.errors.push_back(std::move(err));
    }
    return result;
}

}  // namespace letfsim
