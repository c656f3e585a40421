#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "letfsim/csv.hpp"
#include "letfsim/ensemble.hpp"
#include "letfsim/simulation.hpp"

namespace letfsim {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 1;
inline constexpr int kExitIoError = 2;
inline constexpr int kExitDisrupted = 3;

struct CommandOptions {
    std::optional<std::string> config_path;
    std::vector<std::string> overrides;  // repeatable --set KEY=VALUE
    std::optional<std::uint64_t> seed;
    std::optional<std::string> misorder;
    std::optional<bool> arbitrage;
    std::optional<bool> rebalance;
    std::string out_dir = "out";
    int trials = 30;
    std::vector<double> s0_list;  // sweep grid; defaults applied by cmd_sweep
};

namespace detail {

// File/--set values first, dedicated flags last.
inline ConfigResult resolve_config(const CommandOptions& opt, std::ostream& err) {
    ConfigResult result = load_sim_config(opt.config_path, opt.overrides);
    if (result.ok()) {
        if (opt.seed) result.config.seed = *opt.seed;
        if (opt.arbitrage) result.config.arbitrage_enabled = *opt.arbitrage;
        if (opt.rebalance) result.config.rebalance_enabled = *opt.rebalance;
        if (opt.misorder) {
            const auto m = parse_misorder(*opt.misorder);
            if (!m) {
                result.errors.push_back("--misorder: expected none/letf/futures");
            } else {
                result.config.misorder_market = *m;
            }
        }
        if (result.errors.empty()) {
            for (auto& e : result.config.validate()) result.errors.push_back(std::move(e));
        }
    }
    for (const auto& e : result.errors) err << "config error: " << e << "\n";
    return result;
}

inline bool write_file(const std::filesystem::path& path,
                       const std::function<void(std::ostream&)>& writer, std::ostream& err) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        err << "cannot open " << path.string() << " for writing\n";
        return false;
    }
    writer(out);
    out.flush();
    if (!out) {
        err << "write failed: " << path.string() << "\n";
        return false;
    }
    return true;
}

inline bool prepare_out_dir(const std::string& dir, std::ostream& err) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        err << "cannot create output directory " << dir << ": " << ec.message() << "\n";
        return false;
    }
    return true;
}

}  // namespace detail

// Executes one run and writes samples.csv, report.csv and trades.csv.
inline int cmd_run(const CommandOptions& opt, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
    const ConfigResult cfg = detail::resolve_config(opt, err);
    if (!cfg.ok()) return kExitConfigError;
    if (!detail::prepare_out_dir(opt.out_dir, err)) return kExitIoError;

    const RunResult result = run_simulation(cfg.config, {.keep_samples = true});

    const std::filesystem::path dir(opt.out_dir);
    if (!detail::write_file(dir / "samples.csv",
                            [&](std::ostream& o) { csv::write_samples(o, result.samples, cfg.config.seed); },
                            err)) {
        return kExitIoError;
    }
    if (!detail::write_file(dir / "report.csv",
                            [&](std::ostream& o) { csv::write_report(o, result.report); }, err)) {
        return kExitIoError;
    }
    if (!detail::write_file(dir / "trades.csv",
                            [&](std::ostream& o) { csv::write_trades(o, result.log.trades, cfg.config.seed); },
                            err)) {
        return kExitIoError;
    }

    out << "run seed=" << cfg.config.seed << " misorder=" << to_string(cfg.config.misorder_market)
        << " arbitrage=" << (cfg.config.arbitrage_enabled ? "on" : "off")
        << " rebalance=" << (cfg.config.rebalance_enabled ? "on" : "off") << "\n";
    out << "steps=" << result.steps_completed << (result.disrupted ? " DISRUPTED" : "") << "\n";
    for (const Market m : {Market::letf, Market::futures}) {
        const auto& r = result.report.market(m);
        out << to_string(m) << ": volume=" << r.volume << " decline=" << csv::num(r.decline_amount)
            << "\n";
    }
    out << "rebalance_sell_volume=" << csv::num(result.report.rebalance_sell_volume) << "\n";
    return result.disrupted ? kExitDisrupted : kExitOk;
}

// Paired-seed ensemble over both arbitrage arms; writes the liquidity,
// best-price and tick-profile tables.
inline int cmd_table(const CommandOptions& opt, std::ostream& out = std::cout,
                     std::ostream& err = std::cerr) {
    const ConfigResult cfg = detail::resolve_config(opt, err);
    if (!cfg.ok()) return kExitConfigError;
    if (opt.trials < 1) {
        err << "config error: --trials must be >= 1\n";
        return kExitConfigError;
    }
    if (!detail::prepare_out_dir(opt.out_dir, err)) return kExitIoError;

    const unsigned workers = worker_count_from_env();
    const ArmReports arms = run_paired_arms(cfg.config, opt.trials, workers);

    const std::filesystem::path dir(opt.out_dir);
    const std::uint64_t base_seed = cfg.config.seed;
    if (!detail::write_file(dir / "table_liquidity.csv",
                            [&](std::ostream& o) {
                                csv::write_liquidity_table(o, arms, base_seed, opt.trials);
                            },
                            err)) {
        return kExitIoError;
    }
    if (!detail::write_file(dir / "table_best_prices.csv",
                            [&](std::ostream& o) {
                                csv::write_best_price_table(o, arms, base_seed, opt.trials);
                            },
                            err)) {
        return kExitIoError;
    }
    if (!detail::write_file(dir / "table_tick_profile.csv",
                            [&](std::ostream& o) {
                                csv::write_tick_profile_table(o, arms, base_seed, opt.trials);
                            },
                            err)) {
        return kExitIoError;
    }

    out << "table misorder=" << to_string(cfg.config.misorder_market) << " trials=" << opt.trials
        << " seeds=" << base_seed << ".." << base_seed + static_cast<std::uint64_t>(opt.trials) - 1
        << "\n";
    out << "disrupted: noarb=" << disrupted_count(arms.arbitrage_off)
        << " arb=" << disrupted_count(arms.arbitrage_on) << "\n";
    return kExitOk;
}

// S_0 sweep over both arbitrage arms; writes sweep.csv.
inline int cmd_sweep(const CommandOptions& opt, std::ostream& out = std::cout,
                     std::ostream& err = std::cerr) {
    const ConfigResult cfg = detail::resolve_config(opt, err);
    if (!cfg.ok()) return kExitConfigError;
    if (opt.trials < 1) {
        err << "config error: --trials must be >= 1\n";
        return kExitConfigError;
    }
    std::vector<double> s0_list = opt.s0_list;
    if (s0_list.empty()) s0_list = {0, 2000, 5000, 10000, 20000, 50000};
    for (const double s0 : s0_list) {
        if (s0 < 0) {
            err << "config error: --s0-list values must be nonnegative\n";
            return kExitConfigError;
        }
    }
    if (!detail::prepare_out_dir(opt.out_dir, err)) return kExitIoError;

    const unsigned workers = worker_count_from_env();
    const std::vector<SweepCell> cells = run_sweep(cfg.config, s0_list, opt.trials, workers);

    const std::filesystem::path dir(opt.out_dir);
    if (!detail::write_file(dir / "sweep.csv",
                            [&](std::ostream& o) { csv::write_sweep(o, cells, cfg.config.seed); },
                            err)) {
        return kExitIoError;
    }

    out << "sweep misorder=" << to_string(cfg.config.misorder_market) << " trials=" << opt.trials
        << " cells=" << cells.size() << "\n";
    for (const auto& c : cells) {
        out << "s0=" << csv::num(c.s0) << " arb=" << (c.arbitrage ? "on" : "off")
            << " disrupted=" << c.disrupted << "/" << c.trials << "\n";
    }
    return kExitOk;
}

// Parses and validates the effective configuration without running.
inline int cmd_validate(const CommandOptions& opt, std::ostream& out = std::cout,
                        std::ostream& err = std::cerr) {
    const ConfigResult cfg = detail::resolve_config(opt, err);
    if (!cfg.ok()) return kExitConfigError;
    const SimConfig& c = cfg.config;
    out << "ok\n";
    out << "n=" << c.normal_agents_per_market << " t_e=" << c.total_steps
        << " t_c=" << c.formation_steps << " t_ms=" << c.misorder_start
        << " t_me=" << c.misorder_end << "\n";
    out << "p_m=" << csv::num(c.misorder_prob) << " r_l=" << csv::num(c.letf_order_prob)
        << " sigma_eps=" << csv::num(c.sigma_noise) << " p_d=" << csv::num(c.order_half_width)
        << "\n";
    out << "w1_max=" << csv::num(c.w1_max) << " w2_max=" << csv::num(c.w2_max)
        << " w3_max=" << csv::num(c.w3_max) << " tau_max=" << c.tau_max << "\n";
    out << "delta_p=" << c.tick_size << " p_ff=" << csv::num(c.fundamental_futures)
        << " leverage=" << csv::num(c.leverage) << " s0=" << csv::num(c.initial_position)
        << " t_r=" << c.rebalance_interval << " w_r=" << csv::num(c.rebalance_threshold) << "\n";
    out << "seed=" << c.seed << " arbitrage=" << (c.arbitrage_enabled ? "on" : "off")
        << " rebalance=" << (c.rebalance_enabled ? "on" : "off")
        << " misorder=" << to_string(c.misorder_market) << "\n";
    return kExitOk;
}

}  // namespace letfsim
