#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "letfsim/commands.hpp"

namespace {

struct RawOptions {
    letfsim::CommandOptions opt;
    std::optional<std::string> arbitrage;
    std::optional<std::string> rebalance;
};

void add_common_options(CLI::App* cmd, RawOptions& raw) {
    cmd->add_option("--config", raw.opt.config_path, "flat key=value config file");
    cmd->add_option("--set", raw.opt.overrides, "override a config key, KEY=VALUE (repeatable)");
    cmd->add_option("--seed", raw.opt.seed, "master RNG seed (base seed for ensembles)");
    cmd->add_option("--misorder", raw.opt.misorder, "erroneous-order market: none|letf|futures");
    cmd->add_option("--arbitrage", raw.arbitrage, "arbitrage agent: on|off");
    cmd->add_option("--rebalance", raw.rebalance, "rebalancing trades: on|off");
    cmd->add_option("--out", raw.opt.out_dir, "output directory")->capture_default_str();
}

// on/off flags become config overrides once parsing succeeded.
bool finalize(RawOptions& raw) {
    const auto apply = [](const std::optional<std::string>& value, std::optional<bool>& target,
                          const char* flag) {
        if (!value) return true;
        if (*value == "on" || *value == "off") {
            target = (*value == "on");
            return true;
        }
        std::cerr << "config error: " << flag << " expects on|off\n";
        return false;
    };
    return apply(raw.arbitrage, raw.opt.arbitrage, "--arbitrage") &&
           apply(raw.rebalance, raw.opt.rebalance, "--rebalance");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-market leveraged-ETF / futures market simulator"};
    app.require_subcommand(1);

    RawOptions run_raw;
    auto* run = app.add_subcommand("run", "execute one run and write per-step artifacts");
    add_common_options(run, run_raw);

    RawOptions table_raw;
    auto* table = app.add_subcommand("table", "paired-seed ensemble over both arbitrage arms");
    add_common_options(table, table_raw);
    table->add_option("--trials", table_raw.opt.trials, "trials per arm")->capture_default_str();

    RawOptions sweep_raw;
    auto* sweep = app.add_subcommand("sweep", "initial-position sweep over both arbitrage arms");
    add_common_options(sweep, sweep_raw);
    sweep->add_option("--trials", sweep_raw.opt.trials, "trials per cell")->capture_default_str();
    sweep->add_option("--s0-list", sweep_raw.opt.s0_list, "comma-separated S_0 values")
        ->delimiter(',');

    RawOptions validate_raw;
    auto* validate = app.add_subcommand("validate", "check a configuration without running");
    add_common_options(validate, validate_raw);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : letfsim::kExitConfigError;
    }

    if (run->parsed()) {
        if (!finalize(run_raw)) return letfsim::kExitConfigError;
        return letfsim::cmd_run(run_raw.opt);
    }
    if (table->parsed()) {
        if (!finalize(table_raw)) return letfsim::kExitConfigError;
        return letfsim::cmd_table(table_raw.opt);
    }
    if (sweep->parsed()) {
        if (!finalize(sweep_raw)) return letfsim::kExitConfigError;
        return letfsim::cmd_sweep(sweep_raw.opt);
    }
    if (validate->parsed()) {
        if (!finalize(validate_raw)) return letfsim::kExitConfigError;
        return letfsim::cmd_validate(validate_raw.opt);
    }
    return letfsim::kExitConfigError;
}
