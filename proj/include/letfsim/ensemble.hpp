#pragma once

#include <atomic>
#include <cstdlib>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "letfsim/config.hpp"
#include "letfsim/metrics.hpp"
#include "letfsim/simulation.hpp"

namespace letfsim {

inline unsigned worker_count_from_env(const char* env_name = "LETFSIM_WORKERS") {
    if (const char* value = std::getenv(env_name)) {
        const long parsed = std::atol(value);
        if (parsed >= 1) return static_cast<unsigned>(parsed);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

// Runs `trials` independent simulations with seeds base.seed + 0..trials-1 on
// a bounded worker pool. Results are indexed by trial, so output order never
// depends on scheduling.
inline std::vector<RunReport> run_trials(const SimConfig& base, int trials, unsigned workers) {
    std::vector<RunReport> reports(static_cast<std::size_t>(trials));
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int i = next.fetch_add(1); i < trials; i = next.fetch_add(1)) {
            SimConfig cfg = base;
            cfg.seed = base.seed + static_cast<std::uint64_t>(i);
            reports[static_cast<std::size_t>(i)] = Simulation(cfg).run().report;
        }
    };
    const unsigned pool = std::min<unsigned>(std::max(1u, workers), static_cast<unsigned>(trials));
    if (pool <= 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        threads.reserve(pool);
        for (unsigned i = 0; i < pool; ++i) threads.emplace_back(worker);
        for (auto& t : threads) t.join();
    }
    return reports;
}

// Paired-seed design: both arbitrage arms reuse the identical seed list.
struct ArmReports {
    std::vector<RunReport> arbitrage_off;
    std::vector<RunReport> arbitrage_on;
};

inline ArmReports run_paired_arms(const SimConfig& base, int trials, unsigned workers) {
    ArmReports arms;
    SimConfig off = base;
    off.arbitrage_enabled = false;
    arms.arbitrage_off = run_trials(off, trials, workers);
    SimConfig on = base;
    on.arbitrage_enabled = true;
    arms.arbitrage_on = run_trials(on, trials, workers);
    return arms;
}

// Ensemble statistic of one extracted value over the non-disrupted runs of a
// cell; disrupted runs are counted but excluded from the moments.
inline CellStats cell_stats(const std::vector<RunReport>& reports,
                            const std::function<std::optional<double>(const RunReport&)>& extract) {
    std::vector<std::optional<double>> values;
    values.reserve(reports.size());
    int disrupted = 0;
    for (const auto& r : reports) {
        if (r.disrupted) {
            ++disrupted;
            continue;
        }
        values.push_back(extract(r));
    }
    return summarize(values, disrupted);
}

inline int disrupted_count(const std::vector<RunReport>& reports) {
    int n = 0;
    for (const auto& r : reports) n += r.disrupted ? 1 : 0;
    return n;
}

// Extractors for the liquidity table rows.
inline std::optional<double> extract_volume(const RunReport& r, Market m) {
    return static_cast<double>(r.market(m).volume);
}
inline std::optional<double> extract_sell_depth(const RunReport& r, Market m) {
    return r.market(m).sell_depth.mean();
}
inline std::optional<double> extract_buy_depth(const RunReport& r, Market m) {
    return r.market(m).buy_depth.mean();
}
inline std::optional<double> extract_tightness(const RunReport& r, Market m) {
    return r.market(m).tightness.mean();
}
inline std::optional<double> extract_best_ask(const RunReport& r, Market m) {
    return r.market(m).best_ask.mean();
}
inline std::optional<double> extract_best_bid(const RunReport& r, Market m) {
    return r.market(m).best_bid.mean();
}
inline std::optional<double> extract_tick_profile(const RunReport& r, Market m, std::size_t offset_index) {
    return r.market(m).tick_profile[offset_index].mean();
}
inline std::optional<double> extract_decline(const RunReport& r, Market m) {
    return r.market(m).decline_amount;
}
inline std::optional<double> extract_rebalance_sells(const RunReport& r) {
    return r.rebalance_sell_volume;
}

// One sweep cell: mean decline of the crashed market and mean rebalance sell
// quantity for a given (S_0, arbitrage) arm.
struct SweepCell {
    double s0 = 0.0;
    bool arbitrage = false;
    int trials = 0;
    int disrupted = 0;
    CellStats decline;
    CellStats rebalance_sells;
};

inline std::vector<SweepCell> run_sweep(const SimConfig& base, const std::vector<double>& s0_list,
                                        int trials, unsigned workers) {
    const Market crashed =
        base.misorder_market == MisorderMarket::futures ? Market::futures : Market::letf;
    std::vector<SweepCell> cells;
    for (const double s0 : s0_list) {
        SimConfig cfg = base;
        cfg.initial_position = s0;
        const ArmReports arms = run_paired_arms(cfg, trials, workers);
        for (const bool arb : {false, true}) {
            const auto& reports = arb ? arms.arbitrage_on : arms.arbitrage_off;
            SweepCell cell;
            cell.s0 = s0;
            cell.arbitrage = arb;
            cell.trials = trials;
            cell.disrupted = disrupted_count(reports);
            cell.decline = cell_stats(reports, [crashed](const RunReport& r) {
                return extract_decline(r, crashed);
            });
            cell.rebalance_sells = cell_stats(reports, [](const RunReport& r) {
                return extract_rebalance_sells(r);
            });
            cells.push_back(cell);
        }
    }
    return cells;
}

}  // namespace letfsim
