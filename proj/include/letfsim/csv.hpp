#pragma once

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "letfsim/ensemble.hpp"
#include "letfsim/metrics.hpp"
#include "letfsim/simulation.hpp"

namespace letfsim::csv {

// Fixed 6-decimal formatting keeps artifacts byte-stable across reruns.
inline std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

inline std::string opt_num(const std::optional<double>& v) { return v ? num(*v) : std::string{}; }

template <typename T>
std::string opt_int(const std::optional<T>& v) {
    return v ? std::to_string(*v) : std::string{};
}

inline std::string cell(const CellStats& stats, bool stddev_column) {
    if (stats.runs == 0) return "DISRUPTED";
    return num(stddev_column ? *stats.stddev : *stats.mean);
}

inline void write_samples(std::ostream& out, const std::vector<LiquiditySample>& samples,
                          std::uint64_t seed) {
    out << "# seed=" << seed << "\n";
    out << "time,market,best_bid,best_ask,tightness,sell_depth,buy_depth\n";
    for (const auto& s : samples) {
        out << s.time << ',' << to_string(s.market) << ',' << opt_int(s.best_bid) << ','
            << opt_int(s.best_ask) << ',' << opt_int(s.tightness) << ',' << opt_int(s.sell_depth)
            << ',' << opt_int(s.buy_depth) << '\n';
    }
}

inline void write_trades(std::ostream& out, const std::vector<Trade>& trades, std::uint64_t seed) {
    out << "# seed=" << seed << "\n";
    out << "time,market,price,quantity,buyer,seller\n";
    for (const auto& t : trades) {
        out << t.time << ',' << to_string(t.market) << ',' << t.price << ',' << t.quantity << ','
            << t.buyer << ',' << t.seller << '\n';
    }
}

inline void write_report(std::ostream& out, const RunReport& report) {
    out << "# seed=" << report.seed << "\n";
    out << "market,volume,sell_depth,buy_depth,tightness,best_bid,best_ask";
    for (const int offset : kTickOffsets) out << ",tick_" << offset;
    out << ",decline_amount,rebalance_sell_volume,disrupted,steps_completed\n";
    for (const Market m : {Market::letf, Market::futures}) {
        const MarketReport& r = report.market(m);
        out << to_string(m) << ',' << r.volume << ',' << opt_num(r.sell_depth.mean()) << ','
            << opt_num(r.buy_depth.mean()) << ',' << opt_num(r.tightness.mean()) << ','
            << opt_num(r.best_bid.mean()) << ',' << opt_num(r.best_ask.mean());
        for (const auto& tick : r.tick_profile) out << ',' << opt_num(tick.mean());
        out << ',' << num(r.decline_amount) << ',' << num(report.rebalance_sell_volume) << ','
            << (report.disrupted ? 1 : 0) << ',' << report.steps_completed << '\n';
    }
}

inline void write_table_header(std::ostream& out, std::uint64_t base_seed, int trials) {
    out << "# base_seed=" << base_seed << " trials=" << trials << " seeds=" << base_seed << ".."
        << base_seed + static_cast<std::uint64_t>(trials) - 1 << "\n";
    out << "metric,noarb_letf_mean,noarb_letf_std,noarb_futures_mean,noarb_futures_std,"
           "arb_letf_mean,arb_letf_std,arb_futures_mean,arb_futures_std\n";
}

inline void write_table_row(std::ostream& out, const std::string& label, const ArmReports& arms,
                            const std::function<std::optional<double>(const RunReport&, Market)>& extract) {
    out << label;
    for (const auto* reports : {&arms.arbitrage_off, &arms.arbitrage_on}) {
        for (const Market m : {Market::letf, Market::futures}) {
            const CellStats stats =
                cell_stats(*reports, [&](const RunReport& r) { return extract(r, m); });
            out << ',' << cell(stats, false) << ',' << cell(stats, true);
        }
    }
    out << '\n';
}

// Liquidity indicator table: metric rows by (arm, market) columns, plus run
// accounting rows.
inline void write_liquidity_table(std::ostream& out, const ArmReports& arms, std::uint64_t base_seed,
                                  int trials) {
    write_table_header(out, base_seed, trials);
    write_table_row(out, "Volume", arms, extract_volume);
    write_table_row(out, "SellDepth", arms, extract_sell_depth);
    write_table_row(out, "BuyDepth", arms, extract_buy_depth);
    write_table_row(out, "Tightness", arms, extract_tightness);
    const int off_disrupted = disrupted_count(arms.arbitrage_off);
    const int on_disrupted = disrupted_count(arms.arbitrage_on);
    out << "runs," << trials - off_disrupted << ',' << trials - off_disrupted << ','
        << trials - off_disrupted << ',' << trials - off_disrupted << ',' << trials - on_disrupted
        << ',' << trials - on_disrupted << ',' << trials - on_disrupted << ','
        << trials - on_disrupted << '\n';
    out << "disrupted," << off_disrupted << ',' << off_disrupted << ',' << off_disrupted << ','
        << off_disrupted << ',' << on_disrupted << ',' << on_disrupted << ',' << on_disrupted << ','
        << on_disrupted << '\n';
}

inline void write_best_price_table(std::ostream& out, const ArmReports& arms, std::uint64_t base_seed,
                                   int trials) {
    write_table_header(out, base_seed, trials);
    write_table_row(out, "bestsell", arms, extract_best_ask);
    write_table_row(out, "bestbuy", arms, extract_best_bid);
}

inline void write_tick_profile_table(std::ostream& out, const ArmReports& arms,
                                     std::uint64_t base_seed, int trials) {
    out << "# base_seed=" << base_seed << " trials=" << trials << "\n";
    out << "ticks_down,noarb_letf_mean,noarb_letf_std,noarb_futures_mean,noarb_futures_std,"
           "arb_letf_mean,arb_letf_std,arb_futures_mean,arb_futures_std\n";
    for (std::size_t i = 0; i < kTickOffsets.size(); ++i) {
        out << kTickOffsets[i];
        for (const auto* reports : {&arms.arbitrage_off, &arms.arbitrage_on}) {
            for (const Market m : {Market::letf, Market::futures}) {
                const CellStats stats = cell_stats(
                    *reports, [&](const RunReport& r) { return extract_tick_profile(r, m, i); });
                // The letf range stops at 50 ticks; those cells stay empty.
                if (stats.runs == 0 && m == Market::letf && kTickOffsets[i] > kLetfDepthSpan) {
                    out << ",,";
                    continue;
                }
                out << ',' << cell(stats, false) << ',' << cell(stats, true);
            }
        }
        out << '\n';
    }
}

inline void write_sweep(std::ostream& out, const std::vector<SweepCell>& cells,
                        std::uint64_t base_seed) {
    out << "# base_seed=" << base_seed << "\n";
    out << "s0,arbitrage,trials,disrupted,decline_amount,rebalance_sell_volume\n";
    for (const auto& c : cells) {
        out << num(c.s0) << ',' << (c.arbitrage ? "on" : "off") << ',' << c.trials << ','
            << c.disrupted << ',' << cell(c.decline, false) << ',' << cell(c.rebalance_sells, false)
            << '\n';
    }
}

}  // namespace letfsim::csv
