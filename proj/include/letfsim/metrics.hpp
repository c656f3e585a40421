#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "letfsim/order_book.hpp"
#include "letfsim/types.hpp"

namespace letfsim {

// Depth measurement ranges, in ticks from the best bid.
inline constexpr int kFuturesDepthSpan = 100;
inline constexpr int kLetfDepthSpan = 50;

inline int depth_span(Market m) {
    return m == Market::futures ? kFuturesDepthSpan : kLetfDepthSpan;
}

// Offsets below the best bid at which the buy-book quantity is profiled.
inline constexpr std::array<int, 8> kTickOffsets{0, 1, 10, 20, 30, 40, 50, 100};

// Per-step liquidity snapshot of one market. Fields that need a missing
// quote stay absent rather than zero-filled.
struct LiquiditySample {
    Time time = 0;
    Market market = Market::futures;
    std::optional<Money> best_bid;
    std::optional<Money> best_ask;
    std::optional<Money> tightness;  // best_ask - best_bid
    std::optional<long> sell_depth;  // ask quantity in [best_bid, best_bid + span]
    std::optional<long> buy_depth;   // bid quantity in [best_bid - span, best_bid]
    std::array<std::optional<long>, kTickOffsets.size()> tick_profile{};
};

// Both depth windows are anchored at the best bid: the buy depth spans
// downward and the sell depth upward, so a falling bid drags both
// measurement ranges with it.
inline LiquiditySample take_sample(const OrderBook& book, Time t) {
    LiquiditySample s;
    s.time = t;
    s.market = book.market();
    s.best_bid = book.best_bid();
    s.best_ask = book.best_ask();
    if (s.best_bid && s.best_ask) s.tightness = *s.best_ask - *s.best_bid;
    const int span = depth_span(book.market());
    if (s.best_bid) {
        s.buy_depth = book.depth_in_range(Side::buy, *s.best_bid, span);
        if (s.best_ask) s.sell_depth = book.depth_in_range(Side::sell, *s.best_bid, span);
        for (std::size_t i = 0; i < kTickOffsets.size(); ++i) {
            if (kTickOffsets[i] > span) continue;  // letf tables stop at 50 ticks
            const Money price = *s.best_bid - static_cast<Money>(kTickOffsets[i]) * book.tick_size();
            if (price <= 0) continue;
            s.tick_profile[i] = book.quantity_at(Side::buy, price);
        }
    }
    return s;
}

// Running mean that skips absent values.
struct FieldMean {
    double sum = 0.0;
    long count = 0;
    void add(double v) {
        sum += v;
        ++count;
    }
    template <typename T>
    void add_opt(const std::optional<T>& v) {
        if (v) add(static_cast<double>(*v));
    }
    std::optional<double> mean() const {
        if (count == 0) return std::nullopt;
        return sum / static_cast<double>(count);
    }
};

// Windowed liquidity aggregate for one market.
struct MarketReport {
    long volume = 0;  // executed trades inside the window
    FieldMean sell_depth;
    FieldMean buy_depth;
    FieldMean tightness;
    FieldMean best_bid;
    FieldMean best_ask;
    std::array<FieldMean, kTickOffsets.size()> tick_profile{};
    double decline_amount = 0.0;  // fundamental - minimum recorded price, full run
};

struct RunReport {
    MarketReport futures;
    MarketReport letf;
    double rebalance_sell_volume = 0.0;
    bool disrupted = false;
    Time steps_completed = 0;
    std::uint64_t seed = 0;

    const MarketReport& market(Market m) const { return m == Market::futures ? futures : letf; }
    MarketReport& market(Market m) { return m == Market::futures ? futures : letf; }
};

// Accumulates in-window samples into a MarketReport (volume and decline are
// accumulated separately by the caller).
struct WindowAccumulator {
    Time window_start = 0;
    Time window_end = 0;

    void add(const LiquiditySample& s, MarketReport& report) const {
        if (s.time < window_start || s.time > window_end) return;
        report.sell_depth.add_opt(s.sell_depth);
        report.buy_depth.add_opt(s.buy_depth);
        report.tightness.add_opt(s.tightness);
        report.best_bid.add_opt(s.best_bid);
        report.best_ask.add_opt(s.best_ask);
        for (std::size_t i = 0; i < kTickOffsets.size(); ++i) {
            report.tick_profile[i].add_opt(s.tick_profile[i]);
        }
    }
};

// Pure aggregation over a sample series; the simulator uses the same
// accumulator incrementally.
inline MarketReport aggregate(std::span<const LiquiditySample> samples, Time window_start,
                              Time window_end) {
    MarketReport report;
    const WindowAccumulator acc{window_start, window_end};
    for (const auto& s : samples) acc.add(s, report);
    return report;
}

// Executed-trade count for one market inside [window_start, window_end].
inline long volume(std::span<const Trade> trades, Time window_start, Time window_end, Market m) {
    long count = 0;
    for (const auto& t : trades) {
        if (t.market == m && t.time >= window_start && t.time <= window_end) ++count;
    }
    return count;
}

// Mean / population standard deviation over the runs where a value exists.
struct CellStats {
    std::optional<double> mean;
    std::optional<double> stddev;
    int runs = 0;       // non-disrupted runs contributing
    int disrupted = 0;  // disrupted runs in the cell
};

inline CellStats summarize(const std::vector<std::optional<double>>& values, int disrupted) {
    CellStats stats;
    stats.disrupted = disrupted;
    double sum = 0.0;
    for (const auto& v : values) {
        if (!v) continue;
        sum += *v;
        ++stats.runs;
    }
    if (stats.runs == 0) return stats;
    const double mean = sum / stats.runs;
    double sq = 0.0;
    for (const auto& v : values) {
        if (!v) continue;
        sq += (*v - mean) * (*v - mean);
    }
    stats.mean = mean;
    stats.stddev = std::sqrt(sq / stats.runs);
    return stats;
}

}  // namespace letfsim
