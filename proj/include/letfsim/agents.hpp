#pragma once

#include <array>
#include <cmath>
#include <cstdlib>
#include <deque>
#include <optional>

#include "letfsim/order_book.hpp"
#include "letfsim/rng.hpp"
#include "letfsim/types.hpp"

namespace letfsim {

// ---------------------------------------------------------------------------
// Normal agents
// ---------------------------------------------------------------------------

struct NormalAgentState {
    double w1 = 0;  // fundamental weight
    double w2 = 0;  // technical weight
    double w3 = 0;  // noise weight
    int tau = 1;    // technical lag
    Market market = Market::futures;
};

inline NormalAgentState init_normal_agent(rng::Engine& engine, double w1_max, double w2_max,
                                          double w3_max, int tau_max, Market market) {
    NormalAgentState a;
    do {
        a.w1 = rng::canonical(engine) * w1_max;
        a.w2 = rng::canonical(engine) * w2_max;
        a.w3 = rng::canonical(engine) * w3_max;
    } while (a.w1 + a.w2 + a.w3 <= 0.0);
    a.tau = static_cast<int>(rng::uniform_int(engine, 1, tau_max));
    a.market = market;
    return a;
}

// Expected rate of price change: weighted mix of the fundamental return
// ln(P_f / P^{t-1}), the technical return ln(P^{t-1} / P^{t-1-tau}), and a
// noise draw, normalized by the weight sum.
inline double normal_expected_return(const NormalAgentState& agent, double fundamental,
                                     double mid_prev, double mid_lagged, double noise_draw) {
    const double r_fundamental = std::log(fundamental / mid_prev);
    const double r_technical = std::log(mid_prev / mid_lagged);
    return (agent.w1 * r_fundamental + agent.w2 * r_technical + agent.w3 * noise_draw) /
           (agent.w1 + agent.w2 + agent.w3);
}

struct OrderSpec {
    Side side;
    Money price;
};

// Order price is uniform over [predicted - half_width, predicted + half_width];
// prices below the anchor become buys (ties included), above it sells.
// Returns nullopt when the rounded price falls off the positive tick grid.
inline std::optional<OrderSpec> price_band_order(double predicted, double side_anchor,
                                                 double half_width, double uniform_draw,
                                                 Money tick_size) {
    const double order_price = predicted - half_width + 2.0 * half_width * uniform_draw;
    const Side side = order_price > side_anchor ? Side::sell : Side::buy;
    const auto price = round_to_tick(order_price, side, tick_size);
    if (!price) return std::nullopt;
    return OrderSpec{side, *price};
}

inline std::optional<OrderSpec> normal_order(double mid_prev, double expected_return,
                                             double half_width, double uniform_draw,
                                             Money tick_size) {
    const double predicted = mid_prev * std::exp(expected_return);
    return price_band_order(predicted, predicted, half_width, uniform_draw, tick_size);
}

// Formation-period variant: the band is centered on P_f * exp(r_e) but the
// buy/sell decision compares the order price against P_f itself.
inline std::optional<OrderSpec> formation_order(double fundamental, double expected_return,
                                                double half_width, double uniform_draw,
                                                Money tick_size) {
    const double predicted = fundamental * std::exp(expected_return);
    return price_band_order(predicted, fundamental, half_width, uniform_draw, tick_size);
}

// ---------------------------------------------------------------------------
// Arbitrage agent
// ---------------------------------------------------------------------------

// Leveraged-ETF price equivalent of a futures price: f(x) = x - P_fF (1 - 1/L).
// Degenerate (nonpositive) results halt arbitrage for the activation.
inline std::optional<double> letf_equiv(double futures_price, double parity_offset) {
    const double v = futures_price - parity_offset;
    if (v <= 0.0) return std::nullopt;
    return v;
}

inline double futures_equiv(double letf_price, double parity_offset) {
    return letf_price + parity_offset;
}

class ArbitrageAgent {
public:
    enum class Slot : int { letf_buy = 0, letf_sell = 1, futures_buy = 2, futures_sell = 3 };
    static constexpr int kSlotCount = 4;

    struct RestingSlot {
        std::optional<OrderId> id;
        Money price = 0;
    };

    struct InstantPair {
        Market buy_market;
        Market sell_market;
    };

    // One instant-settlement check. The cheap-letf condition S_L < f(B_F) buys
    // letf / sells futures; the mirrored condition f(S_F) <= B_L buys futures /
    // sells letf. A missing quote (or degenerate conversion) disables the
    // condition. The two conditions are mutually exclusive on uncrossed books.
    static std::optional<InstantPair> instant_trigger(const BookSnapshot& futures,
                                                      const BookSnapshot& letf,
                                                      double parity_offset) {
        if (letf.best_ask && futures.best_bid) {
            const auto equiv = letf_equiv(static_cast<double>(*futures.best_bid), parity_offset);
            if (equiv && static_cast<double>(*letf.best_ask) < *equiv) {
                return InstantPair{Market::letf, Market::futures};
            }
        }
        if (futures.best_ask && letf.best_bid) {
            const auto equiv = letf_equiv(static_cast<double>(*futures.best_ask), parity_offset);
            if (equiv && *equiv <= static_cast<double>(*letf.best_bid)) {
                return InstantPair{Market::futures, Market::letf};
            }
        }
        return std::nullopt;
    }

    static Market slot_market(Slot s) {
        return (s == Slot::letf_buy || s == Slot::letf_sell) ? Market::letf : Market::futures;
    }
    static Side slot_side(Slot s) {
        return (s == Slot::letf_buy || s == Slot::futures_buy) ? Side::buy : Side::sell;
    }

    // Trigger price of a resting slot, tick-rounded for its side; nullopt when
    // the source quote is missing or the conversion degenerates.
    static std::optional<Money> resting_target(Slot slot, const BookSnapshot& futures,
                                               const BookSnapshot& letf, double parity_offset,
                                               Money tick_size) {
        std::optional<double> raw;
        switch (slot) {
            case Slot::letf_buy:
                if (futures.best_bid) raw = letf_equiv(static_cast<double>(*futures.best_bid), parity_offset);
                break;
            case Slot::letf_sell:
                if (futures.best_ask) raw = letf_equiv(static_cast<double>(*futures.best_ask), parity_offset);
                break;
            case Slot::futures_buy:
                if (letf.best_bid) raw = futures_equiv(static_cast<double>(*letf.best_bid), parity_offset);
                break;
            case Slot::futures_sell:
                if (letf.best_ask) raw = futures_equiv(static_cast<double>(*letf.best_ask), parity_offset);
                break;
        }
        if (!raw) return std::nullopt;
        return round_to_tick(*raw, slot_side(slot), tick_size);
    }

    // Hedge for a filled resting order: equal quantity, opposite market,
    // opposite side, sent as a market order.
    static std::pair<Market, Side> hedge_for(Market filled_market, Side filled_side) {
        return {other_market(filled_market), opposite(filled_side)};
    }

    std::array<RestingSlot, kSlotCount>& slots() { return slots_; }
    const std::array<RestingSlot, kSlotCount>& slots() const { return slots_; }

    // Matches a maker id against the live slots; on a hit the slot is cleared
    // and the hedge is queued.
    bool note_fill_if_own(OrderId maker_id, int quantity) {
        for (int i = 0; i < kSlotCount; ++i) {
            auto& slot = slots_[static_cast<std::size_t>(i)];
            if (slot.id && *slot.id == maker_id) {
                const Slot s = static_cast<Slot>(i);
                pending_hedges_.push_back({hedge_for(slot_market(s), slot_side(s)), quantity});
                slot.id.reset();
                return true;
            }
        }
        return false;
    }

    struct PendingHedge {
        std::pair<Market, Side> order;
        int quantity;
    };
    std::deque<PendingHedge>& pending_hedges() { return pending_hedges_; }

    void add_position(Market m, long delta) {
        (m == Market::futures ? position_futures_ : position_letf_) += delta;
    }
    long position(Market m) const {
        return m == Market::futures ? position_futures_ : position_letf_;
    }

private:
    std::array<RestingSlot, kSlotCount> slots_{};
    std::deque<PendingHedge> pending_hedges_;
    long position_futures_ = 0;  // informational
    long position_letf_ = 0;
};

struct RestingPassResult {
    int cancelled = 0;
    int placed = 0;
};

// Resting-order maintenance. Prunes slots whose orders disappeared, cancels
// quotes whose trigger price moved, then places a quantity-1 limit order for
// every condition whose trigger sits strictly inside the spread of its
// market. Placements rest by construction, so no trades can result.
inline RestingPassResult arbitrage_resting_pass(ArbitrageAgent& agent, OrderBook& futures_book,
                                                OrderBook& letf_book, double parity_offset,
                                                Time now, OrderId& next_order_id) {
    using Slot = ArbitrageAgent::Slot;
    RestingPassResult result;
    const Money tick = futures_book.tick_size();
    auto book_of = [&](Slot s) -> OrderBook& {
        return ArbitrageAgent::slot_market(s) == Market::futures ? futures_book : letf_book;
    };

    for (int i = 0; i < ArbitrageAgent::kSlotCount; ++i) {
        auto& slot = agent.slots()[static_cast<std::size_t>(i)];
        if (slot.id && !book_of(static_cast<Slot>(i)).contains(*slot.id)) slot.id.reset();
    }

    // Stale quotes: trigger price recomputed against one consistent view.
    {
        const auto snap_futures = futures_book.snapshot();
        const auto snap_letf = letf_book.snapshot();
        for (int i = 0; i < ArbitrageAgent::kSlotCount; ++i) {
            auto& slot = agent.slots()[static_cast<std::size_t>(i)];
            if (!slot.id) continue;
            const auto target = ArbitrageAgent::resting_target(static_cast<Slot>(i), snap_futures,
                                                               snap_letf, parity_offset, tick);
            if (!target || *target != slot.price) {
                book_of(static_cast<Slot>(i)).cancel(*slot.id);
                ++result.cancelled;
                slot.id.reset();
            }
        }
    }

    for (int i = 0; i < ArbitrageAgent::kSlotCount; ++i) {
        auto& slot = agent.slots()[static_cast<std::size_t>(i)];
        if (slot.id) continue;
        const Slot s = static_cast<Slot>(i);
        const auto snap_futures = futures_book.snapshot();
        const auto snap_letf = letf_book.snapshot();
        const auto target =
            ArbitrageAgent::resting_target(s, snap_futures, snap_letf, parity_offset, tick);
        if (!target) continue;
        const BookSnapshot& own =
            ArbitrageAgent::slot_market(s) == Market::futures ? snap_futures : snap_letf;
        if (!own.best_bid || !own.best_ask) continue;
        if (!(*own.best_bid < *target && *target < *own.best_ask)) continue;
        const Order order{next_order_id++, ArbitrageAgent::slot_side(s), OrderKind::limit, *target,
                          1, kArbitrageAgent, now};
        book_of(s).submit(order);
        slot.id = order.id;
        slot.price = *target;
        ++result.placed;
    }
    return result;
}

// ---------------------------------------------------------------------------
// Leveraged-ETF agent
// ---------------------------------------------------------------------------

// Futures contracts the fund should hold to keep its leverage:
// S_0 [ (P_F / P_fF)(L - 1) - (L - 2) ]. Affine in P_F with slope
// S_0 (L - 1) / P_fF.
inline double letf_target_position(double initial_position, double leverage,
                                   double fundamental_futures, double futures_price) {
    return initial_position *
           ((futures_price / fundamental_futures) * (leverage - 1.0) - (leverage - 2.0));
}

struct LetfAgentState {
    long long initial_position = 0;  // S_0, contracts
    long long held = 0;
    long long sell_volume = 0;  // executed rebalance sell quantity
    long long buy_volume = 0;
};

inline LetfAgentState init_letf_agent(double s0) {
    LetfAgentState a;
    a.initial_position = std::llround(s0);
    a.held = a.initial_position;
    return a;
}

// Positions are whole contracts; fractional targets round half away from zero.
inline long long rounded_target(double target) { return std::llround(target); }

// Deviation test against the target; a zero rounded target deviates whenever
// any position is still held.
inline bool rebalance_deviates(long long held, long long target, double threshold) {
    if (held == target) return false;
    if (target == 0) return true;
    return static_cast<double>(std::llabs(held - target)) / static_cast<double>(target) > threshold;
}

}  // namespace letfsim
