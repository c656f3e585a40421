#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "letfsim/types.hpp"

namespace letfsim {

// Round a raw price onto the tick grid: buys round down, sells round up.
// Returns nullopt when no positive on-grid price exists (rejected order).
inline std::optional<Money> round_to_tick(double raw_price, Side side, Money tick_size) {
    if (!(raw_price > 0.0) || !std::isfinite(raw_price)) return std::nullopt;
    const double q = raw_price / static_cast<double>(tick_size);
    if (q >= 9.0e15) return std::nullopt;
    const double ticks = side == Side::buy ? std::floor(q) : std::ceil(q);
    if (ticks < 1.0) return std::nullopt;
    return static_cast<Money>(ticks) * tick_size;
}

// Price-time-priority continuous double auction for one market.
//
// Limit orders cross while the opposite best price satisfies them and rest
// otherwise; market orders cross until filled or the opposite side empties,
// with any remainder discarded. Executions always happen at the resting
// order's price. Resting orders expire once their age exceeds the lifetime.
class OrderBook {
public:
    OrderBook(Market market, Money tick_size, Time order_lifetime)
        : market_(market), tick_size_(tick_size), lifetime_(order_lifetime) {
        if (tick_size_ < 1) throw std::invalid_argument("tick size must be positive");
        if (lifetime_ < 0) throw std::invalid_argument("order lifetime must be nonnegative");
    }

    Market market() const { return market_; }
    Money tick_size() const { return tick_size_; }
    Time order_lifetime() const { return lifetime_; }

    std::optional<Money> round_price(double raw_price, Side side) const {
        return round_to_tick(raw_price, side, tick_size_);
    }

    // Matches the incoming order against the book; order.placed_at is the
    // submission time. Returns executions in order.
    std::vector<Trade> submit(const Order& order) {
        validate(order);
        std::vector<Trade> trades;
        int remaining = order.quantity;
        if (order.side == Side::buy) {
            remaining = cross(order, remaining, asks_, trades);
        } else {
            remaining = cross(order, remaining, bids_, trades);
        }
        if (remaining > 0 && order.kind == OrderKind::limit) {
            rest(order, remaining);
        }
        return trades;  // market-order remainder is discarded
    }

    // True iff the order was resting and has been removed.
    bool cancel(OrderId id) {
        auto it = index_.find(id);
        if (it == index_.end()) return false;
        remove_entry(id, it->second.side, it->second.price);
        index_.erase(it);
        return true;
    }

    // Removes every resting order with now - placed_at > lifetime.
    int expire(Time now) {
        int removed = 0;
        while (!age_fifo_.empty() && now - age_fifo_.front().second > lifetime_) {
            const OrderId id = age_fifo_.front().first;
            age_fifo_.pop_front();
            auto it = index_.find(id);
            if (it == index_.end()) continue;  // already filled or cancelled
            remove_entry(id, it->second.side, it->second.price);
            index_.erase(it);
            ++removed;
        }
        return removed;
    }

    std::optional<Money> best_bid() const {
        if (bids_.empty()) return std::nullopt;
        return bids_.begin()->first;
    }
    std::optional<Money> best_ask() const {
        if (asks_.empty()) return std::nullopt;
        return asks_.begin()->first;
    }

    BookSnapshot snapshot() const {
        BookSnapshot s{best_bid(), best_ask(), std::nullopt};
        if (s.best_bid && s.best_ask) {
            s.mid = (static_cast<double>(*s.best_bid) + static_cast<double>(*s.best_ask)) / 2.0;
        }
        return s;
    }

    // Total resting quantity with price in [anchor - span*tick, anchor] for
    // the buy side, [anchor, anchor + span*tick] for the sell side.
    long depth_in_range(Side side, Money anchor, int span_ticks) const {
        long total = 0;
        if (side == Side::buy) {
            const Money lo = anchor - static_cast<Money>(span_ticks) * tick_size_;
            for (auto it = bids_.lower_bound(anchor); it != bids_.end() && it->first >= lo; ++it) {
                total += it->second.total;
            }
        } else {
            const Money hi = anchor + static_cast<Money>(span_ticks) * tick_size_;
            for (auto it = asks_.lower_bound(anchor); it != asks_.end() && it->first <= hi; ++it) {
                total += it->second.total;
            }
        }
        return total;
    }

    long quantity_at(Side side, Money price) const {
        if (side == Side::buy) {
            auto it = bids_.find(price);
            return it == bids_.end() ? 0 : it->second.total;
        }
        auto it = asks_.find(price);
        return it == asks_.end() ? 0 : it->second.total;
    }

    long total_quantity(Side side) const {
        long total = 0;
        if (side == Side::buy) {
            for (const auto& [price, level] : bids_) total += level.total;
        } else {
            for (const auto& [price, level] : asks_) total += level.total;
        }
        return total;
    }

    bool contains(OrderId id) const { return index_.count(id) != 0; }
    std::size_t resting_orders() const { return index_.size(); }

private:
    struct Entry {
        OrderId id;
        int quantity;
        AgentId owner;
        Time placed_at;
    };
    struct Level {
        std::deque<Entry> queue;
        long total = 0;
    };
    struct Location {
        Side side;
        Money price;
    };

    void validate(const Order& order) const {
        if (order.quantity < 1) throw std::invalid_argument("order quantity must be >= 1");
        if (order.placed_at < 0) throw std::invalid_argument("order time must be nonnegative");
        if (order.kind == OrderKind::limit) {
            if (order.price <= 0 || order.price % tick_size_ != 0) {
                throw std::invalid_argument("limit price must be a positive tick multiple");
            }
        }
        if (index_.count(order.id) != 0) throw std::invalid_argument("duplicate order id");
    }

    template <typename Book>
    int cross(const Order& order, int remaining, Book& opposite, std::vector<Trade>& trades) {
        while (remaining > 0 && !opposite.empty()) {
            auto level_it = opposite.begin();
            const Money level_price = level_it->first;
            if (order.kind == OrderKind::limit) {
                if (order.side == Side::buy && level_price > order.price) break;
                if (order.side == Side::sell && level_price < order.price) break;
            }
            Level& level = level_it->second;
            Entry& entry = level.queue.front();
            const int fill = std::min(remaining, entry.quantity);

            Trade t;
            t.price = level_price;
            t.quantity = fill;
            t.buyer = order.side == Side::buy ? order.owner : entry.owner;
            t.seller = order.side == Side::buy ? entry.owner : order.owner;
            t.time = order.placed_at;
            t.market = market_;
            t.maker_id = entry.id;
            t.taker_id = order.id;
            trades.push_back(t);

            entry.quantity -= fill;
            level.total -= fill;
            remaining -= fill;
            if (entry.quantity == 0) {
                index_.erase(entry.id);
                level.queue.pop_front();
                if (level.queue.empty()) opposite.erase(level_it);
            }
        }
        return remaining;
    }

    void rest(const Order& order, int remaining) {
        Entry entry{order.id, remaining, order.owner, order.placed_at};
        if (order.side == Side::buy) {
            Level& level = bids_[order.price];
            level.queue.push_back(entry);
            level.total += remaining;
        } else {
            Level& level = asks_[order.price];
            level.queue.push_back(entry);
            level.total += remaining;
        }
        index_.emplace(order.id, Location{order.side, order.price});
        age_fifo_.emplace_back(order.id, order.placed_at);
    }

    void remove_entry(OrderId id, Side side, Money price) {
        if (side == Side::buy) {
            remove_from(bids_, id, price);
        } else {
            remove_from(asks_, id, price);
        }
    }

    template <typename Book>
    static void remove_from(Book& book, OrderId id, Money price) {
        auto level_it = book.find(price);
        if (level_it == book.end()) return;
        Level& level = level_it->second;
        for (auto it = level.queue.begin(); it != level.queue.end(); ++it) {
            if (it->id == id) {
                level.total -= it->quantity;
                level.queue.erase(it);
                break;
            }
        }
        if (level.queue.empty()) book.erase(level_it);
    }

    Market market_;
    Money tick_size_;
    Time lifetime_;
    std::map<Money, Level, std::greater<Money>> bids_;
    std::map<Money, Level> asks_;
    std::unordered_map<OrderId, Location> index_;
    std::deque<std::pair<OrderId, Time>> age_fifo_;  // insertion order == placed_at order
};

}  // namespace letfsim
