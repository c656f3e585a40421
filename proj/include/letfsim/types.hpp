#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

namespace letfsim {

using Time = std::int64_t;
using Money = std::int64_t;  // currency units; the book keeps prices on the tick grid
using OrderId = std::uint64_t;
using AgentId = std::int32_t;

// Normal agents use ids 0..2n-1 (futures first, then letf). The two
// special agents get fixed negative ids so trade logs stay readable.
inline constexpr AgentId kArbitrageAgent = -2;
inline constexpr AgentId kLetfAgent = -3;

enum class Side : std::uint8_t { buy, sell };
enum class OrderKind : std::uint8_t { limit, market };
enum class Market : std::uint8_t { futures, letf };

inline Side opposite(Side s) { return s == Side::buy ? Side::sell : Side::buy; }
inline Market other_market(Market m) { return m == Market::futures ? Market::letf : Market::futures; }

inline std::string_view to_string(Market m) { return m == Market::futures ? "futures" : "letf"; }
inline std::string_view to_string(Side s) { return s == Side::buy ? "buy" : "sell"; }

struct Order {
    OrderId id = 0;
    Side side = Side::buy;
    OrderKind kind = OrderKind::limit;
    Money price = 0;  // ignored for market orders
    int quantity = 0;
    AgentId owner = 0;
    Time placed_at = 0;
};

struct Trade {
    Money price = 0;
    int quantity = 0;
    AgentId buyer = 0;
    AgentId seller = 0;
    Time time = 0;
    Market market = Market::futures;
    OrderId maker_id = 0;  // resting order
    OrderId taker_id = 0;  // incoming order

    friend bool operator==(const Trade&, const Trade&) = default;
};

struct BookSnapshot {
    std::optional<Money> best_bid;
    std::optional<Money> best_ask;
    std::optional<double> mid;  // (best_bid + best_ask) / 2 when both present
};

}  // namespace letfsim
