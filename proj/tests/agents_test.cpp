#include <gtest/gtest.h>

#include <cmath>
#include <optional>

#include "letfsim/agents.hpp"
#include "letfsim/order_book.hpp"
#include "letfsim/rng.hpp"

using namespace letfsim;

namespace {

NormalAgentState agent_with(double w1, double w2, double w3, int tau = 1,
                            Market m = Market::futures) {
    return NormalAgentState{w1, w2, w3, tau, m};
}

BookSnapshot snap(std::optional<Money> bid, std::optional<Money> ask) {
    BookSnapshot s{bid, ask, std::nullopt};
    if (bid && ask) s.mid = (static_cast<double>(*bid) + static_cast<double>(*ask)) / 2.0;
    return s;
}

Order limit(OrderId id, Side side, Money price, int qty, Time t, AgentId owner = 0) {
    return Order{id, side, OrderKind::limit, price, qty, owner, t};
}

}  // namespace

// =============================================================================
// Expected return
// =============================================================================

TEST(NormalExpectedReturn, FundamentalTermVanishesAtFundamentalPrice) {
    const auto a = agent_with(1, 0, 0);
    EXPECT_DOUBLE_EQ(normal_expected_return(a, 10000, 10000, 9500, 0.5), 0.0);
}

TEST(NormalExpectedReturn, TechnicalTermVanishesWithoutPastReturn) {
    const auto a = agent_with(0, 1, 0);
    EXPECT_DOUBLE_EQ(normal_expected_return(a, 10000, 9000, 9000, 0.5), 0.0);
}

TEST(NormalExpectedReturn, MixedWeightsValue) {
    // Scalar oracle: (ln(10000/9000) + 0 + 0.03) / 3.
    const double expected = (std::log(10000.0 / 9000.0) + 0.03) / 3.0;
    EXPECT_NEAR(expected, 0.04512017188594210, 1e-15);
    const auto a = agent_with(1, 1, 1);
    EXPECT_NEAR(normal_expected_return(a, 10000, 9000, 9000, 0.03), expected, 1e-12);
}

TEST(NormalExpectedReturn, WeightHomogeneity) {
    auto engine = rng::make_engine(11, 1);
    for (int i = 0; i < 1000; ++i) {
        const double w1 = rng::canonical(engine);
        const double w2 = rng::canonical(engine) * 10.0;
        const double w3 = rng::canonical(engine);
        if (w1 + w2 + w3 <= 0.0) continue;
        const double mid_prev = 5000.0 + rng::canonical(engine) * 10000.0;
        const double mid_lagged = 5000.0 + rng::canonical(engine) * 10000.0;
        const double noise = rng::gauss(engine) * 0.03;
        const double scale = 0.01 + rng::canonical(engine) * 99.99;
        const double base = normal_expected_return(agent_with(w1, w2, w3), 10000, mid_prev,
                                                   mid_lagged, noise);
        const double scaled = normal_expected_return(
            agent_with(w1 * scale, w2 * scale, w3 * scale), 10000, mid_prev, mid_lagged, noise);
        ASSERT_NEAR(base, scaled, 1e-12);
    }
}

TEST(NormalExpectedReturn, SignMatchesFundamentalGap) {
    auto engine = rng::make_engine(12, 1);
    for (int i = 0; i < 1000; ++i) {
        const double w1 = 0.01 + rng::canonical(engine);
        const double mid_prev = 5000.0 + rng::canonical(engine) * 10000.0;
        const double r = normal_expected_return(agent_with(w1, 0, 0), 10000, mid_prev, 1234.0, 9.9);
        if (mid_prev < 10000.0) {
            ASSERT_GT(r, 0.0);
        } else if (mid_prev > 10000.0) {
            ASSERT_LT(r, 0.0);
        }
    }
}

// =============================================================================
// Order construction
// =============================================================================

TEST(NormalOrder, LowestDrawBuysAtBandBottom) {
    const auto spec = normal_order(5000.0, 0.0, 1000.0, 0.0, 1);
    ASSERT_TRUE(spec.has_value());
    EXPECT_EQ(spec->side, Side::buy);
    EXPECT_EQ(spec->price, 4000);
}

TEST(NormalOrder, HighestDrawSellsAtBandTop) {
    const auto spec = normal_order(5000.0, 0.0, 1000.0, 1.0, 1);
    ASSERT_TRUE(spec.has_value());
    EXPECT_EQ(spec->side, Side::sell);
    EXPECT_EQ(spec->price, 6000);
}

TEST(NormalOrder, TieAtPredictedPriceIsABuy) {
    // P_e = 10000 e^{0.01} = 10100.501..., draw 0.5 puts P_o exactly at P_e.
    const auto spec = normal_order(10000.0, 0.01, 1000.0, 0.5, 1);
    ASSERT_TRUE(spec.has_value());
    EXPECT_EQ(spec->side, Side::buy);
    EXPECT_EQ(spec->price, 10100);
}

TEST(NormalOrder, RejectsNonPositivePrice) {
    EXPECT_FALSE(normal_order(100.0, 0.0, 1000.0, 0.0, 1).has_value());
}

TEST(FormationOrder, SideAnchoredAtFundamental) {
    // P_o below P_f buys, above sells, regardless of the predicted price.
    const auto buy = formation_order(10000.0, -0.5, 1000.0, 0.6, 1);
    ASSERT_TRUE(buy.has_value());
    EXPECT_EQ(buy->side, Side::buy);
    EXPECT_LT(buy->price, 10000);

    const auto sell = formation_order(5000.0, 0.3, 1000.0, 0.5, 1);
    ASSERT_TRUE(sell.has_value());
    EXPECT_EQ(sell->side, Side::sell);
    EXPECT_GT(sell->price, 5000);
}

TEST(FormationOrder, TieAtFundamentalIsABuy) {
    const auto spec = formation_order(10000.0, 0.0, 1000.0, 0.5, 1);
    ASSERT_TRUE(spec.has_value());
    EXPECT_EQ(spec->side, Side::buy);
    EXPECT_EQ(spec->price, 10000);
}

// =============================================================================
// Price conversion between the two markets
// =============================================================================

TEST(LetfEquiv, ConvertsAtParity) {
    // L = 2, P_fF = 10000: offset 5000.
    EXPECT_EQ(letf_equiv(10000.0, 5000.0), 5000.0);
    EXPECT_EQ(letf_equiv(9000.0, 5000.0), 4000.0);
}

TEST(LetfEquiv, DegenerateResultIsAnError) {
    EXPECT_FALSE(letf_equiv(5000.0, 5000.0).has_value());
    EXPECT_FALSE(letf_equiv(4000.0, 5000.0).has_value());
}

TEST(LetfEquiv, InverseIdentity) {
    auto engine = rng::make_engine(13, 1);
    for (int i = 0; i < 1000; ++i) {
        const double offset = rng::canonical(engine) * 9000.0;
        const double x = offset + 1.0 + rng::canonical(engine) * 20000.0;
        const auto f = letf_equiv(x, offset);
        ASSERT_TRUE(f.has_value());
        ASSERT_NEAR(futures_equiv(*f, offset), x, 1e-9);
    }
}

// =============================================================================
// Instant-settlement triggers
// =============================================================================

TEST(InstantTrigger, CheapLetfBuysLetfSellsFutures) {
    const auto pair = ArbitrageAgent::instant_trigger(snap(10000, 10010), snap(4980, 4990), 5000.0);
    ASSERT_TRUE(pair.has_value());
    EXPECT_EQ(pair->buy_market, Market::letf);
    EXPECT_EQ(pair->sell_market, Market::futures);
}

TEST(InstantTrigger, StrictInequalityOnTheCheapLetfSide) {
    // S_L = f(B_F) = 5000 does not trigger.
    EXPECT_FALSE(ArbitrageAgent::instant_trigger(snap(10000, 10010), snap(4990, 5000), 5000.0)
                     .has_value());
}

TEST(InstantTrigger, MirroredConditionIncludesEquality) {
    // f(S_F) = 5001 = B_L triggers the buy-futures / sell-letf pair.
    const auto pair = ArbitrageAgent::instant_trigger(snap(9995, 10001), snap(5001, 5010), 5000.0);
    ASSERT_TRUE(pair.has_value());
    EXPECT_EQ(pair->buy_market, Market::futures);
    EXPECT_EQ(pair->sell_market, Market::letf);
}

TEST(InstantTrigger, MissingQuotesDisableConditions) {
    EXPECT_FALSE(ArbitrageAgent::instant_trigger(snap(std::nullopt, 10010), snap(4980, 4990), 5000.0)
                     .has_value());
    EXPECT_FALSE(ArbitrageAgent::instant_trigger(snap(10000, std::nullopt),
                                                 snap(5001, std::nullopt), 5000.0)
                     .has_value());
}

namespace {

// Test replica of the instant-settlement loop: fire pairs until quiet.
int run_instant_loop(OrderBook& futures, OrderBook& letf, double offset, Time now, OrderId& id) {
    int pairs = 0;
    while (true) {
        const auto trig = ArbitrageAgent::instant_trigger(futures.snapshot(), letf.snapshot(), offset);
        if (!trig) break;
        auto& buy_book = trig->buy_market == Market::futures ? futures : letf;
        auto& sell_book = trig->sell_market == Market::futures ? futures : letf;
        buy_book.submit(Order{id++, Side::buy, OrderKind::market, 0, 1, kArbitrageAgent, now});
        sell_book.submit(Order{id++, Side::sell, OrderKind::market, 0, 1, kArbitrageAgent, now});
        ++pairs;
    }
    return pairs;
}

}  // namespace

TEST(InstantLoop, ConsumesTheGapThenStops) {
    OrderBook futures(Market::futures, 1, 1000);
    OrderBook letf(Market::letf, 1, 1000);
    futures.submit(limit(1, Side::buy, 10000, 3, 0));
    futures.submit(limit(2, Side::sell, 10010, 3, 0));
    letf.submit(limit(3, Side::buy, 4980, 3, 0));
    letf.submit(limit(4, Side::sell, 4990, 2, 0));  // 4990 < f(10000) = 5000

    OrderId id = 100;
    const int pairs = run_instant_loop(futures, letf, 5000.0, 1, id);
    EXPECT_EQ(pairs, 2);  // both cheap asks get lifted
    const auto trig = ArbitrageAgent::instant_trigger(futures.snapshot(), letf.snapshot(), 5000.0);
    EXPECT_FALSE(trig.has_value());
}

TEST(InstantLoop, NoTriggerPostconditionOnRandomBooks) {
    auto engine = rng::make_engine(14, 1);
    for (int i = 0; i < 1000; ++i) {
        OrderBook futures(Market::futures, 1, 1000);
        OrderBook letf(Market::letf, 1, 1000);
        OrderId id = 1;
        const int levels = 1 + static_cast<int>(rng::uniform_int(engine, 0, 5));
        for (int k = 0; k < levels; ++k) {
            const int qty = 1 + static_cast<int>(rng::uniform_int(engine, 0, 2));
            futures.submit(limit(id++, Side::buy, 9990 - rng::uniform_int(engine, 0, 30), qty, 0));
            futures.submit(limit(id++, Side::sell, 10010 + rng::uniform_int(engine, 0, 30), qty, 0));
            letf.submit(limit(id++, Side::buy, 4960 + rng::uniform_int(engine, 0, 60), qty, 0));
            letf.submit(limit(id++, Side::sell, 5040 - rng::uniform_int(engine, 0, 60), qty, 0));
        }
        run_instant_loop(futures, letf, 5000.0, 1, id);
        ASSERT_FALSE(ArbitrageAgent::instant_trigger(futures.snapshot(), letf.snapshot(), 5000.0)
                         .has_value());
        // Books stay uncrossed throughout.
        if (letf.best_bid() && letf.best_ask()) ASSERT_LT(*letf.best_bid(), *letf.best_ask());
        if (futures.best_bid() && futures.best_ask()) {
            ASSERT_LT(*futures.best_bid(), *futures.best_ask());
        }
    }
}

// =============================================================================
// Resting quotes
// =============================================================================

TEST(RestingTarget, QuotesTheConvertedTriggerPrices) {
    const auto sf = snap(10000, 10020);
    const auto sl = snap(4990, 5010);
    EXPECT_EQ(ArbitrageAgent::resting_target(ArbitrageAgent::Slot::letf_buy, sf, sl, 5000.0, 1), 5000);
    EXPECT_EQ(ArbitrageAgent::resting_target(ArbitrageAgent::Slot::letf_sell, sf, sl, 5000.0, 1), 5020);
    EXPECT_EQ(ArbitrageAgent::resting_target(ArbitrageAgent::Slot::futures_buy, sf, sl, 5000.0, 1), 9990);
    EXPECT_EQ(ArbitrageAgent::resting_target(ArbitrageAgent::Slot::futures_sell, sf, sl, 5000.0, 1), 10010);
}

TEST(RestingTarget, MissingSourceQuoteYieldsNothing) {
    const auto sf = snap(std::nullopt, std::nullopt);
    const auto sl = snap(4990, 5010);
    EXPECT_FALSE(ArbitrageAgent::resting_target(ArbitrageAgent::Slot::letf_buy, sf, sl, 5000.0, 1)
                     .has_value());
}

namespace {

struct RestingFixture {
    OrderBook futures{Market::futures, 1, 100000};
    OrderBook letf{Market::letf, 1, 100000};
    ArbitrageAgent agent;
    OrderId id = 1000;

    void seed_books(Money fb, Money fa, Money lb, Money la) {
        futures.submit(limit(1, Side::buy, fb, 1, 0));
        futures.submit(limit(2, Side::sell, fa, 1, 0));
        letf.submit(limit(3, Side::buy, lb, 1, 0));
        letf.submit(limit(4, Side::sell, la, 1, 0));
    }

    RestingPassResult pass(Time now = 1) {
        return arbitrage_resting_pass(agent, futures, letf, 5000.0, now, id);
    }
};

}  // namespace

TEST(RestingPass, PlacesLetfBuyInsideTheSpread) {
    RestingFixture f;
    f.seed_books(10000, 10020, 4990, 5010);
    const auto result = f.pass();
    // letf buy at f(10000)=5000 and futures sell at f^-1(5010)=10010 fit
    // strictly inside their spreads; the letf sell (5020) and futures buy
    // (9990) collide with existing quotes.
    EXPECT_EQ(result.placed, 2);
    EXPECT_EQ(f.letf.quantity_at(Side::buy, 5000), 1);
    EXPECT_EQ(f.futures.quantity_at(Side::sell, 10010), 1);
    EXPECT_EQ(f.letf.best_bid(), 5000);
}

TEST(RestingPass, OneTickSpreadLeavesNoRoom) {
    RestingFixture f;
    f.seed_books(10000, 10001, 4999, 5000);
    const auto result = f.pass();
    EXPECT_EQ(result.placed, 0);
}

TEST(RestingPass, BoundaryTriggerEqualToBestBidIsSkipped) {
    RestingFixture f;
    // f(B_F) = 4999 == B_L: strict inequality fails.
    f.seed_books(9999, 10020, 4999, 5010);
    f.pass();
    EXPECT_EQ(f.letf.quantity_at(Side::buy, 4999), 1);  // only the seed order
}

TEST(RestingPass, StableAcrossRepeatedActivations) {
    RestingFixture f;
    f.seed_books(10000, 10020, 4990, 5010);
    const auto first = f.pass();
    EXPECT_GT(first.placed, 0);
    const auto second = f.pass(2);
    // Unchanged triggers: nothing cancelled, nothing re-placed.
    EXPECT_EQ(second.cancelled, 0);
    EXPECT_EQ(second.placed, 0);
}

TEST(RestingPass, RequotesWhenTheTriggerMoves) {
    RestingFixture f;
    f.seed_books(10000, 10020, 4990, 5010);
    f.pass();
    ASSERT_EQ(f.letf.quantity_at(Side::buy, 5000), 1);
    // Futures best bid moves up one tick; the letf buy follows to 5001.
    f.futures.submit(limit(5, Side::buy, 10001, 1, 1));
    const auto result = f.pass(2);
    EXPECT_GE(result.cancelled, 1);
    EXPECT_EQ(f.letf.quantity_at(Side::buy, 5000), 0);
    EXPECT_EQ(f.letf.quantity_at(Side::buy, 5001), 1);
}

TEST(RestingPass, SandwichPropertyOnRandomBooks) {
    auto engine = rng::make_engine(15, 1);
    for (int i = 0; i < 1000; ++i) {
        RestingFixture f;
        const Money fb = 9960 + rng::uniform_int(engine, 0, 60);
        const Money fa = fb + 1 + rng::uniform_int(engine, 0, 50);
        const Money lb = 4960 + rng::uniform_int(engine, 0, 60);
        const Money la = lb + 1 + rng::uniform_int(engine, 0, 50);
        f.seed_books(fb, fa, lb, la);
        f.pass();
        for (int s = 0; s < ArbitrageAgent::kSlotCount; ++s) {
            const auto& slot = f.agent.slots()[static_cast<std::size_t>(s)];
            if (!slot.id) continue;
            const auto slot_enum = static_cast<ArbitrageAgent::Slot>(s);
            const bool is_letf = ArbitrageAgent::slot_market(slot_enum) == Market::letf;
            const Money bid = is_letf ? lb : fb;
            const Money ask = is_letf ? la : fa;
            ASSERT_GT(slot.price, bid);
            ASSERT_LT(slot.price, ask);
        }
    }
}

// =============================================================================
// Hedging of filled resting orders
// =============================================================================

TEST(HedgeFor, OppositeMarketOppositeSide) {
    EXPECT_EQ(ArbitrageAgent::hedge_for(Market::letf, Side::buy),
              (std::pair{Market::futures, Side::sell}));
    EXPECT_EQ(ArbitrageAgent::hedge_for(Market::futures, Side::buy),
              (std::pair{Market::letf, Side::sell}));
    EXPECT_EQ(ArbitrageAgent::hedge_for(Market::letf, Side::sell),
              (std::pair{Market::futures, Side::buy}));
    EXPECT_EQ(ArbitrageAgent::hedge_for(Market::futures, Side::sell),
              (std::pair{Market::letf, Side::buy}));
}

TEST(ArbitrageAgentFills, OwnRestingFillQueuesAHedge) {
    ArbitrageAgent agent;
    agent.slots()[0].id = 77;  // letf_buy slot
    agent.slots()[0].price = 5000;
    EXPECT_TRUE(agent.note_fill_if_own(77, 1));
    EXPECT_FALSE(agent.slots()[0].id.has_value());
    ASSERT_EQ(agent.pending_hedges().size(), 1u);
    EXPECT_EQ(agent.pending_hedges().front().order, (std::pair{Market::futures, Side::sell}));
}

TEST(ArbitrageAgentFills, ForeignFillsAreIgnored) {
    ArbitrageAgent agent;
    agent.slots()[2].id = 42;
    EXPECT_FALSE(agent.note_fill_if_own(41, 1));
    EXPECT_TRUE(agent.pending_hedges().empty());
}

// =============================================================================
// Leveraged-ETF agent
// =============================================================================

TEST(LetfTarget, EqualsInitialPositionAtFundamental) {
    EXPECT_DOUBLE_EQ(letf_target_position(10000, 2, 10000, 10000), 10000.0);
}

TEST(LetfTarget, DerivedValues) {
    EXPECT_DOUBLE_EQ(letf_target_position(10000, 2, 10000, 9000), 9000.0);
    EXPECT_DOUBLE_EQ(letf_target_position(50000, 2, 10000, 9500), 47500.0);
}

TEST(LetfTarget, AffineInPriceWithKnownSlope) {
    auto engine = rng::make_engine(16, 1);
    for (int i = 0; i < 1000; ++i) {
        const double s0 = rng::canonical(engine) * 100000.0;
        const double lev = 1.5 + rng::canonical(engine) * 3.0;
        const double pff = 1000.0 + rng::canonical(engine) * 20000.0;
        const double p = 100.0 + rng::canonical(engine) * 30000.0;
        const double h = 1.0 + rng::canonical(engine) * 100.0;
        const double up = letf_target_position(s0, lev, pff, p + h);
        const double down = letf_target_position(s0, lev, pff, p - h);
        const double mid = letf_target_position(s0, lev, pff, p);
        // Finite differences: slope S_0 (L-1) / P_fF, zero curvature.
        const double slope = (up - down) / (2.0 * h);
        ASSERT_NEAR(slope, s0 * (lev - 1.0) / pff, 1e-6 * (1.0 + std::abs(slope)));
        ASSERT_NEAR(up + down - 2.0 * mid, 0.0, 1e-6 * (1.0 + std::abs(mid)));
    }
}

TEST(LetfRebalance, NoDeviationNoOrders) {
    EXPECT_FALSE(rebalance_deviates(10000, 10000, 0.01));
}

TEST(LetfRebalance, LargeDeviationTriggers) {
    // held 10000 vs target 9000: deviation 11.1% > 1%.
    EXPECT_TRUE(rebalance_deviates(10000, 9000, 0.01));
}

TEST(LetfRebalance, SmallDeviationBelowThreshold) {
    // held 10000 vs target 9950: deviation 50/9950 = 0.5025% < 1%.
    EXPECT_FALSE(rebalance_deviates(10000, 9950, 0.01));
}

TEST(LetfRebalance, ZeroTargetDeviatesWheneverHeld) {
    EXPECT_TRUE(rebalance_deviates(5, 0, 0.01));
    EXPECT_FALSE(rebalance_deviates(0, 0, 0.01));
}

TEST(LetfRebalance, TargetRoundsHalfAwayFromZero) {
    EXPECT_EQ(rounded_target(9000.5), 9001);
    EXPECT_EQ(rounded_target(9000.49), 9000);
}

// =============================================================================
// Agent initialization
// =============================================================================

TEST(AgentInit, WeightsAndLagStayInBounds) {
    auto engine = rng::make_engine(17, 1);
    for (int i = 0; i < 1000; ++i) {
        const auto a = init_normal_agent(engine, 1.0, 10.0, 1.0, 10000, Market::letf);
        ASSERT_GE(a.w1, 0.0);
        ASSERT_LT(a.w1, 1.0);
        ASSERT_GE(a.w2, 0.0);
        ASSERT_LT(a.w2, 10.0);
        ASSERT_GE(a.w3, 0.0);
        ASSERT_LT(a.w3, 1.0);
        ASSERT_GT(a.w1 + a.w2 + a.w3, 0.0);
        ASSERT_GE(a.tau, 1);
        ASSERT_LE(a.tau, 10000);
    }
}
