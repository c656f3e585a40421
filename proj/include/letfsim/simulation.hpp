#pragma once

#include <algorithm>
#include <optional>
#include <vector>

#include "letfsim/agents.hpp"
#include "letfsim/config.hpp"
#include "letfsim/metrics.hpp"
#include "letfsim/order_book.hpp"
#include "letfsim/rng.hpp"
#include "letfsim/types.hpp"

namespace letfsim {

struct EventLog {
    std::vector<Trade> trades;
    long orders_submitted = 0;
    long orders_rejected = 0;  // price band produced no positive on-grid price
    long cancellations = 0;
    long expirations = 0;
    long activations = 0;
    long misorders = 0;
    long misorder_candidates = 0;  // affected-market order occurrences inside the window
    long unhedged_fills = 0;       // hedge market orders discarded into an empty book
    long rebalance_regime_flags = 0;
    std::optional<Time> first_arbitrage_order;
    std::optional<Time> first_rebalance_order;
    std::vector<long> activation_counts;  // per normal-agent index
};

struct RunResult {
    RunReport report;
    EventLog log;
    std::vector<LiquiditySample> samples;  // retained only on request
    std::vector<double> price_futures;     // recorded P^t series, index 0..steps_completed
    std::vector<double> price_letf;
    bool disrupted = false;
    Time steps_completed = 0;

    const std::vector<double>& price_series(Market m) const {
        return m == Market::futures ? price_futures : price_letf;
    }
};

// One deterministic run over the coupled futures/letf pair.
//
// Each step: (a) expiry pass on both books, (b) one uniformly drawn normal
// agent per market acts (the futures agent always submits, the letf agent
// passes the R_L occurrence draw first), (c) erroneous-order transform
// inside [t_ms, t_me], (d) arbitrage activation after each normal action
// (instant settlement, hedging of own fills, resting-quote maintenance),
// (e) rebalancing every t_R steps with each fill re-triggering (d),
// (f) price recording and liquidity sampling.
class Simulation {
public:
    struct Options {
        bool keep_samples = false;
    };

    explicit Simulation(const SimConfig& cfg) : Simulation(cfg, Options{}) {}

    Simulation(const SimConfig& cfg, Options opt)
        : cfg_(cfg),
          opt_(opt),
          futures_book_(Market::futures, cfg.tick_size, cfg.formation_steps),
          letf_book_(Market::letf, cfg.tick_size, cfg.formation_steps),
          activation_engine_(rng::make_engine(cfg.seed, rng::kActivation)),
          misorder_futures_engine_(rng::make_engine(cfg.seed, rng::kMisorderFutures)),
          misorder_letf_engine_(rng::make_engine(cfg.seed, rng::kMisorderLetf)),
          letf_agent_(init_letf_agent(cfg.initial_position)) {
        const int n = cfg_.normal_agents_per_market;
        agents_.reserve(2 * n);
        engines_.reserve(2 * n);
        for (int i = 0; i < 2 * n; ++i) {
            auto init_engine = rng::make_engine(cfg_.seed, rng::kAgentInit, static_cast<std::uint64_t>(i));
            const Market market = i < n ? Market::futures : Market::letf;
            agents_.push_back(init_normal_agent(init_engine, cfg_.w1_max, cfg_.w2_max, cfg_.w3_max,
                                                cfg_.tau_max, market));
            engines_.push_back(rng::make_engine(cfg_.seed, rng::kAgentDraws, static_cast<std::uint64_t>(i)));
        }
        log_.activation_counts.assign(static_cast<std::size_t>(2 * n), 0);
        price_futures_.push_back(cfg_.fundamental(Market::futures));
        price_letf_.push_back(cfg_.fundamental(Market::letf));
        min_price_futures_ = price_futures_.front();
        min_price_letf_ = price_letf_.front();
        accumulator_ = WindowAccumulator{cfg_.misorder_start, cfg_.misorder_end};
    }

    RunResult run() {
        for (Time t = 1; t <= cfg_.total_steps; ++t) {
            step(t);
            if (disrupted_) break;
            steps_completed_ = t;
        }
        return finish();
    }

    const OrderBook& book(Market m) const { return m == Market::futures ? futures_book_ : letf_book_; }
    const LetfAgentState& letf_agent() const { return letf_agent_; }
    const ArbitrageAgent& arbitrage_agent() const { return arb_; }

private:
    void step(Time t) {
        now_ = t;
        log_.expirations += futures_book_.expire(t) + letf_book_.expire(t);
        const bool arbitrage_live = !cfg_.in_formation(t) && cfg_.arbitrage_enabled;
        for (const Market m : {Market::futures, Market::letf}) {
            act_normal_agent(t, m);
            if (arbitrage_live) arbitrage_activation();
        }
        if (t % cfg_.rebalance_interval == 0 && !cfg_.in_formation(t) && cfg_.rebalance_enabled) {
            rebalance_activation();
        }
        if (!disrupted_) record_step(t);
    }

    void act_normal_agent(Time t, Market m) {
        const int n = cfg_.normal_agents_per_market;
        const auto base = m == Market::futures ? 0 : n;
        const auto idx =
            static_cast<std::size_t>(base + rng::uniform_int(activation_engine_, 0, n - 1));
        ++log_.activations;
        ++log_.activation_counts[idx];
        const NormalAgentState& agent = agents_[idx];
        rng::Engine& engine = engines_[idx];

        // Draw consumption is identical for every activation of a given
        // agent, so scenario flags never desynchronize the streams.
        bool occurs = true;
        if (agent.market == Market::letf) {
            occurs = rng::canonical(engine) < cfg_.letf_order_prob;
        }
        const double noise = rng::gauss(engine) * cfg_.sigma_noise;
        const double uniform_draw = rng::canonical(engine);
        if (!occurs) return;

        bool misorder = false;
        if (cfg_.in_misorder_window(t) && market_affected(agent.market)) {
            ++log_.misorder_candidates;
            rng::Engine& m_engine = agent.market == Market::futures ? misorder_futures_engine_
                                                                    : misorder_letf_engine_;
            misorder = rng::canonical(m_engine) < cfg_.misorder_prob;
        }
        if (misorder) {
            ++log_.misorders;
            submit_order(book_of(agent.market),
                         Order{next_id(), Side::sell, OrderKind::market, 0, 1,
                               static_cast<AgentId>(idx), t});
            return;
        }

        const double fundamental = cfg_.fundamental(agent.market);
        std::optional<OrderSpec> spec;
        if (cfg_.in_formation(t)) {
            const double r_e = normal_expected_return(agent, fundamental, fundamental, fundamental, noise);
            spec = formation_order(fundamental, r_e, cfg_.half_width(agent.market), uniform_draw,
                                   cfg_.tick_size);
        } else {
            const auto& hist = price_history(agent.market);
            const double mid_prev = hist[static_cast<std::size_t>(t - 1)];
            const Time lag_index = t - 1 - agent.tau;
            const double mid_lagged =
                lag_index >= 0 ? hist[static_cast<std::size_t>(lag_index)] : fundamental;
            const double r_e = normal_expected_return(agent, fundamental, mid_prev, mid_lagged, noise);
            spec = normal_order(mid_prev, r_e, cfg_.half_width(agent.market), uniform_draw,
                                cfg_.tick_size);
        }
        if (!spec) {
            ++log_.orders_rejected;
            return;
        }
        submit_order(book_of(agent.market),
                     Order{next_id(), spec->side, OrderKind::limit, spec->price, 1,
                           static_cast<AgentId>(idx), t});
    }

    void arbitrage_activation() {
        const double offset = cfg_.parity_offset();

        // Instant settlement: fire marketable pairs until neither condition holds.
        while (true) {
            const auto trigger = ArbitrageAgent::instant_trigger(futures_book_.snapshot(),
                                                                 letf_book_.snapshot(), offset);
            if (!trigger) break;
            mark_first_arbitrage();
            submit_order(book_of(trigger->buy_market),
                         Order{next_id(), Side::buy, OrderKind::market, 0, 1, kArbitrageAgent, now_});
            submit_order(book_of(trigger->sell_market),
                         Order{next_id(), Side::sell, OrderKind::market, 0, 1, kArbitrageAgent, now_});
        }

        // Hedge fills of own resting orders with market orders in the
        // opposite market; chains (a hedge filling another own quote) keep
        // the queue going.
        while (!arb_.pending_hedges().empty()) {
            const auto hedge = arb_.pending_hedges().front();
            arb_.pending_hedges().pop_front();
            mark_first_arbitrage();
            const auto trades =
                submit_order(book_of(hedge.order.first),
                             Order{next_id(), hedge.order.second, OrderKind::market, 0,
                                   hedge.quantity, kArbitrageAgent, now_});
            if (trades.empty()) ++log_.unhedged_fills;
        }

        const auto pass =
            arbitrage_resting_pass(arb_, futures_book_, letf_book_, offset, now_, next_order_id_);
        log_.cancellations += pass.cancelled;
        log_.orders_submitted += pass.placed;
        if (pass.placed > 0) mark_first_arbitrage();
    }

    void rebalance_activation() {
        const double futures_price = current_price(Market::futures);
        const double target_real = letf_target_position(cfg_.initial_position, cfg_.leverage,
                                                         cfg_.fundamental_futures, futures_price);
        if (target_real <= 0.0) {
            ++log_.rebalance_regime_flags;
            return;
        }
        const long long target = rounded_target(target_real);
        if (!rebalance_deviates(letf_agent_.held, target, cfg_.rebalance_threshold)) return;
        const Side side = letf_agent_.held > target ? Side::sell : Side::buy;
        while (letf_agent_.held != target) {
            mark_first_rebalance();
            const auto trades = submit_order(
                futures_book_, Order{next_id(), side, OrderKind::market, 0, 1, kLetfAgent, now_});
            if (trades.empty()) {
                // Book side depleted while demand remains: market disruption.
                disrupted_ = true;
                break;
            }
            if (cfg_.arbitrage_enabled) arbitrage_activation();
        }
    }

    std::vector<Trade> submit_order(OrderBook& target_book, const Order& order) {
        ++log_.orders_submitted;
        auto trades = target_book.submit(order);
        for (const auto& trade : trades) route_trade(trade);
        return trades;
    }

    void route_trade(const Trade& trade) {
        log_.trades.push_back(trade);
        last_trade(trade.market) = trade.price;
        if (cfg_.in_misorder_window(trade.time)) {
            ++(trade.market == Market::futures ? window_volume_futures_ : window_volume_letf_);
        }
        if (trade.buyer == kLetfAgent) {
            letf_agent_.held += trade.quantity;
            letf_agent_.buy_volume += trade.quantity;
        }
        if (trade.seller == kLetfAgent) {
            letf_agent_.held -= trade.quantity;
            letf_agent_.sell_volume += trade.quantity;
        }
        if (trade.buyer == kArbitrageAgent) arb_.add_position(trade.market, trade.quantity);
        if (trade.seller == kArbitrageAgent) arb_.add_position(trade.market, -trade.quantity);
        arb_.note_fill_if_own(trade.maker_id, trade.quantity);
    }

    void record_step(Time t) {
        for (const Market m : {Market::futures, Market::letf}) {
            const double price = cfg_.in_formation(t) ? cfg_.fundamental(m) : current_price(m);
            price_history(m).push_back(price);
            double& min_price = m == Market::futures ? min_price_futures_ : min_price_letf_;
            min_price = std::min(min_price, price);
            const auto sample = take_sample(book_of(m), t);
            accumulator_.add(sample, report_.market(m));
            if (opt_.keep_samples) samples_.push_back(sample);
        }
    }

    // P^t convention: mid when both sides quote, else the last trade price,
    // else the fundamental.
    double current_price(Market m) const {
        const auto snap = book(m).snapshot();
        if (snap.mid) return *snap.mid;
        const auto& last = m == Market::futures ? last_trade_futures_ : last_trade_letf_;
        if (last) return static_cast<double>(*last);
        return cfg_.fundamental(m);
    }

    RunResult finish() {
        report_.futures.volume = window_volume_futures_;
        report_.letf.volume = window_volume_letf_;
        report_.futures.decline_amount = cfg_.fundamental(Market::futures) - min_price_futures_;
        report_.letf.decline_amount = cfg_.fundamental(Market::letf) - min_price_letf_;
        report_.rebalance_sell_volume = static_cast<double>(letf_agent_.sell_volume);
        report_.disrupted = disrupted_;
        report_.steps_completed = steps_completed_;
        report_.seed = cfg_.seed;

        RunResult result;
        result.report = report_;
        result.log = std::move(log_);
        result.samples = std::move(samples_);
        result.price_futures = std::move(price_futures_);
        result.price_letf = std::move(price_letf_);
        result.disrupted = disrupted_;
        result.steps_completed = steps_completed_;
        return result;
    }

    OrderBook& book_of(Market m) { return m == Market::futures ? futures_book_ : letf_book_; }
    std::vector<double>& price_history(Market m) {
        return m == Market::futures ? price_futures_ : price_letf_;
    }
    std::optional<Money>& last_trade(Market m) {
        return m == Market::futures ? last_trade_futures_ : last_trade_letf_;
    }
    bool market_affected(Market m) const {
        return (m == Market::futures && cfg_.misorder_market == MisorderMarket::futures) ||
               (m == Market::letf && cfg_.misorder_market == MisorderMarket::letf);
    }
    OrderId next_id() { return next_order_id_++; }
    void mark_first_arbitrage() {
        if (!log_.first_arbitrage_order) log_.first_arbitrage_order = now_;
    }
    void mark_first_rebalance() {
        if (!log_.first_rebalance_order) log_.first_rebalance_order = now_;
    }

    SimConfig cfg_;
    Options opt_;
    OrderBook futures_book_;
    OrderBook letf_book_;
    rng::Engine activation_engine_;
    rng::Engine misorder_futures_engine_;
    rng::Engine misorder_letf_engine_;
    std::vector<NormalAgentState> agents_;  // 0..n-1 futures, n..2n-1 letf
    std::vector<rng::Engine> engines_;
    ArbitrageAgent arb_;
    LetfAgentState letf_agent_;

    std::vector<double> price_futures_;
    std::vector<double> price_letf_;
    std::optional<Money> last_trade_futures_;
    std::optional<Money> last_trade_letf_;
    double min_price_futures_ = 0.0;
    double min_price_letf_ = 0.0;
    long window_volume_futures_ = 0;
    long window_volume_letf_ = 0;

    WindowAccumulator accumulator_;
    RunReport report_;
    EventLog log_;
    std::vector<LiquiditySample> samples_;
    OrderId next_order_id_ = 1;
    Time now_ = 0;
    Time steps_completed_ = 0;
    bool disrupted_ = false;
};

inline RunResult run_simulation(const SimConfig& cfg,
                                Simulation::Options opt = Simulation::Options{}) {
    return Simulation(cfg, opt).run();
}

}  // namespace letfsim
