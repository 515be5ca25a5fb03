#include <gtest/gtest.h>

#include <random>

#include "fixtures.h"
#include "market_oracle.h"
#include "retina/market.h"

using namespace retina;
using namespace retina::market;

namespace {

constexpr std::uint32_t kPerHood = 8;

template <class F>
Errc code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return Errc::invalid_argument;
}

Participant participant(NodeId id, bool green = false, Preferences prefs = {}) {
  return {id, NeighborhoodId{(id.value - 1) / kPerHood + 1}, green, prefs};
}

Order resting(std::uint64_t id, Side side, NodeId who, double kw, double sp, bool green = false) {
  Order o;
  o.order_id = id;
  o.side = side;
  o.kw = kw;
  o.green = green;
  o.originator = who;
  o.neighborhood = NeighborhoodId{(who.value - 1) / kPerHood + 1};
  o.starting_price = sp;
  return o;
}

class MarketTest : public ::testing::Test {
 protected:
  void SetUp() override {
    for (std::uint32_t v = 1; v <= 2 * kPerHood; ++v) market_.open_wallet(NodeId{v}, {100.0, 1000.0});
  }
  double total_balance() const {
    double s = 0;
    for (const auto& [_, w] : market_.wallets()) s += w.balance;
    return s;
  }
  double total_energy() const {
    double s = 0;
    for (const auto& [_, w] : market_.wallets()) s += w.energy_kwh;
    return s;
  }

  const PricingWeights zero_{0, 0, 0, 0};
  trust::TrustNetwork net_ = fixtures::two_hoods(kPerHood);
  Marketplace market_{net_, PricingWeights{}};
};

}  // namespace

TEST(Price, WorkedExamples) {
  EXPECT_NEAR(price(1.0, 0.2, 0.5), 1.70, 1e-9);
  EXPECT_NEAR(price(1.0, 0.2, 0.2), 1.40, 1e-9);
  EXPECT_EQ(price(1.37, 0, 0), 1.37);
  EXPECT_EQ(code_of([] { price(0, 0.2, 0.5); }), Errc::nonpositive_price);
  EXPECT_EQ(code_of([] { price(-1, 0.2, 0.5); }), Errc::nonpositive_price);
}

TEST(Price, StrictlyIncreasingInEachArgument) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.01, 3.0), d(1e-3, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double p = u(rng), a = u(rng), b = u(rng), e = d(rng);
    ASSERT_LT(price(p, a, b), price(p + e, a, b));
    ASSERT_LT(price(p, a, b), price(p, a + e, b));
    ASSERT_LT(price(p, a, b), price(p, a, b + e));
  }
}

TEST(EffectivePrice, ComposesGreenThenProximity) {
  const PricingWeights w;
  Order o = resting(1, Side::sell, NodeId{2}, 1.0, 1.0, true);
  EXPECT_NEAR(effective_price(o, NeighborhoodId{2}, w), 1.80, 1e-12);
  EXPECT_NEAR(effective_price(o, NeighborhoodId{1}, w), 1.44, 1e-12);
  o.green = false;
  EXPECT_EQ(effective_price(o, NeighborhoodId{1}, PricingWeights{0.2, 0.5, 0, 0}), 1.0);
}

TEST(EffectivePrice, ReducesToTheAdditiveFormWithOneWeight) {
  for (double sp : {0.5, 1.0, 2.25})
    for (double x : {0.0, 0.2, 0.35, 0.5}) {
      // Green weight only.
      EXPECT_NEAR(pair_price(sp, true, false, {x, 0, 0, 0}), price(sp, x, 0), 1e-12);
      // Proximity weight only.
      EXPECT_NEAR(pair_price(sp, true, false, {0, x, 0, 0}), price(sp, 0, x), 1e-12);
      EXPECT_NEAR(pair_price(sp, false, true, {0, 0, 0, x}), price(sp, 0, x), 1e-12);
    }
}

TEST(EffectivePrice, GreenIsCheaperWithDefaultWeights) {
  const PricingWeights w;
  for (bool same : {true, false}) EXPECT_LT(pair_price(1, true, same, w), pair_price(1, false, same, w));
}

TEST(Weights, ValidatedAgainstBounds) {
  EXPECT_NO_THROW(validate_weights(PricingWeights{}));
  EXPECT_EQ(code_of([] { validate_weights({0.1, 0.5, 0.5, 0.2}); }), Errc::config_invalid);
  EXPECT_EQ(code_of([] { validate_weights({0.2, 0.6, 0.5, 0.2}); }), Errc::config_invalid);
  EXPECT_EQ(code_of([] { validate_weights({0.2, 0.5, -0.1, 0.2}); }), Errc::config_invalid);
}

TEST(Broker, SellsTheExcessAboveHigh) {
  BrokerState s{100, 20, 80, 10, 5, {}};
  EXPECT_EQ(broker_decide(s), Action::sell(25));
}

TEST(Broker, BuysTheDeficitBelowLow) {
  BrokerState s{10, 20, 80, 2, 8, {}};
  EXPECT_EQ(broker_decide(s), Action::buy(16));
}

TEST(Broker, HoldsAtTheThresholds) {
  EXPECT_EQ(broker_decide({75, 20, 80, 10, 5, {}}), Action::hold());
  EXPECT_EQ(broker_decide({15, 20, 80, 10, 5, {}}), Action::hold());
  EXPECT_EQ(broker_decide({50, 20, 80, 0, 0, {}}), Action::hold());
}

TEST(Broker, ForecastUsesTheLastThreeCycles) {
  EXPECT_EQ(forecast({}), 0.0);
  EXPECT_EQ(forecast({4}), 4.0);
  EXPECT_EQ(forecast({100, 1, 2, 3}), 2.0);
  BrokerState s{100, 20, 80, 10, 5, {9, 3, 6}};
  EXPECT_EQ(broker_decide(s), Action::sell(19));
}

TEST(Broker, OverrideWins) {
  BrokerState s{100, 20, 80, 10, 5, {}};
  EXPECT_EQ(broker_decide(s, Action::hold()), Action::hold());
  EXPECT_EQ(broker_decide(s, Action::buy(3)), Action::buy(3));
}

TEST(OrderBook, FillsPartiallyAndRemovesWhenEmpty) {
  OrderBook b;
  b.add(resting(5, Side::buy, NodeId{2}, 4, 1));
  EXPECT_EQ(code_of([&] { b.add(resting(5, Side::buy, NodeId{3}, 1, 1)); }), Errc::invalid_argument);
  EXPECT_EQ(code_of([&] { b.add(resting(6, Side::buy, NodeId{3}, 0, 1)); }), Errc::invalid_argument);
  b.fill(5, 1.5);
  EXPECT_DOUBLE_EQ(b.get(5).kw, 2.5);
  b.fill(5, 2.5);
  EXPECT_FALSE(b.contains(5));
  b.add(resting(7, Side::sell, NodeId{2}, 1, 1));
  b.add(resting(8, Side::sell, NodeId{3}, 1, 1));
  EXPECT_EQ(b.cancel_by(NodeId{2}), 1u);
  EXPECT_EQ(b.size(), 1u);
}

TEST_F(MarketTest, SellerTakesTheHighestBid) {
  Marketplace m(net_, zero_);
  for (std::uint32_t v = 1; v <= 2 * kPerHood; ++v) m.open_wallet(NodeId{v}, {100, 1000});
  m.book_mut().add(resting(10, Side::buy, NodeId{3}, 5, 1.4));
  m.book_mut().add(resting(11, Side::buy, NodeId{4}, 5, 1.7));
  m.book_mut().add(resting(12, Side::buy, NodeId{5}, 5, 1.6));
  const auto r = m.match_and_execute(Action::sell(2), participant(NodeId{2}), 0);
  ASSERT_EQ(r.trades.size(), 1u);
  EXPECT_EQ(r.trades[0].buy_order_id, 11u);
  EXPECT_NEAR(r.trades[0].unit_price, 1.7, 1e-12);
  EXPECT_FALSE(r.placed);
  EXPECT_DOUBLE_EQ(m.book().get(11).kw, 3.0);
}

TEST_F(MarketTest, EqualOffersGoToTheLowestOrderId) {
  market_.book_mut().add(resting(9, Side::sell, NodeId{3}, 5, 1.0));
  market_.book_mut().add(resting(4, Side::sell, NodeId{4}, 5, 1.0));
  const auto r = market_.match_and_execute(Action::buy(1), participant(NodeId{2}), 0);
  ASSERT_EQ(r.trades.size(), 1u);
  EXPECT_EQ(r.trades[0].sell_order_id, 4u);
}

TEST_F(MarketTest, EmptyBookRestsTheIntent) {
  const auto r = market_.match_and_execute(Action::buy(3), participant(NodeId{2}), 0);
  EXPECT_TRUE(r.trades.empty());
  ASSERT_TRUE(r.placed);
  EXPECT_EQ(r.placed->side, Side::buy);
  EXPECT_EQ(r.placed->kw, 3.0);
  EXPECT_TRUE(market_.book().contains(r.placed->order_id));
  EXPECT_TRUE(identity::verify_bytes(net_.registry(), r.placed->signature,
                                     order_signing_bytes(*r.placed)));
}

TEST_F(MarketTest, PartialFillsWalkTheBook) {
  market_.book_mut().add(resting(20, Side::sell, NodeId{3}, 2, 1.0));
  market_.book_mut().add(resting(21, Side::sell, NodeId{4}, 2, 1.1));
  const auto r = market_.match_and_execute(Action::buy(5), participant(NodeId{2}), 0);
  ASSERT_EQ(r.trades.size(), 2u);
  EXPECT_EQ(r.trades[0].sell_order_id, 20u);
  EXPECT_EQ(r.trades[1].sell_order_id, 21u);
  EXPECT_DOUBLE_EQ(r.traded_kw(), 4.0);
  ASSERT_TRUE(r.placed);
  EXPECT_DOUBLE_EQ(r.placed->kw, 1.0);
  EXPECT_TRUE(market_.book().size() == 1);
}

TEST_F(MarketTest, PreferencesGateTheTrade) {
  market_.book_mut().add(resting(30, Side::buy, NodeId{3}, 5, 1.0));
  Preferences picky;
  picky.min_sell_price = 5.0;
  const auto r = market_.match_and_execute(Action::sell(1), participant(NodeId{2}, false, picky), 0);
  EXPECT_TRUE(r.trades.empty());
  EXPECT_TRUE(r.placed);
  market_.book_mut().clear();

  market_.book_mut().add(resting(31, Side::sell, NodeId{4}, 5, 1.0, false));
  Preferences green_only;
  green_only.green_only = true;
  const auto g = market_.match_and_execute(Action::buy(1), participant(NodeId{5}, false, green_only), 0);
  EXPECT_TRUE(g.trades.empty());
  ASSERT_TRUE(g.placed);
  EXPECT_TRUE(g.placed->green);

  // A non-green seller cannot fill the green-only bid; a green one can.
  const auto ng = market_.match_and_execute(Action::sell(1), participant(NodeId{6}, false), 0);
  for (const auto& t : ng.trades) EXPECT_NE(t.buy_order_id, g.placed->order_id);
  const auto gr = market_.match_and_execute(Action::sell(1), participant(NodeId{7}, true), 0);
  ASSERT_FALSE(gr.trades.empty());
  EXPECT_EQ(gr.trades[0].buy_order_id, g.placed->order_id);
  EXPECT_TRUE(gr.trades[0].green);
}

TEST_F(MarketTest, BuyerQuantityIsCappedByBalance) {
  market_.wallet_mut(NodeId{2}).balance = 2.25;
  market_.book_mut().add(resting(40, Side::sell, NodeId{10}, 5, 1.0));  // cross-hood, non-green: 2.25
  const auto r = market_.match_and_execute(Action::buy(5), participant(NodeId{2}), 0);
  ASSERT_EQ(r.trades.size(), 1u);
  EXPECT_DOUBLE_EQ(r.trades[0].kw, 1.0);
  EXPECT_TRUE(r.trades[0].cross_neighborhood);
  EXPECT_FALSE(r.placed);
  EXPECT_DOUBLE_EQ(market_.wallet(NodeId{2}).balance, 0.0);
}

TEST_F(MarketTest, MatchesTheBruteForceScan) {
  std::mt19937_64 rng(2024);
  Marketplace m(net_, PricingWeights{});
  for (int round = 0; round < 300; ++round) {
    m.book_mut().clear();
    for (std::uint32_t v = 1; v <= 2 * kPerHood; ++v) m.open_wallet(NodeId{v}, {1000, 1e6});
    const auto book = oracle::random_book(rng, 50, 2 * kPerHood, kPerHood);
    for (const auto& o : book) m.book_mut().add(o);
    const NodeId self{static_cast<std::uint32_t>(2 + rng() % (2 * kPerHood - 1))};
    Preferences prefs;
    prefs.green_only = rng() % 4 == 0;
    const auto me = participant(self, rng() % 2, prefs);
    const ActionKind kind = rng() % 2 ? ActionKind::sell : ActionKind::buy;
    const auto want = oracle::best_counterparty(book, kind, me, m.weights());
    const auto r = m.match_and_execute({kind, 0.01}, me, 0);
    if (!want) {
      EXPECT_TRUE(r.trades.empty());
      EXPECT_TRUE(r.placed);
      continue;
    }
    ASSERT_EQ(r.trades.size(), 1u) << "round " << round;
    const auto& t = r.trades[0];
    EXPECT_EQ(kind == ActionKind::sell ? t.buy_order_id : t.sell_order_id, want->order_id) << round;
    EXPECT_EQ(t.unit_price, want->unit_price);
  }
}

TEST(Settle, MovesEnergyAndCurrency) {
  Wallet buyer{0, 10}, seller{8, 0};
  std::vector<ledger::EntryBody> log;
  const Trade t{1, 2, 5, 1.4, 0, NodeId{1}, NodeId{2}, false, false};
  settle(t, buyer, seller, log);
  EXPECT_NEAR(buyer.balance, 3.0, 1e-12);
  EXPECT_EQ(buyer.energy_kwh, 5.0);
  EXPECT_NEAR(seller.balance, 7.0, 1e-12);
  EXPECT_EQ(seller.energy_kwh, 3.0);
  ASSERT_EQ(log.size(), 1u);
  const auto& s = std::get<ledger::TradeSettled>(log[0]);
  EXPECT_EQ(s.buyer_after, buyer);
  EXPECT_EQ(s.seller_after, seller);
}

TEST(Settle, RefusesWithoutChangingAnything) {
  const Trade t{1, 2, 5, 1.4, 0, NodeId{1}, NodeId{2}, false, false};
  Wallet buyer{0, 6.9}, seller{8, 0};
  std::vector<ledger::EntryBody> log;
  EXPECT_EQ(code_of([&] { settle(t, buyer, seller, log); }), Errc::insufficient_funds);
  EXPECT_EQ(buyer, (Wallet{0, 6.9}));
  EXPECT_EQ(seller, (Wallet{8, 0}));
  EXPECT_TRUE(log.empty());
  Wallet dry{4, 0};
  EXPECT_EQ(code_of([&] { settle(t, buyer, dry, log); }), Errc::insufficient_energy);
  EXPECT_TRUE(log.empty());
  settle(t, buyer, seller, log, true);
  EXPECT_NEAR(buyer.balance, -0.1, 1e-12);
}

TEST_F(MarketTest, InjectedFaultsLeaveWalletsUntouched) {
  Marketplace m(net_, PricingWeights{}, {1.0, false, [](const Trade&) { return true; }});
  for (std::uint32_t v = 1; v <= 2 * kPerHood; ++v) m.open_wallet(NodeId{v}, {100, 1000});
  m.book_mut().add(resting(50, Side::buy, NodeId{3}, 5, 1.0));
  m.book_mut().add(resting(51, Side::buy, NodeId{4}, 5, 1.0));
  const auto before = m.wallets();
  const auto r = m.match_and_execute(Action::sell(3), participant(NodeId{2}), 0);
  EXPECT_EQ(r.failed_settlements, 2u);
  EXPECT_TRUE(r.trades.empty());
  EXPECT_EQ(m.wallets(), before);
  EXPECT_EQ(m.book().get(50).kw, 5.0);
  EXPECT_EQ(m.uncommitted(), 1u);  // only the resting order
}

TEST_F(MarketTest, RefusesUntrustedAndOverdrawnSellers) {
  EXPECT_EQ(code_of([&] { market_.match_and_execute(Action::sell(500), participant(NodeId{2}), 0); }),
            Errc::insufficient_energy);
  EXPECT_EQ(code_of([&] { market_.match_and_execute(Action::hold(), participant(NodeId{2}), 0); }),
            Errc::invalid_argument);
  net_.revoke_certificate(NodeId{3}, ledger::RevocationReason::attestation_failure);
  EXPECT_EQ(code_of([&] { market_.match_and_execute(Action::buy(1), participant(NodeId{3}), 0); }),
            Errc::untrusted_node);
  net_.set_online(NodeId{4}, false);
  EXPECT_EQ(code_of([&] { market_.match_and_execute(Action::buy(1), participant(NodeId{4}), 0); }),
            Errc::untrusted_node);
}

TEST_F(MarketTest, SkipsOrdersOfNodesThatLostTrust) {
  market_.book_mut().add(resting(60, Side::sell, NodeId{3}, 5, 1.0));
  market_.book_mut().add(resting(61, Side::sell, NodeId{4}, 5, 1.2));
  net_.revoke_certificate(NodeId{3}, ledger::RevocationReason::attestation_failure);
  const auto r = market_.match_and_execute(Action::buy(1), participant(NodeId{2}), 0);
  ASSERT_EQ(r.trades.size(), 1u);
  EXPECT_EQ(r.trades[0].sell_order_id, 61u);
}

TEST_F(MarketTest, ConservesCurrencyAndEnergy) {
  std::mt19937_64 rng(5);
  const double balance = total_balance(), energy = total_energy();
  for (int i = 0; i < 200; ++i) {
    const NodeId self{static_cast<std::uint32_t>(2 + rng() % (2 * kPerHood - 1))};
    const double kw = 0.5 + (rng() % 100) / 20.0;
    const bool sell = rng() % 2;
    if (sell && market_.wallet(self).energy_kwh < kw) continue;
    market_.match_and_execute(sell ? Action::sell(kw) : Action::buy(kw), participant(self, rng() % 2), 0);
  }
  EXPECT_NEAR(total_balance(), balance, 1e-6);
  EXPECT_NEAR(total_energy(), energy, 1e-9);
}

TEST_F(MarketTest, CommitsPendingEntriesAsOneValidatedBlock) {
  EXPECT_FALSE(market_.commit_block());
  market_.book_mut().add(resting(70, Side::buy, NodeId{3}, 5, 1.0));
  market_.match_and_execute(Action::sell(2), participant(NodeId{2}), 3);
  EXPECT_EQ(market_.uncommitted(), 2u);
  EXPECT_TRUE(market_.commit_block());
  const auto& l = market_.trading_ledger();
  ASSERT_EQ(l.size(), 1u);
  EXPECT_TRUE(net_.is_validator(NodeId{l.blocks()[0].header.identity}));
  EXPECT_EQ(l.blocks()[0].header.tx_count, 2u);
  EXPECT_TRUE(ledger::audit_chain(l).valid);
  EXPECT_EQ(market_.uncommitted(), 0u);

  market_.match_and_execute(Action::buy(1), participant(NodeId{2}), 4);
  net_.set_online(NodeId{1}, false);
  net_.set_online(NodeId{kPerHood + 1}, false);
  EXPECT_EQ(code_of([&] { market_.commit_block(); }), Errc::no_empowered_node);
}

TEST(Output, TradeRowsAndBookDump) {
  const Trade t{6, 5, 2.5, 1.44, 1, NodeId{8}, NodeId{9}, true, false};
  EXPECT_EQ(trade_csv_row(t), "1,6,5,2.5,1.44,8,9,1,0");
  EXPECT_EQ(format_number(0.1 + 0.2), "0.30000000000000004");
  EXPECT_EQ(format_number(2), "2");
  OrderBook b;
  b.add(resting(3, Side::sell, NodeId{2}, 1, 1));
  b.add(resting(1, Side::buy, NodeId{2}, 1, 1));
  const auto dump = dump_order_book(b);
  EXPECT_EQ(std::count(dump.begin(), dump.end(), '\n'), 2);
  EXPECT_LT(dump.find("\"order_id\":1"), dump.find("\"order_id\":3"));
}
