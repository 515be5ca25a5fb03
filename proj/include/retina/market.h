#pragma once

// Energy market: pricing, the reserve broker, the order book and the matching
// contract that settles trades onto the trading ledger.

#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <vector>

#include "retina/ledger.h"
#include "retina/orders.h"
#include "retina/trustnet.h"

namespace retina::market {

struct PricingWeights {
  double a = 0.2;           ///< green-energy weight
  double b = 0.5;           ///< location-proximity weight (cross-neighborhood)
  double a_nongreen = 0.5;  ///< weight applied to non-green energy
  double b_min = 0.2;       ///< proximity weight inside one neighborhood
  bool operator==(const PricingWeights&) const = default;
};

struct WeightBounds {
  double lo = 0.2;
  double hi = 0.5;
  bool operator==(const WeightBounds&) const = default;
};

/// Throws ConfigInvalid when a or b leaves the bounds, or any weight is negative.
void validate_weights(const PricingWeights& w, WeightBounds bounds = {});

/// starting_price * (1 + a + b). Throws NonpositivePrice.
double price(double starting_price, double a, double b);

/// Unit price for energy of the given kind between two neighborhoods.
double pair_price(double starting_price, bool green, bool same_neighborhood, const PricingWeights& w);

/// pair_price with the order's own starting price and green flag.
double effective_price(const Order& order, NeighborhoodId counterparty_neighborhood,
                       const PricingWeights& w);

// Broker.

enum class ActionKind : std::uint8_t { hold, sell, buy };

struct Action {
  ActionKind kind = ActionKind::hold;
  double kw = 0.0;
  static Action hold() { return {}; }
  static Action sell(double kw) { return {ActionKind::sell, kw}; }
  static Action buy(double kw) { return {ActionKind::buy, kw}; }
  bool operator==(const Action&) const = default;
};

struct BrokerState {
  double reserves = 0.0;
  double low_threshold = 20.0;
  double high_threshold = 80.0;
  double production_rate = 0.0;
  double consumption_rate = 0.0;
  /// Recent per-cycle net demand deviations, oldest first.
  std::deque<double> demand_history;
};

/// Mean of the last three history entries; 0 when empty.
double forecast(const std::deque<double>& history);

Action broker_decide(const BrokerState& s, std::optional<Action> manual_override = std::nullopt);

// Orders and matching.

struct Preferences {
  double min_sell_price = 0.0;
  double max_buy_price = std::numeric_limits<double>::infinity();
  bool green_only = false;
};

/// Who is acting, as seen by the matcher.
struct Participant {
  NodeId id;
  NeighborhoodId neighborhood;
  bool green_energy = false;  ///< kind of energy this node sells
  Preferences prefs;
};

class OrderBook {
 public:
  void add(const Order& o);
  bool contains(std::uint64_t order_id) const { return orders_.count(order_id) != 0; }
  const Order& get(std::uint64_t order_id) const;
  /// Lowers an order's remaining quantity; removes it when nothing is left.
  void fill(std::uint64_t order_id, double kw);
  void remove(std::uint64_t order_id) { orders_.erase(order_id); }
  std::size_t cancel_by(NodeId originator);
  void clear() { orders_.clear(); }

  std::size_t size() const { return orders_.size(); }
  bool empty() const { return orders_.empty(); }
  /// Open orders ascending by order_id.
  std::vector<Order> snapshot() const;
  const std::map<std::uint64_t, Order>& orders() const { return orders_; }

 private:
  std::map<std::uint64_t, Order> orders_;
};

struct Quote {
  std::uint64_t order_id = 0;
  double unit_price = 0.0;
  bool operator==(const Quote&) const = default;
};

/// Best resting counterparty for an intent: the highest-priced buy order for
/// a sell intent, the lowest-priced sell order for a buy intent, ties to the
/// lowest order id. Own orders and orders the kinds of energy rule out are
/// skipped; `skip` excludes further order ids.
std::optional<Quote> select_counterparty(const OrderBook& book, ActionKind intent,
                                         const Participant& self, const PricingWeights& w,
                                         const std::function<bool(const Order&)>& skip = {});

/// Moves energy seller->buyer and currency buyer->seller and records the
/// settlement. Throws InsufficientEnergy or InsufficientFunds, leaving both
/// wallets and `log` untouched.
void settle(const Trade& trade, Wallet& buyer, Wallet& seller, std::vector<ledger::EntryBody>& log,
            bool allow_credit = false);

struct ExecutionResult {
  std::vector<Trade> trades;
  std::optional<Order> placed;
  std::size_t failed_settlements = 0;
  double traded_kw() const;
};

struct MarketOptions {
  double starting_price = 1.0;
  bool allow_credit = false;
  /// Test hook: returning true makes the settlement of that trade fail with
  /// InsufficientFunds.
  std::function<bool(const Trade&)> fault;
};

/// Order book, wallets and trading ledger of one network.
class Marketplace {
 public:
  Marketplace(trust::TrustNetwork& net, PricingWeights weights, MarketOptions options = {});

  void open_wallet(NodeId node, Wallet w);
  const Wallet& wallet(NodeId node) const;
  Wallet& wallet_mut(NodeId node);
  const std::map<NodeId, Wallet>& wallets() const { return wallets_; }

  /// Runs the matching contract for one intent. Trades against the best
  /// acceptable counterparties until the intent is filled, then rests the
  /// remainder as an order. Throws UntrustedNode, InsufficientEnergy or
  /// InvalidArgument (hold / non-positive intent).
  ExecutionResult match_and_execute(const Action& intent, const Participant& self,
                                    std::uint32_t cycle);

  std::size_t cancel_orders(NodeId node) { return book_.cancel_by(node); }
  void expire_orders() { book_.clear(); }

  /// Appends everything recorded since the last commit as one block.
  /// Returns false when there was nothing to commit. Throws NoEmpoweredNode.
  bool commit_block();

  const OrderBook& book() const { return book_; }
  OrderBook& book_mut() { return book_; }
  const ledger::Ledger& trading_ledger() const { return ledger_; }
  const PricingWeights& weights() const { return weights_; }
  std::size_t uncommitted() const { return pending_.size(); }
  std::uint64_t next_order_id() const { return next_id_; }

 private:
  Order make_order(Side side, double kw, const Participant& self);

  trust::TrustNetwork& net_;
  PricingWeights weights_;
  MarketOptions options_;
  OrderBook book_;
  std::map<NodeId, Wallet> wallets_;
  ledger::Ledger ledger_{ledger::LedgerKind::trading};
  std::vector<ledger::EntryBody> pending_;
  std::uint64_t next_id_ = 1;
};

/// One JSON object per open order, ascending by id.
std::string dump_order_book(const OrderBook& book);

inline constexpr std::string_view kTradeCsvHeader =
    "cycle,buy_id,sell_id,kw,unit_price,buyer,seller,green,cross_neighborhood";
std::string trade_csv_row(const Trade& t);

/// Shortest round-trip decimal form, used for every CSV number.
std::string format_number(double v);

}  // namespace retina::market
