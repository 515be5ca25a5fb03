#include "retina/market.h"

#include <charconv>
#include <cmath>

#include "retina/codec.h"

namespace retina::market {

void validate_weights(const PricingWeights& w, WeightBounds bounds) {
  auto in_range = [&](double v) { return v >= bounds.lo && v <= bounds.hi; };
  if (!in_range(w.a) || !in_range(w.b))
    throw Error(Errc::config_invalid, "pricing weights a=" + format_number(w.a) + " b=" +
                                          format_number(w.b) + " outside [" +
                                          format_number(bounds.lo) + ", " +
                                          format_number(bounds.hi) + "]");
  if (w.a_nongreen < 0 || w.b_min < 0)
    throw Error(Errc::config_invalid, "a_nongreen and b_min must be non-negative");
}

double price(double starting_price, double a, double b) {
  if (!(starting_price > 0))
    throw Error(Errc::nonpositive_price, "starting price must be positive");
  return starting_price + a * starting_price + b * starting_price;
}

double pair_price(double starting_price, bool green, bool same_neighborhood, const PricingWeights& w) {
  const double base = starting_price * (1.0 + (green ? w.a : w.a_nongreen));
  return base + base * (same_neighborhood ? w.b_min : w.b);
}

double effective_price(const Order& order, NeighborhoodId counterparty_neighborhood,
                       const PricingWeights& w) {
  return pair_price(order.starting_price, order.green, order.neighborhood == counterparty_neighborhood, w);
}

double forecast(const std::deque<double>& history) {
  if (history.empty()) return 0.0;
  const std::size_t n = std::min<std::size_t>(3, history.size());
  double sum = 0.0;
  for (std::size_t i = history.size() - n; i < history.size(); ++i) sum += history[i];
  return sum / static_cast<double>(n);
}

Action broker_decide(const BrokerState& s, std::optional<Action> manual_override) {
  if (manual_override) return *manual_override;
  const double projected =
      s.reserves + s.production_rate - s.consumption_rate - forecast(s.demand_history);
  if (projected > s.high_threshold) return Action::sell(projected - s.high_threshold);
  if (projected < s.low_threshold) return Action::buy(s.low_threshold - projected);
  return Action::hold();
}

void OrderBook::add(const Order& o) {
  if (!(o.kw > 0)) throw Error(Errc::invalid_argument, "order quantity must be positive");
  if (!orders_.emplace(o.order_id, o).second)
    throw Error(Errc::invalid_argument, "duplicate order id " + std::to_string(o.order_id));
}

const Order& OrderBook::get(std::uint64_t order_id) const {
  auto it = orders_.find(order_id);
  if (it == orders_.end())
    throw Error(Errc::invalid_argument, "no open order " + std::to_string(order_id));
  return it->second;
}

void OrderBook::fill(std::uint64_t order_id, double kw) {
  auto it = orders_.find(order_id);
  if (it == orders_.end())
    throw Error(Errc::invalid_argument, "no open order " + std::to_string(order_id));
  it->second.kw -= kw;
  if (it->second.kw <= 1e-12) orders_.erase(it);
}

std::size_t OrderBook::cancel_by(NodeId originator) {
  return std::erase_if(orders_, [&](const auto& kv) { return kv.second.originator == originator; });
}

std::vector<Order> OrderBook::snapshot() const {
  std::vector<Order> out;
  out.reserve(orders_.size());
  for (const auto& [id, o] : orders_) out.push_back(o);
  return out;
}

std::optional<Quote> select_counterparty(const OrderBook& book, ActionKind intent,
                                         const Participant& self, const PricingWeights& w,
                                         const std::function<bool(const Order&)>& skip) {
  if (intent == ActionKind::hold) return std::nullopt;
  const Side wanted = intent == ActionKind::sell ? Side::buy : Side::sell;
  std::optional<Quote> best;
  for (const auto& [id, o] : book.orders()) {
    if (o.side != wanted || o.originator == self.id) continue;
    if (skip && skip(o)) continue;
    const bool same = o.neighborhood == self.neighborhood;
    double p;
    if (intent == ActionKind::sell) {
      if (o.green && !self.green_energy) continue;  // buyer takes green energy only
      p = pair_price(o.starting_price, self.green_energy, same, w);
      if (!best || p > best->unit_price) best = Quote{id, p};
    } else {
      if (self.prefs.green_only && !o.green) continue;
      p = pair_price(o.starting_price, o.green, same, w);
      if (!best || p < best->unit_price) best = Quote{id, p};
    }
  }
  return best;
}

void settle(const Trade& trade, Wallet& buyer, Wallet& seller, std::vector<ledger::EntryBody>& log,
            bool allow_credit) {
  if (!(trade.kw > 0)) throw Error(Errc::invalid_argument, "trade quantity must be positive");
  if (seller.energy_kwh < trade.kw)
    throw Error(Errc::insufficient_energy, "seller " + std::to_string(trade.seller.value) +
                                               " holds " + format_number(seller.energy_kwh) +
                                               " kWh, trade needs " + format_number(trade.kw));
  const double cost = trade.cost();
  if (!allow_credit && buyer.balance < cost)
    throw Error(Errc::insufficient_funds, "buyer " + std::to_string(trade.buyer.value) +
                                              " balance " + format_number(buyer.balance) +
                                              " below cost " + format_number(cost));
  Wallet b = buyer, s = seller;
  b.energy_kwh += trade.kw;
  s.energy_kwh -= trade.kw;
  b.balance -= cost;
  s.balance += cost;
  log.push_back(ledger::TradeSettled{trade, b, s});
  buyer = b;
  seller = s;
}

double ExecutionResult::traded_kw() const {
  double kw = 0;
  for (const auto& t : trades) kw += t.kw;
  return kw;
}

Marketplace::Marketplace(trust::TrustNetwork& net, PricingWeights weights, MarketOptions options)
    : net_(net), weights_(weights), options_(std::move(options)) {
  if (!(options_.starting_price > 0))
    throw Error(Errc::nonpositive_price, "starting price must be positive");
}

void Marketplace::open_wallet(NodeId node, Wallet w) {
  if (w.energy_kwh < 0) throw Error(Errc::invalid_argument, "wallet energy must be non-negative");
  wallets_[node] = w;
}

const Wallet& Marketplace::wallet(NodeId node) const {
  auto it = wallets_.find(node);
  if (it == wallets_.end())
    throw Error(Errc::unknown_node, "no wallet for node " + std::to_string(node.value));
  return it->second;
}

Wallet& Marketplace::wallet_mut(NodeId node) { return const_cast<Wallet&>(wallet(node)); }

Order Marketplace::make_order(Side side, double kw, const Participant& self) {
  Order o;
  o.order_id = next_id_++;
  o.side = side;
  o.kw = kw;
  o.green = side == Side::sell ? self.green_energy : self.prefs.green_only;
  o.neighborhood = self.neighborhood;
  o.starting_price = options_.starting_price;
  o.originator = self.id;
  const auto& rec = net_.node(self.id);
  const Bytes msg = order_signing_bytes(o);
  o.signature = identity::sign_bytes(rec.keys, rec.uid, net_.today(), msg);
  if (!identity::verify_bytes(net_.registry(), o.signature, msg))
    throw Error(Errc::untrusted_node, "order signature of node " + std::to_string(self.id.value) +
                                          " does not verify");
  return o;
}

ExecutionResult Marketplace::match_and_execute(const Action& intent, const Participant& self,
                                               std::uint32_t cycle) {
  if (intent.kind == ActionKind::hold || !(intent.kw > 0))
    throw Error(Errc::invalid_argument, "intent must be a positive BUY or SELL");
  if (!net_.is_active(self.id) || !net_.is_trusted(self.id))
    throw Error(Errc::untrusted_node, "node " + std::to_string(self.id.value) +
                                          " holds no valid endorsed certificate");
  Wallet& mine = wallet_mut(self.id);
  const bool selling = intent.kind == ActionKind::sell;
  if (selling && mine.energy_kwh < intent.kw)
    throw Error(Errc::insufficient_energy, "node " + std::to_string(self.id.value) + " cannot sell " +
                                               format_number(intent.kw) + " kWh");

  ExecutionResult result;
  double remaining = intent.kw;
  std::vector<std::uint64_t> failed;
  auto skip = [&](const Order& o) {
    if (std::find(failed.begin(), failed.end(), o.order_id) != failed.end()) return true;
    return !net_.is_active(o.originator) || !net_.is_trusted(o.originator);
  };

  while (remaining > 1e-12) {
    const auto q = select_counterparty(book_, intent.kind, self, weights_, skip);
    if (!q) break;
    if (selling ? q->unit_price < self.prefs.min_sell_price : q->unit_price > self.prefs.max_buy_price)
      break;
    const Order& other = book_.get(q->order_id);
    double kw = std::min(remaining, other.kw);
    if (!selling && !options_.allow_credit) kw = std::min(kw, mine.balance / q->unit_price);
    if (!(kw > 1e-12)) break;

    Trade t;
    t.buy_order_id = selling ? other.order_id : 0;
    t.sell_order_id = selling ? 0 : other.order_id;
    t.kw = kw;
    t.unit_price = q->unit_price;
    t.cycle = cycle;
    t.buyer = selling ? other.originator : self.id;
    t.seller = selling ? self.id : other.originator;
    t.green = selling ? self.green_energy : other.green;
    t.cross_neighborhood = other.neighborhood != self.neighborhood;
    // The aggressor's side of the trade is recorded as an order of its own.
    Order own = make_order(selling ? Side::sell : Side::buy, kw, self);
    (selling ? t.sell_order_id : t.buy_order_id) = own.order_id;

    try {
      if (options_.fault && options_.fault(t))
        throw Error(Errc::insufficient_funds, "injected settlement fault");
      std::vector<ledger::EntryBody> entries{ledger::OrderPlaced{own}};
      settle(t, wallet_mut(t.buyer), wallet_mut(t.seller), entries, options_.allow_credit);
      for (auto& e : entries) pending_.push_back(std::move(e));
    } catch (const Error& e) {
      if (e.code() != Errc::insufficient_funds && e.code() != Errc::insufficient_energy) throw;
      ++result.failed_settlements;
      failed.push_back(other.order_id);
      continue;
    }
    book_.fill(other.order_id, kw);
    remaining -= kw;
    result.trades.push_back(t);
  }

  if (remaining > 1e-12 && (selling || options_.allow_credit || mine.balance > 0)) {
    Order o = make_order(selling ? Side::sell : Side::buy, remaining, self);
    book_.add(o);
    pending_.push_back(ledger::OrderPlaced{o});
    result.placed = o;
  }
  return result;
}

bool Marketplace::commit_block() {
  if (pending_.empty()) return false;
  const auto v = net_.pick_validator();
  if (!v) throw Error(Errc::no_empowered_node, "no active empowered node to validate the trading block");
  ledger_.append(std::move(pending_), *v, net_.validator_check());
  pending_.clear();
  return true;
}

std::string dump_order_book(const OrderBook& book) {
  std::string out;
  for (const auto& [id, o] : book.orders()) out += codec::to_json(o).dump() + "\n";
  return out;
}

std::string format_number(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

std::string trade_csv_row(const Trade& t) {
  return std::to_string(t.cycle) + "," + std::to_string(t.buy_order_id) + "," +
         std::to_string(t.sell_order_id) + "," + format_number(t.kw) + "," +
         format_number(t.unit_price) + "," + std::to_string(t.buyer.value) + "," +
         std::to_string(t.seller.value) + "," + (t.green ? "1" : "0") + "," +
         (t.cross_neighborhood ? "1" : "0");
}

}  // namespace retina::market
