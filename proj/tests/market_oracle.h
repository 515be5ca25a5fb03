#pragma once

#include <optional>
#include <random>
#include <vector>

#include "retina/market.h"

namespace oracle {

using retina::NeighborhoodId;
using retina::NodeId;
using namespace retina::market;

/// Unit price written out from the definition: green weight folded into the
/// base, proximity weight applied to the base.
inline double unit_price(double sp, bool green, bool same, const PricingWeights& w) {
  const double base = sp * (1.0 + (green ? w.a : w.a_nongreen));
  return base + base * (same ? w.b_min : w.b);
}

/// Brute-force best counterparty: scans every order, keeps the best price and
/// the lowest order id among equals.
inline std::optional<Quote> best_counterparty(const std::vector<Order>& book, ActionKind intent,
                                              const Participant& self, const PricingWeights& w) {
  std::vector<Quote> eligible;
  for (const Order& o : book) {
    if (o.originator == self.id) continue;
    if (intent == ActionKind::sell) {
      if (o.side != Side::buy || (o.green && !self.green_energy)) continue;
      eligible.push_back({o.order_id, unit_price(o.starting_price, self.green_energy,
                                                 o.neighborhood == self.neighborhood, w)});
    } else {
      if (o.side != Side::sell || (self.prefs.green_only && !o.green)) continue;
      eligible.push_back(
          {o.order_id, unit_price(o.starting_price, o.green, o.neighborhood == self.neighborhood, w)});
    }
  }
  if (eligible.empty()) return std::nullopt;
  Quote best = eligible[0];
  for (const Quote& q : eligible) {
    const bool better = intent == ActionKind::sell ? q.unit_price > best.unit_price
                                                   : q.unit_price < best.unit_price;
    const bool tie = q.unit_price == best.unit_price && q.order_id < best.order_id;
    if (better || tie) best = q;
  }
  return best;
}

/// Random book of up to `max_orders` orders from originators 2..max_node.
/// Prices come from a small grid so ties are common.
inline std::vector<Order> random_book(std::mt19937_64& rng, std::size_t max_orders,
                                      std::uint32_t max_node, std::uint32_t per_hood) {
  std::uniform_int_distribution<std::size_t> count(0, max_orders);
  std::uniform_int_distribution<std::uint32_t> node(2, max_node);
  std::uniform_int_distribution<int> coin(0, 1), grid(0, 4);
  std::uniform_real_distribution<double> kw(0.5, 10.0);
  std::vector<Order> out;
  const std::size_t n = count(rng);
  for (std::size_t i = 0; i < n; ++i) {
    Order o;
    o.order_id = 1'000'000 + i * 3 + coin(rng);
    o.side = coin(rng) ? Side::buy : Side::sell;
    o.kw = kw(rng);
    o.green = coin(rng);
    o.originator = NodeId{node(rng)};
    o.neighborhood = NeighborhoodId{(o.originator.value - 1) / per_hood + 1};
    o.starting_price = 1.0 + 0.05 * grid(rng);
    out.push_back(o);
  }
  return out;
}

}  // namespace oracle
