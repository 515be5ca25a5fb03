#include "retina/simulation.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>

namespace retina::sim {

using market::format_number;

namespace {

void require(bool ok, const std::string& field, const std::string& why) {
  if (!ok) throw Error(Errc::config_invalid, field + ": " + why);
}

void require_range(const Range& r, const std::string& field, bool positive = false) {
  require(std::isfinite(r.lo) && std::isfinite(r.hi) && r.lo <= r.hi, field, "needs lo <= hi");
  require(r.lo >= 0 && (!positive || r.lo > 0), field, positive ? "must be positive" : "must be non-negative");
}

std::uint64_t key_seed(std::uint64_t seed, NodeId id) { return seed * 1'000'003ULL + id.value; }

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

nlohmann::json range_json(const Range& r) { return nlohmann::json::array({r.lo, r.hi}); }

/// A ring of capacity n whose positions 0..occupants-1 are filled; node 1 is
/// the sole empowered node.
trust::TrustNetwork ring_network(std::uint32_t n, std::uint32_t occupants, const BenchOptions& o) {
  trust::TrustConfig tc;
  tc.scheme = o.scheme;
  trust::TrustNetwork net(n, tc);
  const NeighborhoodId hood{1};
  net.bootstrap_authority(net.prepare_candidate(NodeId{1}, hood, key_seed(o.seed, NodeId{1})));
  for (std::uint32_t v = 2; v <= occupants; ++v)
    net.join_node(net.prepare_candidate(NodeId{v}, hood, key_seed(o.seed, NodeId{v})), NodeId{1});
  for (std::uint32_t v = 1; v <= occupants; ++v) net.refresh_ring(NodeId{v});
  return net;
}

WotNetwork wot_from(const trust::TrustNetwork& net) {
  WotNetwork wot(net.today());
  for (NodeId id : net.node_ids()) {
    const auto& r = net.node(id);
    identity::Certificate self = r.cert;
    self.signatures.resize(1);
    wot.seed_member(WotMember{id, r.keys, r.uid, std::move(self)});
  }
  return wot;
}

}  // namespace

void SimConfig::validate() const {
  require(neighborhoods >= 1, "neighborhoods", "must be at least 1");
  require(nodes_per_neighborhood >= 1, "nodes_per_neighborhood", "must be at least 1");
  require(empowered_per_neighborhood >= 1, "empowered_per_neighborhood", "must be at least 1");
  require(empowered_per_neighborhood <= nodes_per_neighborhood, "empowered_per_neighborhood",
          "exceeds nodes_per_neighborhood");
  require(total_nodes() >= 2, "nodes_per_neighborhood", "network needs at least 2 nodes");
  require(market_cycles >= 1, "market_cycles", "must be at least 1");
  require(buyer_fraction >= 0 && seller_fraction >= 0, "scenario", "fractions must be non-negative");
  require(std::abs(buyer_fraction + seller_fraction - 1.0) < 1e-9, "scenario", "fractions must sum to 1");
  try {
    market::validate_weights(weights, weight_bounds);
  } catch (const Error& e) {
    throw Error(Errc::config_invalid, std::string("weights: ") + e.what());
  }
  require(starting_price > 0, "starting_price", "must be positive");
  require_range(buyer_reserve, "buyer_reserve");
  require_range(seller_reserve, "seller_reserve");
  require_range(buyer_production, "buyer_production");
  require_range(buyer_consumption, "buyer_consumption");
  require_range(seller_production, "seller_production");
  require_range(seller_consumption, "seller_consumption");
  require_range(low_threshold, "low_threshold");
  require_range(high_threshold, "high_threshold");
  require(low_threshold.hi < high_threshold.lo, "low_threshold", "must lie below high_threshold");
  require(rate_jitter >= 0 && rate_jitter < 1, "rate_jitter", "must be in [0, 1)");
  require(initial_balance >= 0, "initial_balance", "must be non-negative");
  require(green_fraction >= 0 && green_fraction <= 1, "green_fraction", "must be in [0, 1]");
  require(green_only_fraction >= 0 && green_only_fraction <= 1, "green_only_fraction", "must be in [0, 1]");
  require(min_sell_price >= 0, "min_sell_price", "must be non-negative");
  require(max_buy_price > 0, "max_buy_price", "must be positive");
  require(chain_limit >= 1, "chain_limit", "must be at least 1");
  require(tamper_multiplier >= 1, "tamper_multiplier", "must be at least 1");
}

std::pair<double, double> parse_scenario(std::string_view s) {
  const auto dash = s.find('-');
  int b = -1, sl = -1;
  if (dash != std::string_view::npos) {
    try {
      std::size_t used = 0;
      const std::string left(s.substr(0, dash)), right(s.substr(dash + 1));
      b = std::stoi(left, &used);
      if (used != left.size()) b = -1;
      sl = std::stoi(right, &used);
      if (used != right.size()) sl = -1;
    } catch (const std::exception&) {
      b = sl = -1;
    }
  }
  if (b < 0 || sl < 0 || b + sl != 100)
    throw Error(Errc::config_invalid, "scenario '" + std::string(s) +
                                          "' must be BUYERS-SELLERS percentages summing to 100");
  return {b / 100.0, sl / 100.0};
}

nlohmann::json to_json(const SimConfig& c) {
  return nlohmann::json{
      {"neighborhoods", c.neighborhoods},
      {"nodes_per_neighborhood", c.nodes_per_neighborhood},
      {"empowered_per_neighborhood", c.empowered_per_neighborhood},
      {"market_cycles", c.market_cycles},
      {"buyer_fraction", c.buyer_fraction},
      {"seller_fraction", c.seller_fraction},
      {"weights",
       {{"a", c.weights.a}, {"b", c.weights.b}, {"a_nongreen", c.weights.a_nongreen}, {"b_min", c.weights.b_min}}},
      {"weight_bounds", range_json({c.weight_bounds.lo, c.weight_bounds.hi})},
      {"starting_price", c.starting_price},
      {"buyer_reserve", range_json(c.buyer_reserve)},
      {"seller_reserve", range_json(c.seller_reserve)},
      {"buyer_production", range_json(c.buyer_production)},
      {"buyer_consumption", range_json(c.buyer_consumption)},
      {"seller_production", range_json(c.seller_production)},
      {"seller_consumption", range_json(c.seller_consumption)},
      {"low_threshold", range_json(c.low_threshold)},
      {"high_threshold", range_json(c.high_threshold)},
      {"rate_jitter", c.rate_jitter},
      {"initial_balance", c.initial_balance},
      {"green_fraction", c.green_fraction},
      {"green_only_fraction", c.green_only_fraction},
      {"min_sell_price", c.min_sell_price},
      {"max_buy_price", c.max_buy_price},
      {"seed", c.seed},
      {"chain_limit", c.chain_limit},
      {"scheme", identity::scheme_name(c.scheme)},
      {"attestation_period", c.attestation_period},
      {"tamper_multiplier", c.tamper_multiplier},
  };
}

std::string price_csv(std::span<const CycleStats> series) {
  std::string out(kPriceCsvHeader);
  out += "\n";
  for (const auto& s : series)
    out += std::to_string(s.cycle) + "," + format_number(s.mean_price) + "," + format_number(s.volume) +
           "," + std::to_string(s.buys) + "," + std::to_string(s.sells) + "\n";
  return out;
}

double mean_clearing_price(std::span<const CycleStats> series) {
  double value = 0, volume = 0;
  for (const auto& s : series) {
    value += s.mean_price * s.volume;
    volume += s.volume;
  }
  return volume > 0 ? value / volume : 0.0;
}

FailureReport inject_failure(trust::TrustNetwork& net, std::span<const NodeId> targets) {
  for (NodeId t : targets)
    if (!net.contains(t)) throw Error(Errc::unknown_node, "node " + std::to_string(t.value) + " is unknown");
  std::set<NeighborhoodId> hit;
  for (NodeId t : targets) {
    net.set_online(t, false);
    hit.insert(net.node(t).neighborhood);
  }
  FailureReport report;
  for (NeighborhoodId h : hit) {
    try {
      if (auto p = net.ensure_authority(h)) report.promotions.emplace_back(h, *p);
    } catch (const Error& e) {
      if (e.code() != Errc::neighborhood_empty) throw;
      report.empty_neighborhoods.push_back(h);
    }
  }
  return report;
}

trust::TrustNetwork build_network(const SimConfig& c) {
  trust::TrustConfig tc;
  tc.chain_limit = c.chain_limit;
  tc.scheme = c.scheme;
  trust::TrustNetwork net(c.total_nodes(), tc);
  auto hood_of = [&](std::uint32_t v) { return NeighborhoodId{(v - 1) / c.nodes_per_neighborhood + 1}; };
  auto rank_in_hood = [&](std::uint32_t v) { return (v - 1) % c.nodes_per_neighborhood; };

  for (std::uint32_t v = 1; v <= c.total_nodes(); ++v)
    if (rank_in_hood(v) < c.empowered_per_neighborhood)
      net.bootstrap_authority(net.prepare_candidate(NodeId{v}, hood_of(v), key_seed(c.seed, NodeId{v})));
  for (std::uint32_t v = 1; v <= c.total_nodes(); ++v) {
    if (rank_in_hood(v) < c.empowered_per_neighborhood) continue;
    const NodeId id{v};
    net.join_node(net.prepare_candidate(id, hood_of(v), key_seed(c.seed, id)),
                  net.find_introducer(hood_of(v)));
  }
  for (std::uint32_t v = 1; v <= c.total_nodes(); ++v) net.refresh_ring(NodeId{v});
  return net;
}

namespace {
SimConfig validated(SimConfig c) {
  c.validate();
  return c;
}
}  // namespace

MarketSim::MarketSim(SimConfig config)
    : config_(validated(std::move(config))),
      rng_(config_.seed),
      net_(build_network(config_)),
      market_(net_, config_.weights, market::MarketOptions{config_.starting_price, false, {}}) {
  std::vector<NodeId> ids = net_.node_ids();
  std::vector<NodeId> order = ids;
  rng_.shuffle(order);
  const auto buyers = static_cast<std::size_t>(std::llround(config_.buyer_fraction * ids.size()));
  std::set<NodeId> buyer_set(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(buyers));

  for (NodeId id : ids) {
    SimNode n;
    n.id = id;
    n.neighborhood = net_.node(id).neighborhood;
    n.buyer = buyer_set.count(id) != 0;
    const double reserve = rng_.uniform(n.buyer ? config_.buyer_reserve.lo : config_.seller_reserve.lo,
                                        n.buyer ? config_.buyer_reserve.hi : config_.seller_reserve.hi);
    const Range& prod = n.buyer ? config_.buyer_production : config_.seller_production;
    const Range& cons = n.buyer ? config_.buyer_consumption : config_.seller_consumption;
    n.production_rate = rng_.uniform(prod.lo, prod.hi);
    n.consumption_rate = rng_.uniform(cons.lo, cons.hi);
    n.low_threshold = rng_.uniform(config_.low_threshold.lo, config_.low_threshold.hi);
    n.high_threshold = rng_.uniform(config_.high_threshold.lo, config_.high_threshold.hi);
    n.green = rng_.uniform() < config_.green_fraction;
    n.prefs.green_only = rng_.uniform() < config_.green_only_fraction;
    n.prefs.min_sell_price = config_.min_sell_price;
    n.prefs.max_buy_price = config_.max_buy_price;
    index_[id] = nodes_.size();
    nodes_.push_back(std::move(n));
    market_.open_wallet(id, market::Wallet{reserve, config_.initial_balance});
  }
}

void MarketSim::tamper(NodeId node) {
  auto it = index_.find(node);
  if (it == index_.end()) throw Error(Errc::unknown_node, "node " + std::to_string(node.value) + " is unknown");
  nodes_[it->second].tampered = true;
  net_.set_software(node, attest::tampered(net_.node(node).software, 0));
}

FailureReport MarketSim::inject_failure(std::span<const NodeId> targets) {
  FailureReport report = sim::inject_failure(net_, targets);
  for (NodeId t : targets) market_.cancel_orders(t);
  return report;
}

void MarketSim::step() {
  if (finished()) return;
  const std::uint32_t cycle = ++cycle_;
  market_.expire_orders();

  // Production and consumption.
  for (auto& n : nodes_) {
    if (!net_.is_active(n.id)) continue;
    double prod = n.production_rate * (1.0 + config_.rate_jitter * rng_.uniform(-1.0, 1.0));
    const double cons = n.consumption_rate * (1.0 + config_.rate_jitter * rng_.uniform(-1.0, 1.0));
    if (n.tampered) prod *= config_.tamper_multiplier;
    market::Wallet& w = market_.wallet_mut(n.id);
    if (w.energy_kwh + prod < cons) {
      ++fallbacks_;
      utility_kwh_ += cons - w.energy_kwh - prod;
      w.energy_kwh = 0.0;
    } else {
      w.energy_kwh += prod - cons;
    }
    produced_ += prod;
    consumed_ += cons;
    n.demand_history.push_back((cons - prod) - (n.consumption_rate - n.production_rate));
    if (n.demand_history.size() > 3) n.demand_history.pop_front();
  }

  // Trading, in a fresh random order each cycle.
  std::vector<std::size_t> order(nodes_.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng_.shuffle(order);

  CycleStats stats;
  stats.cycle = cycle;
  double value = 0.0;
  for (std::size_t i : order) {
    const SimNode& n = nodes_[i];
    if (!net_.is_active(n.id) || !net_.is_trusted(n.id)) continue;
    market::BrokerState bs;
    bs.reserves = market_.wallet(n.id).energy_kwh;
    bs.low_threshold = n.low_threshold;
    bs.high_threshold = n.high_threshold;
    bs.production_rate = n.production_rate;
    bs.consumption_rate = n.consumption_rate;
    bs.demand_history = n.demand_history;
    market::Action act = market::broker_decide(bs);
    if (act.kind == market::ActionKind::hold) continue;
    if (act.kind == market::ActionKind::sell) {
      act.kw = std::min(act.kw, bs.reserves);
      ++stats.sells;
    } else {
      ++stats.buys;
    }
    if (!(act.kw > 1e-12)) continue;
    market::Participant p{n.id, n.neighborhood, n.green, n.prefs};
    try {
      const auto r = market_.match_and_execute(act, p, cycle);
      failed_settlements_ += r.failed_settlements;
      for (const auto& t : r.trades) {
        value += t.cost();
        stats.volume += t.kw;
        ++stats.trades;
        trades_.push_back(t);
      }
    } catch (const Error& e) {
      if (e.code() != Errc::untrusted_node && e.code() != Errc::insufficient_energy) throw;
      ++rejected_;
    }
  }
  stats.mean_price = stats.volume > 0 ? value / stats.volume : 0.0;
  series_.push_back(stats);
  market_.commit_block();

  if (config_.attestation_period > 0 && attest::SweepSchedule(config_.attestation_period).due(cycle)) {
    for (const auto& v : attest::attestation_sweep(net_)) {
      if (!v.revoked) continue;
      market_.cancel_orders(v.attestee);
      detections_.push_back(Detection{v.attestee, cycle});
    }
  }
}

void MarketSim::run() {
  while (!finished()) step();
}

std::string MarketSim::trade_csv() const {
  std::string out(market::kTradeCsvHeader);
  out += "\n";
  for (const auto& t : trades_) out += market::trade_csv_row(t) + "\n";
  return out;
}

SimResult run_market_sim(const SimConfig& config) {
  MarketSim sim(config);
  sim.run();
  SimResult r;
  r.price_series = sim.price_series();
  r.trades = sim.trades();
  r.utility_fallback_count = sim.utility_fallback_count();
  r.trust_ledger_jsonl = ledger::dump_jsonl(sim.network().trust_ledger());
  r.trading_ledger_jsonl = ledger::dump_jsonl(sim.market().trading_ledger());
  r.trust_head = sim.network().trust_ledger().head_digest();
  r.trading_head = sim.market().trading_ledger().head_digest();
  return r;
}

AdversaryReport run_adversary_scenario(const SimConfig& config, std::span<const NodeId> tampered) {
  SimConfig c = config;
  c.attestation_period = std::max<std::uint32_t>(1, c.attestation_period);
  AdversaryReport report;

  MarketSim clean(c);
  clean.run();
  report.clean = clean.price_series();

  MarketSim bad(c);
  for (NodeId t : tampered) bad.tamper(t);
  bad.run();
  report.tampered = bad.price_series();
  report.detections = bad.detections();
  for (const auto& d : report.detections)
    for (const auto& t : bad.trades())
      if (t.cycle > d.cycle && (t.buyer == d.node || t.seller == d.node)) ++report.trades_after_revocation;
  return report;
}

void WotNetwork::seed_member(WotMember m) {
  registry_.add(m.keys);
  by_key_[m.keys.key_id] = members_.size();
  members_.push_back(std::move(m));
}

std::size_t WotNetwork::join(WotMember newcomer) {
  registry_.add(newcomer.keys);
  const std::string fresh_body = identity::certificate_body(newcomer.cert);
  std::size_t exchanges = 0;
  for (auto& m : members_) {
    const std::string member_body = identity::certificate_body(m.cert);
    if (!identity::verify_bytes(registry_, newcomer.cert.signatures.front(), as_bytes(fresh_body)) ||
        !identity::verify_bytes(registry_, m.cert.signatures.front(), as_bytes(member_body)))
      throw Error(Errc::attestation_failed, "self-signature check failed during flooding");
    newcomer.cert = identity::sign_certificate(std::move(newcomer.cert), m.keys, m.uid, today_);
    m.cert = identity::sign_certificate(std::move(m.cert), newcomer.keys, newcomer.uid, today_);
    ++exchanges;
  }
  by_key_[newcomer.keys.key_id] = members_.size();
  members_.push_back(std::move(newcomer));
  return exchanges;
}

const WotMember* WotNetwork::find(std::string_view key_id) const {
  auto it = by_key_.find(key_id);
  return it == by_key_.end() ? nullptr : &members_[it->second];
}

std::vector<JoinPoint> run_join_benchmark(std::span<const std::uint32_t> sizes, const BenchOptions& o) {
  std::vector<JoinPoint> out;
  for (std::uint32_t n : sizes)
    if (n < 2 || n > 10000)
      throw Error(Errc::invalid_argument, "network size " + std::to_string(n) + " outside [2, 10000]");
  for (std::uint32_t n : sizes) {
    const trust::TrustNetwork base = ring_network(n, n - 1, o);
    const WotNetwork wot_base = wot_from(base);
    const NodeId fresh{n};
    const auto candidate = base.prepare_candidate(fresh, NeighborhoodId{1}, key_seed(o.seed, fresh));
    const WotMember wot_candidate{fresh, candidate.keys, candidate.uid, candidate.cert};

    JoinPoint p;
    p.n = n;
    std::vector<double> retina_t, wot_t;
    for (std::size_t rep = 0; rep < std::max<std::size_t>(1, o.repetitions); ++rep) {
      trust::TrustNetwork net = base;
      auto t0 = std::chrono::steady_clock::now();
      const auto report = net.join_node(candidate, NodeId{1});
      retina_t.push_back(elapsed_ms(t0));
      p.retina_exchanges = report.signature_exchanges();

      WotNetwork wot = wot_base;
      t0 = std::chrono::steady_clock::now();
      p.wot_exchanges = wot.join(wot_candidate);
      wot_t.push_back(elapsed_ms(t0));
    }
    p.retina_ms = median(retina_t);
    p.wot_ms = median(wot_t);
    out.push_back(p);
  }
  return out;
}

std::vector<TrustPoint> run_trust_benchmark(std::span<const std::uint32_t> sizes, bool decentralized,
                                            const BenchOptions& o) {
  if (sizes.empty()) throw Error(Errc::invalid_argument, "no network sizes given");
  for (std::uint32_t n : sizes)
    if (n < 3 || n > 10000)
      throw Error(Errc::invalid_argument, "network size " + std::to_string(n) + " outside [3, 10000]");
  std::vector<TrustPoint> out;
  const auto mode = decentralized ? trust::LookupMode::decentralized : trust::LookupMode::full_ledger;
  for (std::uint32_t n : sizes) {
    trust::TrustNetwork net = ring_network(n, n, o);
    const WotNetwork wot = wot_from(net);
    Rng rng(o.seed ^ (0x5bd1e995ULL * n));
    TrustPoint p;
    p.n = n;
    double retina_total = 0, wot_total = 0, inter = 0, expanded = 0;
    std::size_t attempts = 0;
    while (p.trials + p.failures < o.trials && attempts < 100 * o.trials) {
      ++attempts;
      const NodeId a{static_cast<std::uint32_t>(rng.below(n)) + 1};
      const NodeId b{static_cast<std::uint32_t>(rng.below(n)) + 1};
      if (a == b || net.has_edge(a, b)) continue;

      const auto& target = net.node(b);
      auto t0 = std::chrono::steady_clock::now();
      const WotMember* m = wot.find(target.keys.key_id);
      const bool ok = m && identity::verify_bytes(net.registry(), m->cert.signatures.front(),
                                                  as_bytes(identity::certificate_body(m->cert)));
      wot_total += elapsed_ms(t0);
      if (!ok) throw Error(Errc::certificate_not_found, "baseline keyring lookup failed");

      trust::LookupStats stats;
      t0 = std::chrono::steady_clock::now();
      try {
        const auto path = net.establish_trust(a, b, mode, &stats);
        retina_total += elapsed_ms(t0);
        inter += static_cast<double>(path.intermediates.size());
        expanded += static_cast<double>(stats.expanded);
        ++p.trials;
      } catch (const Error& e) {
        if (e.code() != Errc::no_trust_path) throw;
        ++p.failures;
      }
    }
    const double t = std::max<std::size_t>(1, p.trials);
    p.retina_ms = retina_total / t;
    p.wot_ms = wot_total / static_cast<double>(std::max<std::size_t>(1, p.trials + p.failures));
    p.mean_intermediates = inter / t;
    p.mean_expanded = expanded / t;
    out.push_back(p);
  }
  return out;
}

std::string join_csv(std::span<const JoinPoint> points) {
  std::string out(kJoinCsvHeader);
  out += "\n";
  for (const auto& p : points)
    out += std::to_string(p.n) + "," + format_number(p.retina_ms) + "," + format_number(p.wot_ms) + "," +
           std::to_string(p.retina_exchanges) + "," + std::to_string(p.wot_exchanges) + "\n";
  return out;
}

std::string trust_csv(std::span<const TrustPoint> points) {
  std::string out(kTrustCsvHeader);
  out += "\n";
  for (const auto& p : points)
    out += std::to_string(p.n) + "," + format_number(p.retina_ms) + "," + format_number(p.wot_ms) + "," +
           format_number(p.mean_intermediates) + "," + format_number(p.mean_expanded) + "," +
           std::to_string(p.trials) + "," + std::to_string(p.failures) + "\n";
  return out;
}

CtReport compute_ct(const std::map<std::string, double, std::less<>>& measured) {
  for (const auto& [name, v] : measured)
    if (std::find(kCtComponents.begin(), kCtComponents.end(), name) == kCtComponents.end())
      throw Error(Errc::invalid_argument, "unknown CT component '" + name + "'");
  CtReport r;
  double sum = 0.0;
  for (std::string_view name : kCtComponents) {
    auto it = measured.find(name);
    if (it == measured.end())
      throw Error(Errc::missing_component, "CT component '" + std::string(name) + "' missing");
    r.components.emplace_back(std::string(name), it->second);
    sum += it->second;
  }
  r.ct_total = 2.0 * sum;
  return r;
}

CtReport measure_ct(std::size_t repetitions, identity::SchemeId scheme) {
  BenchOptions o;
  o.scheme = scheme;
  trust::TrustNetwork net = ring_network(16, 16, o);
  const auto& a = net.node(NodeId{2});
  const auto& b = net.node(NodeId{3});
  std::vector<double> verify, sign, nonce, hash, add;
  ledger::Ledger dl(ledger::LedgerKind::trust);
  const NodeId validator{1};
  const auto check = net.validator_check();
  for (std::size_t i = 0; i < std::max<std::size_t>(1, repetitions); ++i) {
    auto t0 = std::chrono::steady_clock::now();
    const auto report = identity::verify_certificate(a.cert, net.registry(), net.today());
    verify.push_back(elapsed_ms(t0));
    if (!report.valid) throw Error(Errc::malformed_certificate, "fixture certificate does not verify");

    t0 = std::chrono::steady_clock::now();
    const auto signed_cert = identity::sign_certificate(
        identity::Certificate{a.cert.key_id, a.cert.created, a.cert.expires, a.cert.owner_uid,
                              {a.cert.signatures.front()}, false},
        b.keys, b.uid, net.today());
    sign.push_back(elapsed_ms(t0));
    if (signed_cert.signatures.size() != 2) throw Error(Errc::malformed_certificate, "signing fixture failed");

    const auto entry = ledger::LedgerEntry::make(ledger::TrustEstablished{a.id, b.id, net.today()});
    t0 = std::chrono::steady_clock::now();
    const std::uint32_t n = ledger::derive_nonce(std::span(&entry, 1));
    nonce.push_back(elapsed_ms(t0));

    ledger::BlockHeader h{validator.value, ledger::widen(dl.head_digest()), 1};
    t0 = std::chrono::steady_clock::now();
    const auto digest = ledger::hash_block(h, n);
    hash.push_back(elapsed_ms(t0));
    (void)digest;

    t0 = std::chrono::steady_clock::now();
    dl.append({entry.body}, validator, check);
    add.push_back(elapsed_ms(t0));
  }
  return compute_ct({{"VerifyCertificate", median(verify)},
                     {"SignCertificate", median(sign)},
                     {"addNonce", median(nonce)},
                     {"hashData", median(hash)},
                     {"addToDL", median(add)}});
}

nlohmann::json to_json(const MetricsReport& m) {
  nlohmann::json comps = nullptr, total = nullptr;
  if (m.ct) {
    comps = nlohmann::json::object();
    for (const auto& [name, v] : m.ct->components) comps[name] = v;
    total = m.ct->ct_total;
  }
  nlohmann::json join = nlohmann::json::array(), trust = nlohmann::json::array(),
                 prices = nlohmann::json::array();
  for (const auto& p : m.join_series)
    join.push_back({{"n", p.n}, {"retina_ms", p.retina_ms}, {"wot_ms", p.wot_ms},
                    {"retina_exchanges", p.retina_exchanges}, {"wot_exchanges", p.wot_exchanges}});
  for (const auto& p : m.trust_delay_series)
    trust.push_back({{"n", p.n}, {"retina_ms", p.retina_ms}, {"wot_ms", p.wot_ms},
                     {"mean_intermediates", p.mean_intermediates}, {"trials", p.trials},
                     {"failures", p.failures}});
  for (const auto& s : m.price_series)
    prices.push_back({{"cycle", s.cycle}, {"mean_price", s.mean_price}, {"volume", s.volume},
                      {"buys", s.buys}, {"sells", s.sells}});
  return nlohmann::json{{"ct_components", comps},
                        {"ct_total", total},
                        {"cc_bits", ledger::consensus_message_bits()},
                        {"join_series", join},
                        {"trust_delay_series", trust},
                        {"price_series", prices},
                        {"utility_fallback_count", m.utility_fallback_count}};
}

}  // namespace retina::sim
