#pragma once

// Scenario engine: market cycles over a trust network, benchmarks against a
// flooding web-of-trust baseline, failure and adversary injection, and the
// communication-time accounting.

#include <array>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "retina/attestation.h"
#include "retina/market.h"
#include "retina/trustnet.h"

namespace retina::sim {

/// mt19937_64 with a fixed mapping to doubles, so draws match across
/// standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}
  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)); }
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
  }

 private:
  std::mt19937_64 eng_;
};

struct Range {
  double lo = 0.0;
  double hi = 0.0;
  bool operator==(const Range&) const = default;
};

struct SimConfig {
  std::uint32_t neighborhoods = 10;
  std::uint32_t nodes_per_neighborhood = 30;
  std::uint32_t empowered_per_neighborhood = 1;
  std::uint32_t market_cycles = 30;
  double buyer_fraction = 0.5;
  double seller_fraction = 0.5;
  market::PricingWeights weights;
  market::WeightBounds weight_bounds;
  double starting_price = 1.0;

  // Broker parameters, drawn uniformly per node.
  Range buyer_reserve{20, 40};
  Range seller_reserve{90, 130};
  Range buyer_production{1, 3};
  Range buyer_consumption{2, 4};
  Range seller_production{3, 6};
  Range seller_consumption{1, 2};
  Range low_threshold{15, 25};
  Range high_threshold{75, 85};
  double rate_jitter = 0.2;  ///< per-cycle relative deviation from the node's rates
  double initial_balance = 1000.0;
  double green_fraction = 0.5;
  double green_only_fraction = 0.0;
  double min_sell_price = 0.0;
  double max_buy_price = 1e9;

  std::uint64_t seed = 42;
  std::size_t chain_limit = 4;
  identity::SchemeId scheme = identity::SchemeId::ed25519;
  std::uint32_t attestation_period = 0;  ///< 0 disables sweeps
  double tamper_multiplier = 3.0;

  std::uint32_t total_nodes() const { return neighborhoods * nodes_per_neighborhood; }
  /// Throws ConfigInvalid naming the offending field.
  void validate() const;
  bool operator==(const SimConfig&) const = default;
};

/// "75-25" style buyer/seller percentages. Throws ConfigInvalid.
std::pair<double, double> parse_scenario(std::string_view s);

nlohmann::json to_json(const SimConfig& c);

struct CycleStats {
  std::uint32_t cycle = 0;
  double mean_price = 0.0;  ///< volume-weighted; 0 when nothing traded
  double volume = 0.0;
  std::size_t buys = 0;   ///< BUY intents acted on
  std::size_t sells = 0;  ///< SELL intents acted on
  std::size_t trades = 0;
};

inline constexpr std::string_view kPriceCsvHeader = "cycle,mean_price,volume,buys,sells";
std::string price_csv(std::span<const CycleStats> series);
/// Volume-weighted over all cycles.
double mean_clearing_price(std::span<const CycleStats> series);

struct Detection {
  NodeId node;
  std::uint32_t cycle = 0;
};

struct FailureReport {
  std::vector<std::pair<NeighborhoodId, NodeId>> promotions;
  std::vector<NeighborhoodId> empty_neighborhoods;
};

/// Marks targets offline and restores an authority in every neighborhood
/// that lost its last one. Throws UnknownNode for a missing target.
FailureReport inject_failure(trust::TrustNetwork& net, std::span<const NodeId> targets);

struct SimNode {
  NodeId id;
  NeighborhoodId neighborhood;
  bool buyer = false;
  bool green = false;
  double production_rate = 0.0;
  double consumption_rate = 0.0;
  double low_threshold = 0.0;
  double high_threshold = 0.0;
  market::Preferences prefs;
  std::deque<double> demand_history;
  bool tampered = false;
};

/// Builds the trust network of a SimConfig: empowered nodes first, then
/// every other node introduced by its neighborhood's authority, then one
/// round of ring maintenance.
trust::TrustNetwork build_network(const SimConfig& config);

class MarketSim {
 public:
  explicit MarketSim(SimConfig config);
  MarketSim(const MarketSim&) = delete;
  MarketSim& operator=(const MarketSim&) = delete;

  void step();
  void run();
  bool finished() const { return cycle_ >= config_.market_cycles; }
  std::uint32_t cycle() const { return cycle_; }

  FailureReport inject_failure(std::span<const NodeId> targets);
  /// Inflates the node's reported production and mutates its software state.
  void tamper(NodeId node);

  const SimConfig& config() const { return config_; }
  const trust::TrustNetwork& network() const { return net_; }
  trust::TrustNetwork& network_mut() { return net_; }
  const market::Marketplace& market() const { return market_; }
  market::Marketplace& market_mut() { return market_; }
  const std::vector<SimNode>& nodes() const { return nodes_; }
  const std::vector<CycleStats>& price_series() const { return series_; }
  const std::vector<market::Trade>& trades() const { return trades_; }
  const std::vector<Detection>& detections() const { return detections_; }
  std::size_t utility_fallback_count() const { return fallbacks_; }
  double utility_energy() const { return utility_kwh_; }
  double total_production() const { return produced_; }
  double total_consumption() const { return consumed_; }
  std::size_t rejected_intents() const { return rejected_; }
  std::size_t failed_settlements() const { return failed_settlements_; }

  std::string price_csv() const { return sim::price_csv(series_); }
  std::string trade_csv() const;

 private:
  SimConfig config_;
  Rng rng_;
  trust::TrustNetwork net_;
  market::Marketplace market_;
  std::vector<SimNode> nodes_;
  std::map<NodeId, std::size_t> index_;
  std::uint32_t cycle_ = 0;
  std::vector<CycleStats> series_;
  std::vector<market::Trade> trades_;
  std::vector<Detection> detections_;
  std::size_t fallbacks_ = 0;
  double utility_kwh_ = 0.0;
  double produced_ = 0.0;
  double consumed_ = 0.0;
  std::size_t rejected_ = 0;
  std::size_t failed_settlements_ = 0;
};

struct SimResult {
  std::vector<CycleStats> price_series;
  std::vector<market::Trade> trades;
  std::size_t utility_fallback_count = 0;
  std::string trust_ledger_jsonl;
  std::string trading_ledger_jsonl;
  Digest160 trust_head{};
  Digest160 trading_head{};
};

SimResult run_market_sim(const SimConfig& config);

struct AdversaryReport {
  std::vector<CycleStats> clean;
  std::vector<CycleStats> tampered;
  std::vector<Detection> detections;
  /// Trades made by a tampered node after the cycle it was revoked in.
  std::size_t trades_after_revocation = 0;
};

/// Runs the config twice with attestation sweeps (period forced to at least
/// 1): once clean, once with `tampered` nodes.
AdversaryReport run_adversary_scenario(const SimConfig& config, std::span<const NodeId> tampered);

// Flooding web-of-trust baseline.

struct WotMember {
  NodeId id;
  identity::KeyPair keys;
  std::string uid;
  identity::Certificate cert;
};

class WotNetwork {
 public:
  explicit WotNetwork(Date today) : today_(today) {}
  /// Adds a member without any exchanges (fixture construction).
  void seed_member(WotMember m);
  /// Floods: the newcomer and every member sign each other's certificate
  /// after checking its self-signature. Returns the number of exchanges.
  std::size_t join(WotMember newcomer);
  const WotMember* find(std::string_view key_id) const;
  std::size_t size() const { return members_.size(); }
  const std::vector<WotMember>& members() const { return members_; }

 private:
  Date today_;
  std::vector<WotMember> members_;
  std::map<std::string, std::size_t, std::less<>> by_key_;
  identity::KeyRegistry registry_;
};

struct JoinPoint {
  std::uint32_t n = 0;
  double retina_ms = 0.0;
  double wot_ms = 0.0;
  std::size_t retina_exchanges = 0;
  std::size_t wot_exchanges = 0;
};

struct BenchOptions {
  std::size_t repetitions = 5;
  std::size_t trials = 100;
  std::uint64_t seed = 42;
  identity::SchemeId scheme = identity::SchemeId::ed25519;
};

/// Throws InvalidArgument for sizes outside [2, 10000].
std::vector<JoinPoint> run_join_benchmark(std::span<const std::uint32_t> sizes,
                                          const BenchOptions& options = {});

struct TrustPoint {
  std::uint32_t n = 0;
  double retina_ms = 0.0;
  double wot_ms = 0.0;
  double mean_intermediates = 0.0;
  double mean_expanded = 0.0;
  std::size_t trials = 0;
  std::size_t failures = 0;  ///< pairs with no path within the chain limit
};

std::vector<TrustPoint> run_trust_benchmark(std::span<const std::uint32_t> sizes, bool decentralized,
                                            const BenchOptions& options = {});

inline constexpr std::string_view kJoinCsvHeader = "N,retina_ms,wot_ms,retina_exchanges,wot_exchanges";
inline constexpr std::string_view kTrustCsvHeader =
    "N,retina_ms,wot_ms,mean_intermediates,mean_expanded,trials,failures";
std::string join_csv(std::span<const JoinPoint> points);
std::string trust_csv(std::span<const TrustPoint> points);

// Communication time.

inline constexpr std::array<std::string_view, 5> kCtComponents = {
    "VerifyCertificate", "SignCertificate", "addNonce", "hashData", "addToDL"};

struct CtReport {
  std::vector<std::pair<std::string, double>> components;  ///< in kCtComponents order, ms
  double ct_total = 0.0;
  int cc_bits = ledger::consensus_message_bits();
};

/// ct_total = 2 * sum of the five components. Throws MissingComponent, or
/// InvalidArgument for an unknown name.
CtReport compute_ct(const std::map<std::string, double, std::less<>>& measured);

/// Median wall-clock of each component over `repetitions` runs on a small
/// live network.
CtReport measure_ct(std::size_t repetitions = 25,
                    identity::SchemeId scheme = identity::SchemeId::ed25519);

struct MetricsReport {
  std::optional<CtReport> ct;  ///< wall-clock, so left out of reproducible runs
  std::vector<JoinPoint> join_series;
  std::vector<TrustPoint> trust_delay_series;
  std::vector<CycleStats> price_series;
  std::size_t utility_fallback_count = 0;
};

nlohmann::json to_json(const MetricsReport& m);

}  // namespace retina::sim
