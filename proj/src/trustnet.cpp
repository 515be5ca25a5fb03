#include "retina/trustnet.h"

#include <algorithm>
#include <bit>
#include <deque>
#include <unordered_map>

namespace retina::trust {

using ledger::EntryBody;
using ledger::NodeJoined;
using ledger::TrustEstablished;
using ledger::TrustRevoked;

std::vector<std::uint32_t> neighbor_positions(std::uint32_t p, std::uint32_t n) {
  if (n < 2) throw Error(Errc::network_too_small, "ring needs at least 2 positions");
  if (p >= n) throw Error(Errc::invalid_argument, "position outside the ring");
  const int max_x = std::bit_width(n) - 1;  // floor(log2 n)
  std::vector<std::uint32_t> out;
  for (int x = 0; x <= max_x; ++x) {
    auto q = static_cast<std::uint32_t>((std::uint64_t(p) + (std::uint64_t(1) << x)) % n);
    if (q != p) out.push_back(q);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::string default_uid(NodeId id) {
  const auto n = std::to_string(id.value);
  return "Node " + n + " <node" + n + "@retina.org>";
}

TrustNetwork::TrustNetwork(std::uint32_t capacity, TrustConfig config, attest::SoftwareState approved)
    : capacity_(capacity),
      config_(config),
      approved_digest_(attest::compute_attestation_hash(approved)),
      today_(config.start_date) {
  if (capacity < 2) throw Error(Errc::network_too_small, "ring needs at least 2 positions");
}

NodeRecord TrustNetwork::prepare_candidate(NodeId id, NeighborhoodId neighborhood,
                                           std::uint64_t key_seed,
                                           attest::SoftwareState software) const {
  NodeRecord r;
  r.id = id;
  r.neighborhood = neighborhood;
  r.uid = default_uid(id);
  r.keys = identity::generate_keypair(key_seed, config_.scheme);
  r.cert = identity::self_sign(r.keys, r.uid, today_, today_.plus_days(config_.validity_days));
  r.software = std::move(software);
  return r;
}

void TrustNetwork::check_capacity(NodeId id) const {
  if (id.value < 1 || id.value > capacity_)
    throw Error(Errc::invalid_argument,
                "node id " + std::to_string(id.value) + " outside [1, " + std::to_string(capacity_) + "]");
}

void TrustNetwork::admit(NodeRecord& c) const {
  const auto& cert = c.cert;
  if (cert.key_id != c.keys.key_id || cert.signatures.size() != 1 ||
      cert.signatures.front().signer_key_id != c.keys.key_id || cert.revoked)
    throw Error(Errc::invalid_argument, "candidate must present a fresh self-signed certificate");
  const auto body = identity::certificate_body(cert);
  if (!identity::scheme(c.keys.scheme)
           .verify(c.keys.public_key, as_bytes(body), cert.signatures.front().sig_bytes))
    throw Error(Errc::invalid_argument, "candidate self-signature does not verify");
  if (const auto* known = registry_.find(c.keys.key_id); known && !(*known == c.keys.public_part()))
    throw Error(Errc::invalid_argument, "key id collision on " + c.keys.key_id);

  bool attested = false;
  try {
    attested = attest::compute_attestation_hash(c.software) == approved_digest_;
  } catch (const Error&) {
    attested = false;
  }
  if (!attested)
    throw Error(Errc::attestation_failed,
                "node " + std::to_string(c.id.value) + " failed remote attestation");
}

JoinReport TrustNetwork::bootstrap_authority(NodeRecord candidate) {
  check_capacity(candidate.id);
  if (contains(candidate.id))
    throw Error(Errc::node_exists, "node " + std::to_string(candidate.id.value) + " already joined");
  admit(candidate);

  candidate.role = Role::empowered;
  candidate.ledger_scope = LedgerScope::full;
  candidate.online = true;
  const NodeId id = candidate.id;
  registry_.add(candidate.keys);
  const auto peers_before = validators();
  nodes_.emplace(id, std::move(candidate));
  adjacency_[id];

  JoinReport report;
  NodeRecord& self = at(id);
  std::vector<EntryBody> entries{NodeJoined{id, self.keys.key_id, self.neighborhood, today_}};
  for (NodeId v : peers_before) {
    if (exchange(self, at(v))) entries.push_back(TrustEstablished{id, v, today_});
    report.peers.push_back(v);
  }
  report.cert = self.cert;
  log(std::move(entries), id);
  return report;
}

JoinReport TrustNetwork::join_node(NodeRecord candidate, NodeId introducer) {
  check_capacity(candidate.id);
  const NodeId id = candidate.id;
  if (auto it = nodes_.find(id); it != nodes_.end()) {
    const auto& old = it->second;
    if (!old.revoked() && !old.cert.expired_on(today_))
      throw Error(Errc::node_exists, "node " + std::to_string(id.value) + " already holds a valid certificate");
  }
  if (!is_validator(introducer))
    throw Error(Errc::no_empowered_node,
                "introducer " + std::to_string(introducer.value) + " is not an active empowered node");
  admit(candidate);

  if (contains(id)) retire(id);

  const NodeRecord& intro = node(introducer);
  candidate.cert = identity::sign_certificate(std::move(candidate.cert), intro.keys, intro.uid, today_);
  candidate.role = Role::simple;
  candidate.ledger_scope = LedgerScope::partial;
  candidate.online = true;
  registry_.add(candidate.keys);
  nodes_.insert_or_assign(id, std::move(candidate));
  adjacency_[id];

  JoinReport report;
  NodeRecord& self = at(id);
  std::vector<EntryBody> entries{NodeJoined{id, self.keys.key_id, self.neighborhood, today_}};
  for (std::uint32_t pos : neighbor_positions(id.position(), capacity_)) {
    const NodeId peer = NodeId::at_position(pos);
    if (!contains(peer) || !is_active(peer)) continue;
    if (exchange(self, at(peer))) entries.push_back(TrustEstablished{id, peer, today_});
    report.peers.push_back(peer);
  }
  report.cert = self.cert;
  log(std::move(entries), introducer);
  return report;
}

NodeId TrustNetwork::find_introducer(NeighborhoodId neighborhood) const {
  for (const auto& [id, r] : nodes_)
    if (r.neighborhood == neighborhood && is_validator(id)) return id;
  throw Error(Errc::no_empowered_node,
              "no online empowered node in neighborhood " + std::to_string(neighborhood.value));
}

RejoinOutcome TrustNetwork::rejoin_node(NodeId id) {
  if (!contains(id)) throw Error(Errc::unknown_node, "node " + std::to_string(id.value) + " never joined");
  NodeRecord& r = at(id);
  if (r.revoked() || r.cert.expired_on(today_)) return RejoinOutcome::must_rejoin_fresh;
  r.online = true;
  return RejoinOutcome::resumed_with_existing_cert;
}

bool TrustNetwork::endorse_mutually(NodeId a, NodeId b) {
  for (NodeId id : {a, b}) {
    const auto& r = node(id);
    if (r.revoked()) throw Error(Errc::node_revoked, "node " + std::to_string(id.value) + " is revoked");
    if (!r.online) throw Error(Errc::node_offline, "node " + std::to_string(id.value) + " is offline");
  }
  if (a == b) throw Error(Errc::invalid_argument, "a node cannot endorse itself");
  if (has_edge(a, b)) return false;
  exchange(at(a), at(b));
  log({TrustEstablished{a, b, today_}}, pick_validator(node(a).neighborhood));
  return true;
}

std::size_t TrustNetwork::refresh_ring(NodeId id) {
  if (!is_active(id)) return 0;
  std::vector<EntryBody> entries;
  NodeRecord& self = at(id);
  for (std::uint32_t pos : neighbor_positions(id.position(), capacity_)) {
    const NodeId peer = NodeId::at_position(pos);
    if (!contains(peer) || !is_active(peer) || has_edge(id, peer)) continue;
    if (exchange(self, at(peer))) entries.push_back(TrustEstablished{id, peer, today_});
  }
  const std::size_t added = entries.size();
  if (added) log(std::move(entries), pick_validator(self.neighborhood));
  return added;
}

TrustPath TrustNetwork::establish_trust(NodeId a, NodeId b, LookupMode mode, LookupStats* stats) {
  for (NodeId id : {a, b}) {
    const auto& r = node(id);
    if (r.revoked()) throw Error(Errc::node_revoked, "node " + std::to_string(id.value) + " is revoked");
    if (!r.online) throw Error(Errc::node_offline, "node " + std::to_string(id.value) + " is offline");
  }
  if (a == b || has_edge(a, b)) return TrustPath{a, b, {}};

  TrustPath path = certificate_lookup(a, b, mode, stats);
  exchange(at(a), at(b));
  log({TrustEstablished{a, b, today_}}, pick_validator(node(a).neighborhood));
  return path;
}

TrustPath TrustNetwork::certificate_lookup(NodeId a, NodeId target, LookupMode mode,
                                           LookupStats* stats) const {
  if (!contains(a)) throw Error(Errc::unknown_node, "node " + std::to_string(a.value) + " is unknown");
  if (!contains(target) || node(target).revoked())
    throw Error(Errc::certificate_not_found,
                "no live certificate for node " + std::to_string(target.value));
  if (a == target) return TrustPath{a, target, {}};

  // parent[v] = predecessor on the lexicographically first shortest path.
  std::unordered_map<NodeId, NodeId> parent;
  std::unordered_map<NodeId, std::size_t> depth;
  std::deque<NodeId> queue{a};
  depth[a] = 0;
  const std::size_t max_edges = config_.chain_limit + 1;

  auto eligible_intermediate = [&](NodeId v) {
    const auto& r = node(v);
    if (r.revoked()) return false;
    return mode == LookupMode::full_ledger || !r.empowered();
  };

  while (!queue.empty()) {
    const NodeId u = queue.front();
    queue.pop_front();
    const std::size_t d = depth[u];
    if (d >= max_edges) continue;
    if (u != a && !eligible_intermediate(u)) continue;
    if (stats) ++stats->expanded;
    for (NodeId v : neighbors(u)) {
      if (depth.count(v)) continue;
      depth[v] = d + 1;
      parent[v] = u;
      if (v == target) {
        TrustPath path{a, target, {}};
        for (NodeId w = parent[target]; w != a; w = parent[w]) path.intermediates.push_back(w);
        std::reverse(path.intermediates.begin(), path.intermediates.end());
        return path;
      }
      queue.push_back(v);
    }
  }
  throw Error(Errc::no_trust_path, "no trust path from " + std::to_string(a.value) + " to " +
                                       std::to_string(target.value) + " within " +
                                       std::to_string(config_.chain_limit) + " intermediates");
}

RevocationReport TrustNetwork::revoke_certificate(NodeId victim, ledger::RevocationReason reason) {
  if (!contains(victim))
    throw Error(Errc::unknown_node, "node " + std::to_string(victim.value) + " is unknown");
  RevocationReport report{victim, {}, {}};
  NodeRecord& v = at(victim);
  if (v.revoked()) return report;

  const std::string key = v.keys.key_id;
  for (auto& [id, r] : nodes_) {
    if (id == victim) continue;
    auto& sigs = r.cert.signatures;
    const auto before = sigs.size();
    std::erase_if(sigs, [&](const identity::Signature& s) { return s.signer_key_id == key; });
    if (sigs.size() != before) report.stripped_certificates.push_back(id);
  }
  for (NodeId n : adjacency_[victim]) {
    adjacency_[n].erase(victim);
    report.severed_edges.push_back(n);
  }
  adjacency_[victim].clear();
  v.cert.revoked = true;
  log({TrustRevoked{victim, reason, today_}}, pick_validator(v.neighborhood));
  return report;
}

NodeId TrustNetwork::promote_node(NeighborhoodId neighborhood) {
  std::optional<NodeId> best;
  std::size_t best_score = 0;
  for (const auto& [id, r] : nodes_) {
    if (r.neighborhood != neighborhood) continue;
    if (is_validator(id))
      throw Error(Errc::neighborhood_has_authority,
                  "neighborhood " + std::to_string(neighborhood.value) + " still has an empowered node");
    if (!is_active(id) || r.empowered()) continue;
    const std::size_t score =
        identity::verify_certificate(r.cert, registry_, today_).valid_endorsements();
    if (!best || score > best_score) {
      best = id;
      best_score = score;
    }
  }
  if (!best)
    throw Error(Errc::neighborhood_empty,
                "no online node left to promote in neighborhood " + std::to_string(neighborhood.value));
  NodeRecord& r = at(*best);
  r.role = Role::empowered;
  r.ledger_scope = LedgerScope::full;
  ++promotions_;
  if (std::any_of(nodes_.begin(), nodes_.end(),
                  [&](const auto& kv) { return kv.first != *best && is_validator(kv.first); }))
    ++sync_pulls_;
  if (!pending_.empty()) log({}, *best);
  return *best;
}

std::optional<NodeId> TrustNetwork::ensure_authority(NeighborhoodId neighborhood) {
  for (const auto& [id, r] : nodes_)
    if (r.neighborhood == neighborhood && is_validator(id)) return std::nullopt;
  return promote_node(neighborhood);
}

void TrustNetwork::set_online(NodeId id, bool online) { at(id).online = online; }

void TrustNetwork::set_software(NodeId id, attest::SoftwareState software) {
  at(id).software = std::move(software);
}

const NodeRecord& TrustNetwork::node(NodeId id) const {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw Error(Errc::unknown_node, "node " + std::to_string(id.value) + " is unknown");
  return it->second;
}

NodeRecord& TrustNetwork::at(NodeId id) { return const_cast<NodeRecord&>(node(id)); }

std::vector<NodeId> TrustNetwork::node_ids() const {
  std::vector<NodeId> out;
  out.reserve(nodes_.size());
  for (const auto& kv : nodes_) out.push_back(kv.first);
  return out;
}

std::vector<NodeId> TrustNetwork::members(NeighborhoodId neighborhood) const {
  std::vector<NodeId> out;
  for (const auto& [id, r] : nodes_)
    if (r.neighborhood == neighborhood) out.push_back(id);
  return out;
}

std::vector<NeighborhoodId> TrustNetwork::neighborhoods() const {
  std::set<NeighborhoodId> s;
  for (const auto& kv : nodes_) s.insert(kv.second.neighborhood);
  return {s.begin(), s.end()};
}

bool TrustNetwork::has_edge(NodeId a, NodeId b) const {
  auto it = adjacency_.find(a);
  return it != adjacency_.end() && it->second.count(b) != 0;
}

const std::set<NodeId>& TrustNetwork::neighbors(NodeId id) const {
  static const std::set<NodeId> none;
  auto it = adjacency_.find(id);
  return it == adjacency_.end() ? none : it->second;
}

std::vector<std::pair<NodeId, NodeId>> TrustNetwork::edges() const {
  std::vector<std::pair<NodeId, NodeId>> out;
  for (const auto& [a, ns] : adjacency_)
    for (NodeId b : ns)
      if (a < b) out.emplace_back(a, b);
  return out;
}

std::size_t TrustNetwork::edge_count() const {
  std::size_t twice = 0;
  for (const auto& kv : adjacency_) twice += kv.second.size();
  return twice / 2;
}

std::string TrustNetwork::export_edge_list() const {
  std::string out;
  for (const auto& [a, b] : edges())
    out += std::to_string(a.value) + " " + std::to_string(b.value) + "\n";
  return out;
}

bool TrustNetwork::is_active(NodeId id) const {
  auto it = nodes_.find(id);
  return it != nodes_.end() && it->second.online && !it->second.revoked();
}

bool TrustNetwork::is_trusted(NodeId id) const {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) return false;
  const auto& c = it->second.cert;
  return !c.revoked && !c.expired_on(today_) && c.signatures.size() >= 2;
}

bool TrustNetwork::is_validator(NodeId id) const {
  auto it = nodes_.find(id);
  return it != nodes_.end() && it->second.empowered() && it->second.online && !it->second.revoked();
}

ledger::ValidatorCheck TrustNetwork::validator_check() const {
  return [this](NodeId id) { return is_validator(id); };
}

std::vector<NodeId> TrustNetwork::validators() const {
  std::vector<NodeId> out;
  for (const auto& kv : nodes_)
    if (is_validator(kv.first)) out.push_back(kv.first);
  return out;
}

std::optional<NodeId> TrustNetwork::pick_validator(std::optional<NeighborhoodId> prefer) const {
  std::optional<NodeId> fallback;
  for (const auto& [id, r] : nodes_) {
    if (!is_validator(id)) continue;
    if (prefer && r.neighborhood == *prefer) return id;
    if (!fallback) fallback = id;
  }
  return fallback;
}

bool TrustNetwork::exchange(NodeRecord& a, NodeRecord& b) {
  if (!a.cert.signed_by(b.keys.key_id))
    a.cert = identity::sign_certificate(std::move(a.cert), b.keys, b.uid, today_);
  if (!b.cert.signed_by(a.keys.key_id))
    b.cert = identity::sign_certificate(std::move(b.cert), a.keys, a.uid, today_);
  if (has_edge(a.id, b.id)) return false;
  add_edge(a.id, b.id);
  return true;
}

void TrustNetwork::add_edge(NodeId a, NodeId b) {
  adjacency_[a].insert(b);
  adjacency_[b].insert(a);
}

void TrustNetwork::retire(NodeId id) {
  const std::string key = node(id).keys.key_id;
  for (auto& [other, r] : nodes_)
    if (other != id)
      std::erase_if(r.cert.signatures,
                    [&](const identity::Signature& s) { return s.signer_key_id == key; });
  for (NodeId n : adjacency_[id]) adjacency_[n].erase(id);
  adjacency_[id].clear();
}

void TrustNetwork::log(std::vector<EntryBody> entries, std::optional<NodeId> validator) {
  if (!validator || !is_validator(*validator)) validator = pick_validator();
  if (!validator) {
    std::move(entries.begin(), entries.end(), std::back_inserter(pending_));
    return;
  }
  if (!pending_.empty()) {
    entries.insert(entries.begin(), std::make_move_iterator(pending_.begin()),
                   std::make_move_iterator(pending_.end()));
    pending_.clear();
  }
  if (entries.empty()) return;
  ledger_.append(std::move(entries), *validator, validator_check());
}

}  // namespace retina::trust
