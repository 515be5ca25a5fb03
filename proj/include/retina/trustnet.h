#pragma once

// The ring-positioned trust network.
//
// Node ID_n sits at ring position n - 1 of a ring with `capacity` slots. A
// trust edge {A, B} exists iff A and B hold each other's signature. Joining
// nodes are introduced by an empowered node and then exchange signatures with
// the occupants of the 2^x ring offsets (see neighbor_positions). Every state
// change is recorded on the network's trust ledger, validated by an
// empowered node.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "retina/common.h"
#include "retina/identity.h"
#include "retina/ledger.h"
#include "retina/software_state.h"

namespace retina::trust {

enum class Role : std::uint8_t { simple, empowered };
enum class LedgerScope : std::uint8_t { partial, full };

struct NodeRecord {
  NodeId id;
  NeighborhoodId neighborhood;
  Role role = Role::simple;
  bool online = true;
  std::string uid;
  identity::KeyPair keys;
  identity::Certificate cert;
  attest::SoftwareState software;
  LedgerScope ledger_scope = LedgerScope::partial;

  bool revoked() const { return cert.revoked; }
  bool empowered() const { return role == Role::empowered; }
};

struct TrustConfig {
  std::size_t chain_limit = 4;
  identity::SchemeId scheme = identity::SchemeId::ed25519;
  int validity_days = 485;
  Date start_date{2022, 2, 7};
};

struct TrustPath {
  NodeId from;
  NodeId to;
  std::vector<NodeId> intermediates;
};

struct JoinReport {
  identity::Certificate cert;
  std::vector<NodeId> peers;  ///< occupants a signature exchange happened with
  /// Introducer signature plus one per peer exchange.
  std::size_t signature_exchanges() const { return 1 + peers.size(); }
};

struct RevocationReport {
  NodeId victim;
  /// Nodes whose certificates lost a signature by the victim, ascending.
  std::vector<NodeId> stripped_certificates;
  std::vector<NodeId> severed_edges;
};

enum class RejoinOutcome { resumed_with_existing_cert, must_rejoin_fresh };

enum class LookupMode {
  full_ledger,    ///< any endorser may be an intermediate
  decentralized,  ///< partial ledgers only: empowered nodes are not consulted
};

struct LookupStats {
  std::size_t expanded = 0;  ///< certificates examined
};

/// Ring offsets (p + 2^x) mod n for x = 0..floor(log2 n), without p, ascending.
/// Throws NetworkTooSmall when n < 2.
std::vector<std::uint32_t> neighbor_positions(std::uint32_t p, std::uint32_t n);

std::string default_uid(NodeId id);

class TrustNetwork {
 public:
  TrustNetwork(std::uint32_t capacity, TrustConfig config,
               attest::SoftwareState approved = attest::reference_software());

  /// Fresh key pair and self-signed certificate for a node about to join.
  NodeRecord prepare_candidate(NodeId id, NeighborhoodId neighborhood, std::uint64_t key_seed,
                               attest::SoftwareState software = attest::reference_software()) const;

  /// Registers a provider-designated empowered node. It cross-signs with every
  /// active empowered node already present.
  JoinReport bootstrap_authority(NodeRecord candidate);

  /// Throws AttestationFailed, NoEmpoweredNode, NodeExists or InvalidArgument;
  /// the network is unchanged on error.
  JoinReport join_node(NodeRecord candidate, NodeId introducer);

  /// Lowest-id active empowered node of the neighborhood, or NoEmpoweredNode.
  NodeId find_introducer(NeighborhoodId neighborhood) const;

  RejoinOutcome rejoin_node(NodeId node);

  /// Direct, out-of-band mutual endorsement of two active nodes (no lookup).
  /// Returns false when the edge already existed.
  bool endorse_mutually(NodeId a, NodeId b);

  /// Exchanges signatures with occupied ring offsets that are not yet trust
  /// edges, as ring maintenance after later nodes have joined. Returns the
  /// number of new edges.
  std::size_t refresh_ring(NodeId node);

  TrustPath establish_trust(NodeId a, NodeId b, LookupMode mode = LookupMode::full_ledger,
                            LookupStats* stats = nullptr);

  /// Breadth-first over endorser layers; minimum intermediate count, ties
  /// broken by the lexicographically smallest intermediate sequence.
  TrustPath certificate_lookup(NodeId a, NodeId target, LookupMode mode = LookupMode::full_ledger,
                               LookupStats* stats = nullptr) const;

  RevocationReport revoke_certificate(NodeId victim, ledger::RevocationReason reason);

  /// Throws NeighborhoodHasAuthority or NeighborhoodEmpty.
  NodeId promote_node(NeighborhoodId neighborhood);
  /// Promotes only when the neighborhood has no active empowered node.
  std::optional<NodeId> ensure_authority(NeighborhoodId neighborhood);

  void set_online(NodeId node, bool online);
  void set_software(NodeId node, attest::SoftwareState software);
  void advance_days(int days) { today_ = today_.plus_days(days); }

  // Queries.
  std::uint32_t capacity() const { return capacity_; }
  std::size_t chain_limit() const { return config_.chain_limit; }
  void set_chain_limit(std::size_t limit) { config_.chain_limit = limit; }
  const TrustConfig& config() const { return config_; }
  Date today() const { return today_; }
  const Digest256& approved_digest() const { return approved_digest_; }

  bool contains(NodeId id) const { return nodes_.count(id) != 0; }
  const NodeRecord& node(NodeId id) const;
  std::vector<NodeId> node_ids() const;
  std::vector<NodeId> members(NeighborhoodId neighborhood) const;
  std::vector<NeighborhoodId> neighborhoods() const;
  std::size_t size() const { return nodes_.size(); }

  bool has_edge(NodeId a, NodeId b) const;
  const std::set<NodeId>& neighbors(NodeId id) const;
  std::vector<std::pair<NodeId, NodeId>> edges() const;
  std::size_t edge_count() const;
  /// One "ID_a ID_b" line per edge with ID_a < ID_b, ascending.
  std::string export_edge_list() const;

  /// Online and not revoked.
  bool is_active(NodeId id) const;
  /// Unrevoked certificate carrying at least one endorsement besides its own.
  bool is_trusted(NodeId id) const;
  /// Active empowered node.
  bool is_validator(NodeId id) const;
  ledger::ValidatorCheck validator_check() const;
  std::vector<NodeId> validators() const;
  std::optional<NodeId> pick_validator(std::optional<NeighborhoodId> prefer = std::nullopt) const;

  const identity::KeyRegistry& registry() const { return registry_; }
  const ledger::Ledger& trust_ledger() const { return ledger_; }
  std::size_t pending_entries() const { return pending_.size(); }
  std::size_t promotions() const { return promotions_; }
  std::size_t sync_pulls() const { return sync_pulls_; }

 private:
  NodeRecord& at(NodeId id);
  void check_capacity(NodeId id) const;
  void admit(NodeRecord& candidate) const;
  /// Adds whichever directions are missing. Returns true if a new edge formed.
  bool exchange(NodeRecord& a, NodeRecord& b);
  void add_edge(NodeId a, NodeId b);
  void retire(NodeId id);
  void log(std::vector<ledger::EntryBody> entries, std::optional<NodeId> validator = std::nullopt);

  std::uint32_t capacity_;
  TrustConfig config_;
  Digest256 approved_digest_;
  Date today_;
  std::map<NodeId, NodeRecord> nodes_;
  std::map<NodeId, std::set<NodeId>> adjacency_;
  identity::KeyRegistry registry_;
  ledger::Ledger ledger_{ledger::LedgerKind::trust};
  std::vector<ledger::EntryBody> pending_;
  std::size_t promotions_ = 0;
  std::size_t sync_pulls_ = 0;
};

}  // namespace retina::trust
