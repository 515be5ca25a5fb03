#pragma once

// Simulated remote attestation. Empowered nodes measure a node's declared
// software state and vote; a strict majority of fail votes revokes the
// node's certificate.

#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "retina/software_state.h"
#include "retina/trustnet.h"

namespace retina::attest {

enum class Vote : std::uint8_t { pass, fail };

struct AttestationVerdict {
  NodeId attestee;
  std::vector<std::pair<NodeId, Vote>> votes;
  Vote outcome = Vote::pass;
  bool revoked = false;
};

/// fail iff fail votes > floor(|votes| / 2); a tie passes.
Vote majority_outcome(std::span<const std::pair<NodeId, Vote>> votes);

/// What an attester measures on the attestee. The default measures the
/// attestee's declared software state.
using Measurement = std::function<Digest256(NodeId attester, const trust::NodeRecord& attestee)>;

/// Throws NoAttesters on an empty list and NotEmpowered if any attester is
/// not an active empowered node. A failing verdict revokes the attestee.
AttestationVerdict attest(trust::TrustNetwork& net, std::span<const NodeId> attesters,
                          NodeId attestee, const Digest256& expected,
                          const Measurement& measure = {});

/// Active empowered nodes of the attestee's neighborhood; empowered attestees
/// (and neighborhoods without one) are attested by the other empowered nodes
/// network-wide.
std::vector<NodeId> attesters_for(const trust::TrustNetwork& net, NodeId attestee);

/// Attests every online, unrevoked node once, in id order, against the
/// network's approved digest. A revoked empowered node is replaced by
/// promotion when its neighborhood has no other authority.
std::vector<AttestationVerdict> attestation_sweep(trust::TrustNetwork& net,
                                                  const Measurement& measure = {});

class SweepSchedule {
 public:
  /// Throws InvalidArgument when period < 1.
  explicit SweepSchedule(std::uint32_t period);
  /// Cycles are 1-based; a sweep runs at the end of every period-th cycle.
  bool due(std::uint32_t cycle) const { return cycle % period_ == 0; }
  std::uint32_t period() const { return period_; }

 private:
  std::uint32_t period_;
};

}  // namespace retina::attest
