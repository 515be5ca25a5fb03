#include "retina/attestation.h"

#include <algorithm>

namespace retina::attest {

Vote majority_outcome(std::span<const std::pair<NodeId, Vote>> votes) {
  const auto fails = std::count_if(votes.begin(), votes.end(),
                                   [](const auto& v) { return v.second == Vote::fail; });
  return static_cast<std::size_t>(fails) > votes.size() / 2 ? Vote::fail : Vote::pass;
}

AttestationVerdict attest(trust::TrustNetwork& net, std::span<const NodeId> attesters,
                          NodeId attestee, const Digest256& expected, const Measurement& measure) {
  if (attesters.empty()) throw Error(Errc::no_attesters, "attestation needs at least one attester");
  for (NodeId a : attesters)
    if (!net.is_validator(a))
      throw Error(Errc::not_empowered,
                  "attester " + std::to_string(a.value) + " is not an active empowered node");

  const trust::NodeRecord& target = net.node(attestee);
  AttestationVerdict verdict{attestee, {}, Vote::pass, false};
  for (NodeId a : attesters) {
    bool match = false;
    if (measure) {
      match = measure(a, target) == expected;
    } else {
      try {
        match = compute_attestation_hash(target.software) == expected;
      } catch (const Error&) {
        match = false;
      }
    }
    verdict.votes.emplace_back(a, match ? Vote::pass : Vote::fail);
  }
  verdict.outcome = majority_outcome(verdict.votes);
  if (verdict.outcome == Vote::fail && !target.revoked()) {
    net.revoke_certificate(attestee, ledger::RevocationReason::attestation_failure);
    verdict.revoked = true;
  }
  return verdict;
}

std::vector<NodeId> attesters_for(const trust::TrustNetwork& net, NodeId attestee) {
  const auto& target = net.node(attestee);
  std::vector<NodeId> local, global;
  for (NodeId v : net.validators()) {
    if (v == attestee) continue;
    global.push_back(v);
    if (net.node(v).neighborhood == target.neighborhood) local.push_back(v);
  }
  if (target.empowered() || local.empty()) return global;
  return local;
}

std::vector<AttestationVerdict> attestation_sweep(trust::TrustNetwork& net, const Measurement& measure) {
  std::vector<AttestationVerdict> verdicts;
  for (NodeId id : net.node_ids()) {
    if (!net.is_active(id)) continue;
    const auto attesters = attesters_for(net, id);
    if (attesters.empty()) continue;
    const bool was_empowered = net.node(id).empowered();
    verdicts.push_back(attest(net, attesters, id, net.approved_digest(), measure));
    if (verdicts.back().revoked && was_empowered) {
      try {
        net.ensure_authority(net.node(id).neighborhood);
      } catch (const Error& e) {
        if (e.code() != Errc::neighborhood_empty) throw;
      }
    }
  }
  return verdicts;
}

SweepSchedule::SweepSchedule(std::uint32_t period) : period_(period) {
  if (period < 1) throw Error(Errc::invalid_argument, "sweep period must be at least 1 cycle");
}

}  // namespace retina::attest
