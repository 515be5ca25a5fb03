#pragma once

#include <string>
#include <utility>
#include <vector>

#include "retina/crypto.h"

namespace retina::attest {

/// Declared software components of a node's enclave, in measurement order.
struct SoftwareState {
  std::vector<std::pair<std::string, std::string>> components;  // (name, digest)
  bool operator==(const SoftwareState&) const = default;
};

/// Throws EmptyState on an empty state and InvalidArgument on duplicate names.
/// Component order is part of the measurement.
Digest256 compute_attestation_hash(const SoftwareState& state);

/// The provider-approved reference image every meter ships with.
SoftwareState reference_software();

/// `state` with one component's digest replaced, as a tampered meter reports.
SoftwareState tampered(SoftwareState state, std::size_t component = 0);

}  // namespace retina::attest
