#include "retina/software_state.h"

#include <set>

#include "retina/common.h"

namespace retina::attest {

Digest256 compute_attestation_hash(const SoftwareState& state) {
  if (state.components.empty()) throw Error(Errc::empty_state, "software state has no components");
  std::set<std::string_view> names;
  ByteWriter w;
  w.str("retina-attestation").u32(static_cast<std::uint32_t>(state.components.size()));
  for (const auto& [name, digest] : state.components) {
    if (!names.insert(name).second)
      throw Error(Errc::invalid_argument, "duplicate software component '" + name + "'");
    w.str(name).str(digest);
  }
  return sha256(w.bytes());
}

SoftwareState reference_software() {
  auto digest_of = [](std::string_view s) { return to_hex(sha256(as_bytes(s))); };
  return SoftwareState{{
      {"bootloader", digest_of("bootloader-1.4.2")},
      {"firmware", digest_of("meter-firmware-3.1.0")},
      {"broker", digest_of("broker-agent-2.0.5")},
      {"metering-params", digest_of("calibration-table-2022Q1")},
  }};
}

SoftwareState tampered(SoftwareState state, std::size_t component) {
  if (component >= state.components.size())
    throw Error(Errc::invalid_argument, "no such software component");
  auto& digest = state.components[component].second;
  digest = to_hex(sha256(as_bytes("tampered:" + digest)));
  return state;
}

}  // namespace retina::attest
