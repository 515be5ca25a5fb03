#include "retina/common.h"

#include <charconv>
#include <cstdio>

namespace retina {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_argument: return "InvalidArgument";
    case Errc::invalid_validity_window: return "InvalidValidityWindow";
    case Errc::already_signed: return "AlreadySigned";
    case Errc::certificate_revoked: return "CertificateRevoked";
    case Errc::malformed_certificate: return "MalformedCertificate";
    case Errc::network_too_small: return "NetworkTooSmall";
    case Errc::attestation_failed: return "AttestationFailed";
    case Errc::no_empowered_node: return "NoEmpoweredNode";
    case Errc::unknown_node: return "UnknownNode";
    case Errc::node_revoked: return "NodeRevoked";
    case Errc::node_offline: return "NodeOffline";
    case Errc::node_exists: return "NodeExists";
    case Errc::no_trust_path: return "NoTrustPath";
    case Errc::certificate_not_found: return "CertificateNotFound";
    case Errc::neighborhood_empty: return "NeighborhoodEmpty";
    case Errc::neighborhood_has_authority: return "NeighborhoodHasAuthority";
    case Errc::not_empowered: return "NotEmpowered";
    case Errc::empty_block: return "EmptyBlock";
    case Errc::wrong_ledger: return "WrongLedger";
    case Errc::malformed_ledger: return "MalformedLedger";
    case Errc::empty_state: return "EmptyState";
    case Errc::no_attesters: return "NoAttesters";
    case Errc::nonpositive_price: return "NonpositivePrice";
    case Errc::untrusted_node: return "UntrustedNode";
    case Errc::insufficient_energy: return "InsufficientEnergy";
    case Errc::insufficient_funds: return "InsufficientFunds";
    case Errc::config_invalid: return "ConfigInvalid";
    case Errc::missing_component: return "MissingComponent";
  }
  return "Unknown";
}

namespace {

bool parse_digits(std::string_view s, int& out) {
  if (s.empty()) return false;
  for (char c : s)
    if (c < '0' || c > '9') return false;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && p == s.data() + s.size();
}

}  // namespace

Date Date::parse(std::string_view text) {
  int y = 0, m = 0, d = 0;
  if (text.size() != 10 || text[4] != '-' || text[7] != '-' ||
      !parse_digits(text.substr(0, 4), y) || !parse_digits(text.substr(5, 2), m) ||
      !parse_digits(text.substr(8, 2), d)) {
    throw Error(Errc::invalid_argument, "bad date '" + std::string(text) + "'");
  }
  Date out(y, unsigned(m), unsigned(d));
  if (!out.ok()) throw Error(Errc::invalid_argument, "no such date '" + std::string(text) + "'");
  return out;
}

std::string Date::str() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", year(), month(), day());
  return buf;
}

}  // namespace retina
