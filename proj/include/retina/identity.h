#pragma once

// Key pairs, endorsement signatures and certificates.
//
// Text rendering of a certificate:
//
//   Pk 2048R/678455A3 2022-02-07 [expires: 2023-06-07]
//   uid Node A <nodea@retina.org>
//   sig 962789D1 2023-02-07 Node A <nodea@retina.org>
//   sig ...
//
// "2048R" is a fixed literal; it says nothing about the configured scheme.
// Every signature covers the first two lines only, so endorsements never
// invalidate each other.

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "retina/common.h"
#include "retina/crypto.h"

namespace retina::identity {

enum class SchemeId : std::uint8_t {
  ed25519,       ///< real asymmetric scheme
  keyed_digest,  ///< HMAC-SHA256 test double; the "public" key equals the secret
};

std::string_view scheme_name(SchemeId id);
SchemeId parse_scheme(std::string_view name);

class SignatureScheme {
 public:
  virtual ~SignatureScheme() = default;
  virtual SchemeId id() const = 0;
  /// Returns {public, secret} for a 32-byte seed.
  virtual std::pair<Bytes, Bytes> derive_keys(std::span<const std::uint8_t> seed) const = 0;
  virtual Bytes sign(std::span<const std::uint8_t> secret, std::span<const std::uint8_t> msg) const = 0;
  virtual bool verify(std::span<const std::uint8_t> pub, std::span<const std::uint8_t> msg,
                      std::span<const std::uint8_t> sig) const = 0;
};

const SignatureScheme& scheme(SchemeId id);

struct PublicKey {
  SchemeId scheme = SchemeId::ed25519;
  Bytes bytes;
  bool operator==(const PublicKey&) const = default;
};

struct KeyPair {
  std::string key_id;
  SchemeId scheme = SchemeId::ed25519;
  Bytes public_key;
  Bytes secret_key;

  PublicKey public_part() const { return {scheme, public_key}; }
};

/// First 8 uppercase hex characters of SHA-256(public_key).
std::string derive_key_id(std::span<const std::uint8_t> public_key);

KeyPair generate_keypair(std::uint64_t seed, SchemeId scheme_id = SchemeId::ed25519);

class KeyRegistry {
 public:
  void add(const KeyPair& kp) { add(kp.key_id, kp.public_part()); }
  /// Throws Error(invalid_argument) if key_id is already bound to a different key.
  void add(const std::string& key_id, PublicKey key);
  const PublicKey* find(std::string_view key_id) const;
  std::size_t size() const { return keys_.size(); }

 private:
  std::map<std::string, PublicKey, std::less<>> keys_;
};

struct Signature {
  std::string signer_key_id;
  Date date;
  std::string signer_uid;
  Bytes sig_bytes;

  bool operator==(const Signature&) const = default;
};

struct Certificate {
  std::string key_id;
  Date created;
  Date expires;
  std::string owner_uid;
  std::vector<Signature> signatures;
  bool revoked = false;

  bool signed_by(std::string_view key_id) const;
  /// Valid through the expiry date itself.
  bool expired_on(Date today) const { return today > expires; }
  bool operator==(const Certificate&) const = default;
};

/// Canonical bytes covered by every signature on the certificate.
std::string certificate_body(const Certificate& cert);

Signature sign_bytes(const KeyPair& signer, std::string signer_uid, Date date,
                     std::span<const std::uint8_t> message);
bool verify_bytes(const KeyRegistry& registry, const Signature& sig,
                  std::span<const std::uint8_t> message);

Certificate self_sign(const KeyPair& owner, std::string uid, Date created, Date expires);

Certificate sign_certificate(Certificate cert, const KeyPair& signer, std::string signer_uid,
                             Date date);

enum class SignatureStatus { valid, invalid, unknown_signer };

struct VerificationReport {
  std::vector<SignatureStatus> signatures;
  bool self_signature_first = false;
  bool expired = false;
  bool revoked = false;
  bool valid = false;

  /// Valid signatures other than the self-signature.
  std::size_t valid_endorsements() const;
};

VerificationReport verify_certificate(const Certificate& cert, const KeyRegistry& registry,
                                      Date as_of);

std::string render_certificate(const Certificate& cert);
/// Inverse of render_certificate. Signature bytes are not part of the text,
/// so parsed signatures carry empty sig_bytes.
Certificate parse_certificate(std::string_view text);

}  // namespace retina::identity
