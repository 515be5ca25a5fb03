#include "retina/identity.h"

#include <openssl/evp.h>

#include <algorithm>
#include <sstream>

namespace retina::identity {

namespace {

struct PkeyDeleter {
  void operator()(EVP_PKEY* p) const { EVP_PKEY_free(p); }
};
struct MdCtxDeleter {
  void operator()(EVP_MD_CTX* c) const { EVP_MD_CTX_free(c); }
};
using PkeyPtr = std::unique_ptr<EVP_PKEY, PkeyDeleter>;
using MdCtxPtr = std::unique_ptr<EVP_MD_CTX, MdCtxDeleter>;

class Ed25519Scheme final : public SignatureScheme {
 public:
  SchemeId id() const override { return SchemeId::ed25519; }

  std::pair<Bytes, Bytes> derive_keys(std::span<const std::uint8_t> seed) const override {
    PkeyPtr key(EVP_PKEY_new_raw_private_key(EVP_PKEY_ED25519, nullptr, seed.data(), 32));
    if (!key) throw std::runtime_error("ed25519 key derivation failed");
    Bytes pub(32);
    std::size_t len = pub.size();
    if (EVP_PKEY_get_raw_public_key(key.get(), pub.data(), &len) != 1 || len != 32)
      throw std::runtime_error("ed25519 public key export failed");
    return {std::move(pub), Bytes(seed.begin(), seed.begin() + 32)};
  }

  Bytes sign(std::span<const std::uint8_t> secret, std::span<const std::uint8_t> msg) const override {
    PkeyPtr key(EVP_PKEY_new_raw_private_key(EVP_PKEY_ED25519, nullptr, secret.data(), secret.size()));
    MdCtxPtr ctx(EVP_MD_CTX_new());
    if (!key || !ctx || EVP_DigestSignInit(ctx.get(), nullptr, nullptr, nullptr, key.get()) != 1)
      throw std::runtime_error("ed25519 sign init failed");
    Bytes sig(64);
    std::size_t len = sig.size();
    if (EVP_DigestSign(ctx.get(), sig.data(), &len, msg.data(), msg.size()) != 1)
      throw std::runtime_error("ed25519 sign failed");
    sig.resize(len);
    return sig;
  }

  bool verify(std::span<const std::uint8_t> pub, std::span<const std::uint8_t> msg,
              std::span<const std::uint8_t> sig) const override {
    PkeyPtr key(EVP_PKEY_new_raw_public_key(EVP_PKEY_ED25519, nullptr, pub.data(), pub.size()));
    MdCtxPtr ctx(EVP_MD_CTX_new());
    if (!key || !ctx || EVP_DigestVerifyInit(ctx.get(), nullptr, nullptr, nullptr, key.get()) != 1)
      return false;
    return EVP_DigestVerify(ctx.get(), sig.data(), sig.size(), msg.data(), msg.size()) == 1;
  }
};

class KeyedDigestScheme final : public SignatureScheme {
 public:
  SchemeId id() const override { return SchemeId::keyed_digest; }

  std::pair<Bytes, Bytes> derive_keys(std::span<const std::uint8_t> seed) const override {
    Bytes k(seed.begin(), seed.begin() + 32);
    return {k, k};
  }

  Bytes sign(std::span<const std::uint8_t> secret, std::span<const std::uint8_t> msg) const override {
    auto mac = hmac_sha256(secret, msg);
    return Bytes(mac.begin(), mac.end());
  }

  bool verify(std::span<const std::uint8_t> pub, std::span<const std::uint8_t> msg,
              std::span<const std::uint8_t> sig) const override {
    auto mac = hmac_sha256(pub, msg);
    return sig.size() == mac.size() && std::equal(mac.begin(), mac.end(), sig.begin());
  }
};

std::string header_line(const Certificate& c) {
  return "Pk 2048R/" + c.key_id + " " + c.created.str() + " [expires: " + c.expires.str() + "]";
}

bool is_key_id(std::string_view s) {
  return s.size() == 8 && std::all_of(s.begin(), s.end(), [](char ch) {
           return (ch >= '0' && ch <= '9') || (ch >= 'A' && ch <= 'Z');
         });
}

[[noreturn]] void malformed(std::size_t line, const std::string& why) {
  throw Error(Errc::malformed_certificate, "line " + std::to_string(line) + ": " + why);
}

}  // namespace

std::string_view scheme_name(SchemeId id) {
  return id == SchemeId::ed25519 ? "ed25519" : "keyed-digest";
}

SchemeId parse_scheme(std::string_view name) {
  if (name == "ed25519") return SchemeId::ed25519;
  if (name == "keyed-digest") return SchemeId::keyed_digest;
  throw Error(Errc::invalid_argument, "unknown signature scheme '" + std::string(name) + "'");
}

const SignatureScheme& scheme(SchemeId id) {
  static const Ed25519Scheme ed;
  static const KeyedDigestScheme kd;
  if (id == SchemeId::ed25519) return ed;
  return kd;
}

std::string derive_key_id(std::span<const std::uint8_t> public_key) {
  auto d = sha256(public_key);
  return to_hex(std::span(d).first(4), /*upper=*/true);
}

KeyPair generate_keypair(std::uint64_t seed, SchemeId scheme_id) {
  auto seed_bytes = sha256(ByteWriter{}.str("retina-key-seed").u64(seed).bytes());
  auto [pub, sec] = scheme(scheme_id).derive_keys(seed_bytes);
  KeyPair kp;
  kp.key_id = derive_key_id(pub);
  kp.scheme = scheme_id;
  kp.public_key = std::move(pub);
  kp.secret_key = std::move(sec);
  return kp;
}

void KeyRegistry::add(const std::string& key_id, PublicKey key) {
  auto [it, inserted] = keys_.try_emplace(key_id, key);
  if (!inserted && !(it->second == key))
    throw Error(Errc::invalid_argument, "key id collision on " + key_id);
}

const PublicKey* KeyRegistry::find(std::string_view key_id) const {
  auto it = keys_.find(key_id);
  return it == keys_.end() ? nullptr : &it->second;
}

bool Certificate::signed_by(std::string_view id) const {
  return std::any_of(signatures.begin(), signatures.end(),
                     [&](const Signature& s) { return s.signer_key_id == id; });
}

std::string certificate_body(const Certificate& cert) {
  return header_line(cert) + "\nuid " + cert.owner_uid;
}

Signature sign_bytes(const KeyPair& signer, std::string signer_uid, Date date,
                     std::span<const std::uint8_t> message) {
  return Signature{signer.key_id, date, std::move(signer_uid),
                   scheme(signer.scheme).sign(signer.secret_key, message)};
}

bool verify_bytes(const KeyRegistry& registry, const Signature& sig,
                  std::span<const std::uint8_t> message) {
  const PublicKey* key = registry.find(sig.signer_key_id);
  return key && scheme(key->scheme).verify(key->bytes, message, sig.sig_bytes);
}

Certificate self_sign(const KeyPair& owner, std::string uid, Date created, Date expires) {
  if (!(expires > created))
    throw Error(Errc::invalid_validity_window,
                "expiry " + expires.str() + " is not after creation " + created.str());
  Certificate cert;
  cert.key_id = owner.key_id;
  cert.created = created;
  cert.expires = expires;
  cert.owner_uid = std::move(uid);
  cert.signatures.push_back(sign_bytes(owner, cert.owner_uid, created, as_bytes(certificate_body(cert))));
  return cert;
}

Certificate sign_certificate(Certificate cert, const KeyPair& signer, std::string signer_uid,
                             Date date) {
  if (cert.revoked) throw Error(Errc::certificate_revoked, "certificate " + cert.key_id + " is revoked");
  if (cert.signed_by(signer.key_id))
    throw Error(Errc::already_signed, signer.key_id + " already signed " + cert.key_id);
  cert.signatures.push_back(
      sign_bytes(signer, std::move(signer_uid), date, as_bytes(certificate_body(cert))));
  return cert;
}

std::size_t VerificationReport::valid_endorsements() const {
  if (signatures.empty()) return 0;
  return std::count(signatures.begin() + 1, signatures.end(), SignatureStatus::valid);
}

VerificationReport verify_certificate(const Certificate& cert, const KeyRegistry& registry,
                                      Date as_of) {
  VerificationReport report;
  const std::string body = certificate_body(cert);
  for (const auto& sig : cert.signatures) {
    const PublicKey* key = registry.find(sig.signer_key_id);
    if (!key) {
      report.signatures.push_back(SignatureStatus::unknown_signer);
    } else if (scheme(key->scheme).verify(key->bytes, as_bytes(body), sig.sig_bytes)) {
      report.signatures.push_back(SignatureStatus::valid);
    } else {
      report.signatures.push_back(SignatureStatus::invalid);
    }
  }
  report.self_signature_first =
      !cert.signatures.empty() && cert.signatures.front().signer_key_id == cert.key_id;
  report.expired = cert.expired_on(as_of);
  report.revoked = cert.revoked;
  report.valid = report.self_signature_first && !report.expired && !report.revoked &&
                 std::all_of(report.signatures.begin(), report.signatures.end(),
                             [](SignatureStatus s) { return s == SignatureStatus::valid; });
  return report;
}

std::string render_certificate(const Certificate& cert) {
  std::string out = certificate_body(cert);
  for (const auto& s : cert.signatures)
    out += "\nsig " + s.signer_key_id + " " + s.date.str() + " " + s.signer_uid;
  return out;
}

Certificate parse_certificate(std::string_view text) {
  std::vector<std::string_view> lines;
  for (std::size_t start = 0;;) {
    auto nl = text.find('\n', start);
    lines.push_back(text.substr(start, nl == std::string_view::npos ? nl : nl - start));
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  if (lines.size() < 2) malformed(lines.size(), "need at least a Pk and a uid line");

  Certificate cert;
  // Pk 2048R/XXXXXXXX YYYY-MM-DD [expires: YYYY-MM-DD]
  std::string_view pk = lines[0];
  constexpr std::string_view prefix = "Pk 2048R/";
  if (pk.size() != prefix.size() + 8 + 1 + 10 + 11 + 10 + 1 || pk.substr(0, prefix.size()) != prefix)
    malformed(1, "bad Pk line");
  cert.key_id = std::string(pk.substr(prefix.size(), 8));
  if (!is_key_id(cert.key_id) || pk[prefix.size() + 8] != ' ' ||
      pk.substr(prefix.size() + 19, 11) != " [expires: " || pk.back() != ']')
    malformed(1, "bad Pk line");
  try {
    cert.created = Date::parse(pk.substr(prefix.size() + 9, 10));
    cert.expires = Date::parse(pk.substr(prefix.size() + 30, 10));
  } catch (const Error& e) {
    malformed(1, e.what());
  }

  if (lines[1].substr(0, 4) != "uid " || lines[1].size() == 4) malformed(2, "bad uid line");
  cert.owner_uid = std::string(lines[1].substr(4));

  for (std::size_t i = 2; i < lines.size(); ++i) {
    std::string_view l = lines[i];
    // sig XXXXXXXX YYYY-MM-DD <uid>
    if (l.size() < 4 + 8 + 1 + 10 + 2 || l.substr(0, 4) != "sig " || l[12] != ' ' || l[23] != ' ')
      malformed(i + 1, "bad sig line");
    Signature s;
    s.signer_key_id = std::string(l.substr(4, 8));
    if (!is_key_id(s.signer_key_id)) malformed(i + 1, "bad signer key id");
    try {
      s.date = Date::parse(l.substr(13, 10));
    } catch (const Error& e) {
      malformed(i + 1, e.what());
    }
    s.signer_uid = std::string(l.substr(24));
    cert.signatures.push_back(std::move(s));
  }
  return cert;
}

}  // namespace retina::identity
