#pragma once

// Permissioned, hash-chained ledgers validated by proof of authority.
//
// A block hashes a fixed 416-bit preimage:
//
//   identity (32) | prev_hash (256) | tx_count (32) | nonce (32) | zero padding (64)
//
// packed big-endian, into a 160-bit SHA-1 digest. The 160-bit predecessor
// digest sits right-aligned in the 256-bit prev_hash field. Block entries are
// bound to the preimage through tx_count and through the nonce, which is the
// leading 32 bits of SHA-1 over the concatenated entry hashes.

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "retina/common.h"
#include "retina/crypto.h"
#include "retina/orders.h"

namespace retina::ledger {

inline constexpr int kIdentityBits = 32;
inline constexpr int kPrevHashBits = 256;
inline constexpr int kTxCountBits = 32;
inline constexpr int kNonceBits = 32;
inline constexpr int kPaddingBits = 64;
inline constexpr int kDigestBits = 160;

constexpr int header_bits() { return kIdentityBits + kPrevHashBits + kTxCountBits; }
constexpr int hash_input_bits() { return header_bits() + kNonceBits + kPaddingBits; }
constexpr int digest_bits() { return kDigestBits; }
/// Per-block PoA message: validator identity plus the block digest.
constexpr int consensus_message_bits() { return kIdentityBits + kDigestBits; }

static_assert(header_bits() == 320);
static_assert(hash_input_bits() == 416);
static_assert(consensus_message_bits() == 192);
static_assert(sizeof(Digest160) * 8 == kDigestBits);

enum class LedgerKind : std::uint8_t { trust, trading };
enum class RevocationReason : std::uint8_t { voluntary, attestation_failure };

std::string_view ledger_kind_name(LedgerKind k);
std::string_view reason_name(RevocationReason r);

struct NodeJoined {
  NodeId node;
  std::string key_id;
  NeighborhoodId neighborhood;
  Date date;
  bool operator==(const NodeJoined&) const = default;
};

struct TrustEstablished {
  NodeId a;
  NodeId b;
  Date date;
  bool operator==(const TrustEstablished&) const = default;
};

struct TrustRevoked {
  NodeId node;
  RevocationReason reason = RevocationReason::voluntary;
  Date date;
  bool operator==(const TrustRevoked&) const = default;
};

struct OrderPlaced {
  market::Order order;
  bool operator==(const OrderPlaced&) const = default;
};

/// A settled trade together with both parties' wallets after settlement.
struct TradeSettled {
  market::Trade trade;
  market::Wallet buyer_after;
  market::Wallet seller_after;
  bool operator==(const TradeSettled&) const = default;
};

using EntryBody = std::variant<NodeJoined, TrustEstablished, TrustRevoked, OrderPlaced, TradeSettled>;

Bytes serialize_entry(const EntryBody& body);

struct LedgerEntry {
  EntryBody body;
  Digest160 hash{};

  static LedgerEntry make(EntryBody body);
  bool is_trust_entry() const;
  /// True when `node` is a party to a trust entry.
  bool names_party(NodeId node) const;
  bool operator==(const LedgerEntry&) const = default;
};

struct BlockHeader {
  std::uint32_t identity = 0;
  Digest256 prev_hash{};
  std::uint32_t tx_count = 0;
  bool operator==(const BlockHeader&) const = default;
};

inline constexpr std::size_t kPreimageBytes = hash_input_bits() / 8;

std::array<std::uint8_t, kPreimageBytes> block_preimage(const BlockHeader& header,
                                                        std::uint32_t nonce);
Digest160 hash_block(const BlockHeader& header, std::uint32_t nonce);
std::uint32_t derive_nonce(std::span<const LedgerEntry> entries);
Digest256 widen(const Digest160& d);

struct Block {
  BlockHeader header;
  std::uint32_t nonce = 0;
  std::vector<LedgerEntry> entries;
  Digest160 digest{};
  bool operator==(const Block&) const = default;
};

using ValidatorCheck = std::function<bool(NodeId)>;

/// Full view of one ledger. Appends are the only mutation; raw_blocks()
/// bypasses validation and exists for loaders and tamper experiments.
class Ledger {
 public:
  explicit Ledger(LedgerKind kind) : kind_(kind) {}

  /// Throws EmptyBlock, NotEmpowered or WrongLedger; the ledger is unchanged on error.
  const Block& append(std::vector<EntryBody> entries, NodeId validator,
                      const ValidatorCheck& is_empowered);

  LedgerKind kind() const { return kind_; }
  const std::vector<Block>& blocks() const { return blocks_; }
  std::size_t size() const { return blocks_.size(); }
  bool empty() const { return blocks_.empty(); }
  Digest160 head_digest() const { return blocks_.empty() ? Digest160{} : blocks_.back().digest; }
  std::size_t entry_count() const;

  std::vector<Block>& raw_blocks() { return blocks_; }

 private:
  LedgerKind kind_;
  std::vector<Block> blocks_;
};

struct AuditReport {
  bool valid = true;
  std::optional<std::size_t> first_bad_block;
  std::string reason;
};

AuditReport audit_chain(const Ledger& ledger);

struct PartialEntry {
  std::size_t height = 0;
  LedgerEntry entry;
};

/// The slice of the trust ledger a simple node keeps: entries naming it.
struct PartialLedger {
  NodeId node;
  std::vector<PartialEntry> entries;
};

PartialLedger replicate_partial(const Ledger& full, NodeId node);

/// One JSON object per line: a block marker followed by that block's entries.
std::string dump_jsonl(const Ledger& ledger);
/// Inverse of dump_jsonl. Lines starting with '#' are skipped. Stored hashes
/// are kept as written so that audit_chain can flag tampering.
Ledger load_jsonl(std::string_view text, LedgerKind kind);

}  // namespace retina::ledger
