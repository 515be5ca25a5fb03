#include "retina/ledger.h"

#include <algorithm>
#include <cstring>
#include <sstream>

#include "retina/codec.h"

namespace retina::ledger {

using codec::json;

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void write_order(ByteWriter& w, const market::Order& o) {
  w.raw(market::order_signing_bytes(o));
  w.str(o.signature.signer_key_id).u16(o.signature.date.year())
      .u8(o.signature.date.month()).u8(o.signature.date.day())
      .str(o.signature.signer_uid).blob(o.signature.sig_bytes);
}

void write_date(ByteWriter& w, Date d) {
  w.u16(static_cast<std::uint16_t>(d.year())).u8(d.month()).u8(d.day());
}

void write_wallet(ByteWriter& w, const market::Wallet& wal) { w.f64(wal.energy_kwh).f64(wal.balance); }

json entry_to_json(const LedgerEntry& e) {
  json j = std::visit(
      overloaded{
          [](const NodeJoined& x) {
            return json{{"kind", "NodeJoined"}, {"node", x.node.value}, {"key_id", x.key_id},
                        {"neighborhood", x.neighborhood.value}, {"date", x.date.str()}};
          },
          [](const TrustEstablished& x) {
            return json{{"kind", "TrustEstablished"}, {"a", x.a.value}, {"b", x.b.value},
                        {"date", x.date.str()}};
          },
          [](const TrustRevoked& x) {
            return json{{"kind", "TrustRevoked"}, {"node", x.node.value},
                        {"reason", reason_name(x.reason)}, {"date", x.date.str()}};
          },
          [](const OrderPlaced& x) {
            return json{{"kind", "OrderPlaced"}, {"order", codec::to_json(x.order)}};
          },
          [](const TradeSettled& x) {
            return json{{"kind", "TradeSettled"}, {"trade", codec::to_json(x.trade)},
                        {"buyer_after", codec::to_json(x.buyer_after)},
                        {"seller_after", codec::to_json(x.seller_after)}};
          },
      },
      e.body);
  j["type"] = "entry";
  j["hash"] = to_hex(e.hash);
  return j;
}

EntryBody entry_from_json(const json& j) {
  const auto kind = j.at("kind").get<std::string>();
  auto date = [&] { return Date::parse(j.at("date").get<std::string>()); };
  if (kind == "NodeJoined")
    return NodeJoined{NodeId{j.at("node").get<std::uint32_t>()}, j.at("key_id").get<std::string>(),
                      NeighborhoodId{j.at("neighborhood").get<std::uint32_t>()}, date()};
  if (kind == "TrustEstablished")
    return TrustEstablished{NodeId{j.at("a").get<std::uint32_t>()},
                            NodeId{j.at("b").get<std::uint32_t>()}, date()};
  if (kind == "TrustRevoked") {
    const auto reason = j.at("reason").get<std::string>();
    RevocationReason r = RevocationReason::voluntary;
    if (reason == "attestation-failure")
      r = RevocationReason::attestation_failure;
    else if (reason != "voluntary")
      throw Error(Errc::malformed_ledger, "unknown revocation reason " + reason);
    return TrustRevoked{NodeId{j.at("node").get<std::uint32_t>()}, r, date()};
  }
  if (kind == "OrderPlaced") return OrderPlaced{codec::order_from_json(j.at("order"))};
  if (kind == "TradeSettled")
    return TradeSettled{codec::trade_from_json(j.at("trade")),
                        codec::wallet_from_json(j.at("buyer_after")),
                        codec::wallet_from_json(j.at("seller_after"))};
  throw Error(Errc::malformed_ledger, "unknown entry kind " + kind);
}

}  // namespace

std::string_view ledger_kind_name(LedgerKind k) { return k == LedgerKind::trust ? "trust" : "trading"; }

std::string_view reason_name(RevocationReason r) {
  return r == RevocationReason::voluntary ? "voluntary" : "attestation-failure";
}

Bytes serialize_entry(const EntryBody& body) {
  ByteWriter w;
  w.u8(static_cast<std::uint8_t>(body.index()));
  std::visit(overloaded{
                 [&](const NodeJoined& x) {
                   w.u32(x.node.value).str(x.key_id).u32(x.neighborhood.value);
                   write_date(w, x.date);
                 },
                 [&](const TrustEstablished& x) {
                   w.u32(x.a.value).u32(x.b.value);
                   write_date(w, x.date);
                 },
                 [&](const TrustRevoked& x) {
                   w.u32(x.node.value).u8(static_cast<std::uint8_t>(x.reason));
                   write_date(w, x.date);
                 },
                 [&](const OrderPlaced& x) { write_order(w, x.order); },
                 [&](const TradeSettled& x) {
                   const auto& t = x.trade;
                   w.u64(t.buy_order_id).u64(t.sell_order_id).f64(t.kw).f64(t.unit_price)
                       .u32(t.cycle).u32(t.buyer.value).u32(t.seller.value).u8(t.green)
                       .u8(t.cross_neighborhood);
                   write_wallet(w, x.buyer_after);
                   write_wallet(w, x.seller_after);
                 },
             },
             body);
  return std::move(w).bytes();
}

LedgerEntry LedgerEntry::make(EntryBody body) {
  LedgerEntry e{std::move(body), {}};
  e.hash = sha1(serialize_entry(e.body));
  return e;
}

bool LedgerEntry::is_trust_entry() const {
  return std::holds_alternative<NodeJoined>(body) || std::holds_alternative<TrustEstablished>(body) ||
         std::holds_alternative<TrustRevoked>(body);
}

bool LedgerEntry::names_party(NodeId node) const {
  if (auto* j = std::get_if<NodeJoined>(&body)) return j->node == node;
  if (auto* t = std::get_if<TrustEstablished>(&body)) return t->a == node || t->b == node;
  if (auto* r = std::get_if<TrustRevoked>(&body)) return r->node == node;
  return false;
}

std::array<std::uint8_t, kPreimageBytes> block_preimage(const BlockHeader& header,
                                                        std::uint32_t nonce) {
  std::array<std::uint8_t, kPreimageBytes> out{};  // trailing 8 bytes stay zero
  auto put32 = [&](std::size_t at, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out[at + i] = static_cast<std::uint8_t>(v >> (24 - 8 * i));
  };
  put32(0, header.identity);
  std::copy(header.prev_hash.begin(), header.prev_hash.end(), out.begin() + 4);
  put32(36, header.tx_count);
  put32(40, nonce);
  return out;
}

Digest160 hash_block(const BlockHeader& header, std::uint32_t nonce) {
  return sha1(block_preimage(header, nonce));
}

std::uint32_t derive_nonce(std::span<const LedgerEntry> entries) {
  ByteWriter w;
  for (const auto& e : entries) w.raw(e.hash);
  auto d = sha1(w.bytes());
  return std::uint32_t(d[0]) << 24 | std::uint32_t(d[1]) << 16 | std::uint32_t(d[2]) << 8 | d[3];
}

Digest256 widen(const Digest160& d) {
  Digest256 out{};
  std::copy(d.begin(), d.end(), out.begin() + (out.size() - d.size()));
  return out;
}

const Block& Ledger::append(std::vector<EntryBody> entries, NodeId validator,
                            const ValidatorCheck& is_empowered) {
  if (entries.empty()) throw Error(Errc::empty_block, "refusing to append an empty block");
  if (!is_empowered(validator))
    throw Error(Errc::not_empowered,
                "node " + std::to_string(validator.value) + " is not an empowered validator");
  Block block;
  block.entries.reserve(entries.size());
  for (auto& body : entries) {
    auto e = LedgerEntry::make(std::move(body));
    if (e.is_trust_entry() != (kind_ == LedgerKind::trust))
      throw Error(Errc::wrong_ledger, "entry does not belong on the " +
                                          std::string(ledger_kind_name(kind_)) + " ledger");
    block.entries.push_back(std::move(e));
  }
  block.header.identity = validator.value;
  block.header.prev_hash = widen(head_digest());
  block.header.tx_count = static_cast<std::uint32_t>(block.entries.size());
  block.nonce = derive_nonce(block.entries);
  block.digest = hash_block(block.header, block.nonce);
  blocks_.push_back(std::move(block));
  return blocks_.back();
}

std::size_t Ledger::entry_count() const {
  std::size_t n = 0;
  for (const auto& b : blocks_) n += b.entries.size();
  return n;
}

AuditReport audit_chain(const Ledger& ledger) {
  Digest160 prev{};
  const auto& blocks = ledger.blocks();
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const Block& b = blocks[i];
    auto fail = [&](std::string why) { return AuditReport{false, i, std::move(why)}; };
    if (b.header.prev_hash != widen(prev)) return fail("prev_hash does not match predecessor digest");
    if (b.header.tx_count != b.entries.size()) return fail("tx_count does not match entry count");
    for (const auto& e : b.entries) {
      if (sha1(serialize_entry(e.body)) != e.hash) return fail("entry hash does not recompute");
      if (e.is_trust_entry() != (ledger.kind() == LedgerKind::trust))
        return fail("entry on the wrong ledger");
    }
    if (derive_nonce(b.entries) != b.nonce) return fail("nonce does not bind the entries");
    if (hash_block(b.header, b.nonce) != b.digest) return fail("block digest does not recompute");
    prev = b.digest;
  }
  return {};
}

PartialLedger replicate_partial(const Ledger& full, NodeId node) {
  PartialLedger out{node, {}};
  const auto& blocks = full.blocks();
  for (std::size_t h = 0; h < blocks.size(); ++h)
    for (const auto& e : blocks[h].entries)
      if (e.names_party(node)) out.entries.push_back({h, e});
  return out;
}

std::string dump_jsonl(const Ledger& ledger) {
  std::string out;
  const auto& blocks = ledger.blocks();
  for (std::size_t h = 0; h < blocks.size(); ++h) {
    const Block& b = blocks[h];
    json marker{{"type", "block"},
                {"ledger", ledger_kind_name(ledger.kind())},
                {"height", h},
                {"identity", b.header.identity},
                {"prev_hash", to_hex(b.header.prev_hash)},
                {"tx_count", b.header.tx_count},
                {"nonce", b.nonce},
                {"digest", to_hex(b.digest)}};
    out += marker.dump();
    out += '\n';
    for (const auto& e : b.entries) {
      out += entry_to_json(e).dump();
      out += '\n';
    }
  }
  return out;
}

Ledger load_jsonl(std::string_view text, LedgerKind kind) {
  std::optional<Ledger> ledger(std::in_place, kind);
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  try {
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty() || line.front() == '#') continue;
      json j = json::parse(line);
      const auto type = j.at("type").get<std::string>();
      if (type == "block") {
        const auto kind = j.at("ledger").get<std::string>();
        LedgerKind k = kind == "trust" ? LedgerKind::trust : LedgerKind::trading;
        if (kind != "trust" && kind != "trading")
          throw Error(Errc::malformed_ledger, "unknown ledger kind " + kind);
        if (ledger->kind() != k)
          throw Error(Errc::malformed_ledger, "expected a " + std::string(ledger_kind_name(ledger->kind())) +
                                                  " ledger, found " + kind);
        if (j.at("height").get<std::size_t>() != ledger->size())
          throw Error(Errc::malformed_ledger, "block heights out of sequence");
        Block b;
        b.header.identity = j.at("identity").get<std::uint32_t>();
        b.header.prev_hash = fixed_from_hex<32>(j.at("prev_hash").get<std::string>());
        b.header.tx_count = j.at("tx_count").get<std::uint32_t>();
        b.nonce = j.at("nonce").get<std::uint32_t>();
        b.digest = fixed_from_hex<20>(j.at("digest").get<std::string>());
        ledger->raw_blocks().push_back(std::move(b));
      } else if (type == "entry") {
        if (ledger->empty())
          throw Error(Errc::malformed_ledger, "entry before the first block marker");
        LedgerEntry e{entry_from_json(j), fixed_from_hex<20>(j.at("hash").get<std::string>())};
        ledger->raw_blocks().back().entries.push_back(std::move(e));
      } else {
        throw Error(Errc::malformed_ledger, "unknown line type " + type);
      }
    }
  } catch (const Error& e) {
    throw Error(Errc::malformed_ledger, "line " + std::to_string(line_no) + ": " + e.what());
  } catch (const json::exception& e) {
    throw Error(Errc::malformed_ledger, "line " + std::to_string(line_no) + ": " + e.what());
  }
  return std::move(*ledger);
}

}  // namespace retina::ledger
