#pragma once

#include <cstdint>

#include "retina/common.h"
#include "retina/crypto.h"
#include "retina/identity.h"

namespace retina::market {

enum class Side : std::uint8_t { buy, sell };

inline std::string_view side_name(Side s) { return s == Side::buy ? "buy" : "sell"; }

/// A signed offer on the trading ledger. For sell orders `green` describes the
/// energy being offered; for buy orders it means "green energy only".
struct Order {
  std::uint64_t order_id = 0;
  Side side = Side::buy;
  double kw = 0.0;
  bool green = false;
  NeighborhoodId neighborhood;
  double starting_price = 1.0;
  NodeId originator;
  identity::Signature signature;

  bool operator==(const Order&) const = default;
};

/// Canonical bytes covered by the originator's signature.
inline Bytes order_signing_bytes(const Order& o) {
  return ByteWriter{}
      .str("order")
      .u64(o.order_id)
      .u8(static_cast<std::uint8_t>(o.side))
      .f64(o.kw)
      .u8(o.green)
      .u32(o.neighborhood.value)
      .f64(o.starting_price)
      .u32(o.originator.value)
      .bytes();
}

struct Trade {
  std::uint64_t buy_order_id = 0;
  std::uint64_t sell_order_id = 0;
  double kw = 0.0;
  double unit_price = 0.0;
  std::uint32_t cycle = 0;
  NodeId buyer;
  NodeId seller;
  bool green = false;
  bool cross_neighborhood = false;

  double cost() const { return kw * unit_price; }
  bool operator==(const Trade&) const = default;
};

struct Wallet {
  double energy_kwh = 0.0;
  double balance = 0.0;
  bool operator==(const Wallet&) const = default;
};

}  // namespace retina::market
