#include "retina/codec.h"

namespace retina::codec {

json to_json(const identity::Signature& s) {
  return json{{"signer", s.signer_key_id},
              {"date", s.date.str()},
              {"uid", s.signer_uid},
              {"sig", to_hex(s.sig_bytes)}};
}

identity::Signature signature_from_json(const json& j) {
  return identity::Signature{j.at("signer").get<std::string>(),
                             Date::parse(j.at("date").get<std::string>()),
                             j.at("uid").get<std::string>(),
                             from_hex(j.at("sig").get<std::string>())};
}

json to_json(const identity::Certificate& c) {
  json sigs = json::array();
  for (const auto& s : c.signatures) sigs.push_back(to_json(s));
  return json{{"key_id", c.key_id},
              {"created", c.created.str()},
              {"expires", c.expires.str()},
              {"uid", c.owner_uid},
              {"revoked", c.revoked},
              {"signatures", std::move(sigs)}};
}

identity::Certificate certificate_from_json(const json& j) {
  identity::Certificate c;
  c.key_id = j.at("key_id").get<std::string>();
  c.created = Date::parse(j.at("created").get<std::string>());
  c.expires = Date::parse(j.at("expires").get<std::string>());
  c.owner_uid = j.at("uid").get<std::string>();
  c.revoked = j.at("revoked").get<bool>();
  for (const auto& s : j.at("signatures")) c.signatures.push_back(signature_from_json(s));
  return c;
}

json to_json(const market::Order& o) {
  return json{{"order_id", o.order_id},
              {"side", market::side_name(o.side)},
              {"kw", o.kw},
              {"green", o.green},
              {"neighborhood", o.neighborhood.value},
              {"starting_price", o.starting_price},
              {"originator", o.originator.value},
              {"signature", to_json(o.signature)}};
}

market::Order order_from_json(const json& j) {
  market::Order o;
  o.order_id = j.at("order_id").get<std::uint64_t>();
  const auto side = j.at("side").get<std::string>();
  if (side != "buy" && side != "sell") throw Error(Errc::invalid_argument, "bad order side " + side);
  o.side = side == "buy" ? market::Side::buy : market::Side::sell;
  o.kw = j.at("kw").get<double>();
  o.green = j.at("green").get<bool>();
  o.neighborhood = NeighborhoodId{j.at("neighborhood").get<std::uint32_t>()};
  o.starting_price = j.at("starting_price").get<double>();
  o.originator = NodeId{j.at("originator").get<std::uint32_t>()};
  o.signature = signature_from_json(j.at("signature"));
  return o;
}

json to_json(const market::Trade& t) {
  return json{{"buy_order_id", t.buy_order_id},
              {"sell_order_id", t.sell_order_id},
              {"kw", t.kw},
              {"unit_price", t.unit_price},
              {"cycle", t.cycle},
              {"buyer", t.buyer.value},
              {"seller", t.seller.value},
              {"green", t.green},
              {"cross_neighborhood", t.cross_neighborhood}};
}

market::Trade trade_from_json(const json& j) {
  market::Trade t;
  t.buy_order_id = j.at("buy_order_id").get<std::uint64_t>();
  t.sell_order_id = j.at("sell_order_id").get<std::uint64_t>();
  t.kw = j.at("kw").get<double>();
  t.unit_price = j.at("unit_price").get<double>();
  t.cycle = j.at("cycle").get<std::uint32_t>();
  t.buyer = NodeId{j.at("buyer").get<std::uint32_t>()};
  t.seller = NodeId{j.at("seller").get<std::uint32_t>()};
  t.green = j.at("green").get<bool>();
  t.cross_neighborhood = j.at("cross_neighborhood").get<bool>();
  return t;
}

json to_json(const market::Wallet& w) {
  return json{{"energy_kwh", w.energy_kwh}, {"balance", w.balance}};
}

market::Wallet wallet_from_json(const json& j) {
  return market::Wallet{j.at("energy_kwh").get<double>(), j.at("balance").get<double>()};
}

}  // namespace retina::codec
