#pragma once

// JSON encodings for values that appear in dumps (ledger, order book,
// certificate store). Digests and signature bytes are lowercase hex.

#include <json.hpp>

#include "retina/identity.h"
#include "retina/orders.h"

namespace retina::codec {

using nlohmann::json;

json to_json(const identity::Signature& s);
identity::Signature signature_from_json(const json& j);

json to_json(const identity::Certificate& c);
identity::Certificate certificate_from_json(const json& j);

json to_json(const market::Order& o);
market::Order order_from_json(const json& j);

json to_json(const market::Trade& t);
market::Trade trade_from_json(const json& j);

json to_json(const market::Wallet& w);
market::Wallet wallet_from_json(const json& j);

}  // namespace retina::codec
