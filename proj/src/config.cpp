#include "retina/config.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <variant>

namespace retina::config {

namespace {

using sim::Range;
using sim::SimConfig;
using Value = std::variant<double, bool, std::string, Range>;

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(std::string_view s) {
  s = trim(s);
  double v = 0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || end != s.data() + s.size() || !std::isfinite(v))
    throw Error(Errc::config_invalid, "'" + std::string(s) + "' is not a number");
  return v;
}

Value parse_value(std::string_view raw) {
  std::string_view s = trim(raw);
  if (s.empty()) throw Error(Errc::config_invalid, "missing value");
  if (s.front() == '"') {
    if (s.size() < 2 || s.back() != '"' || s.substr(1, s.size() - 2).find('"') != std::string_view::npos)
      throw Error(Errc::config_invalid, "unterminated string " + std::string(s));
    return std::string(s.substr(1, s.size() - 2));
  }
  if (s == "true") return true;
  if (s == "false") return false;
  if (s.front() == '[') {
    if (s.back() != ']') throw Error(Errc::config_invalid, "unterminated range " + std::string(s));
    const auto inner = s.substr(1, s.size() - 2);
    const auto comma = inner.find(',');
    if (comma == std::string_view::npos || inner.find(',', comma + 1) != std::string_view::npos)
      throw Error(Errc::config_invalid, "range needs exactly two elements: " + std::string(s));
    return Range{parse_double(inner.substr(0, comma)), parse_double(inner.substr(comma + 1))};
  }
  return parse_double(s);
}

double as_number(const Value& v) {
  if (auto d = std::get_if<double>(&v)) return *d;
  throw Error(Errc::config_invalid, "expected a number");
}

std::uint64_t as_count(const Value& v) {
  const double d = as_number(v);
  if (d < 0 || d != std::floor(d) || d > 1e15) throw Error(Errc::config_invalid, "expected a non-negative integer");
  return static_cast<std::uint64_t>(d);
}

std::uint32_t as_u32(const Value& v) {
  const auto c = as_count(v);
  if (c > 0xFFFFFFFFULL) throw Error(Errc::config_invalid, "integer too large");
  return static_cast<std::uint32_t>(c);
}

Range as_range(const Value& v) {
  if (auto r = std::get_if<Range>(&v)) return *r;
  throw Error(Errc::config_invalid, "expected a [lo, hi] range");
}

const std::string& as_string(const Value& v) {
  if (auto s = std::get_if<std::string>(&v)) return *s;
  throw Error(Errc::config_invalid, "expected a quoted string");
}

using Setter = std::function<void(SimConfig&, const Value&)>;

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"network.neighborhoods", [](SimConfig& c, const Value& v) { c.neighborhoods = as_u32(v); }},
      {"network.nodes_per_neighborhood",
       [](SimConfig& c, const Value& v) { c.nodes_per_neighborhood = as_u32(v); }},
      {"network.empowered_per_neighborhood",
       [](SimConfig& c, const Value& v) { c.empowered_per_neighborhood = as_u32(v); }},
      {"network.chain_limit", [](SimConfig& c, const Value& v) { c.chain_limit = as_count(v); }},
      {"network.scheme",
       [](SimConfig& c, const Value& v) {
         try {
           c.scheme = identity::parse_scheme(as_string(v));
         } catch (const Error& e) {
           throw Error(Errc::config_invalid, e.what());
         }
       }},
      {"market.cycles", [](SimConfig& c, const Value& v) { c.market_cycles = as_u32(v); }},
      {"market.scenario",
       [](SimConfig& c, const Value& v) {
         std::tie(c.buyer_fraction, c.seller_fraction) = sim::parse_scenario(as_string(v));
       }},
      {"market.buyer_fraction", [](SimConfig& c, const Value& v) { c.buyer_fraction = as_number(v); }},
      {"market.seller_fraction", [](SimConfig& c, const Value& v) { c.seller_fraction = as_number(v); }},
      {"market.starting_price", [](SimConfig& c, const Value& v) { c.starting_price = as_number(v); }},
      {"market.green_weight", [](SimConfig& c, const Value& v) { c.weights.a = as_number(v); }},
      {"market.proximity_weight", [](SimConfig& c, const Value& v) { c.weights.b = as_number(v); }},
      {"market.nongreen_weight", [](SimConfig& c, const Value& v) { c.weights.a_nongreen = as_number(v); }},
      {"market.proximity_floor", [](SimConfig& c, const Value& v) { c.weights.b_min = as_number(v); }},
      {"market.weight_bounds",
       [](SimConfig& c, const Value& v) {
         const Range r = as_range(v);
         c.weight_bounds = {r.lo, r.hi};
       }},
      {"market.initial_balance", [](SimConfig& c, const Value& v) { c.initial_balance = as_number(v); }},
      {"market.green_fraction", [](SimConfig& c, const Value& v) { c.green_fraction = as_number(v); }},
      {"market.green_only_fraction",
       [](SimConfig& c, const Value& v) { c.green_only_fraction = as_number(v); }},
      {"market.min_sell_price", [](SimConfig& c, const Value& v) { c.min_sell_price = as_number(v); }},
      {"market.max_buy_price", [](SimConfig& c, const Value& v) { c.max_buy_price = as_number(v); }},
      {"broker.buyer_reserve", [](SimConfig& c, const Value& v) { c.buyer_reserve = as_range(v); }},
      {"broker.seller_reserve", [](SimConfig& c, const Value& v) { c.seller_reserve = as_range(v); }},
      {"broker.buyer_production", [](SimConfig& c, const Value& v) { c.buyer_production = as_range(v); }},
      {"broker.buyer_consumption", [](SimConfig& c, const Value& v) { c.buyer_consumption = as_range(v); }},
      {"broker.seller_production", [](SimConfig& c, const Value& v) { c.seller_production = as_range(v); }},
      {"broker.seller_consumption",
       [](SimConfig& c, const Value& v) { c.seller_consumption = as_range(v); }},
      {"broker.low_threshold", [](SimConfig& c, const Value& v) { c.low_threshold = as_range(v); }},
      {"broker.high_threshold", [](SimConfig& c, const Value& v) { c.high_threshold = as_range(v); }},
      {"broker.rate_jitter", [](SimConfig& c, const Value& v) { c.rate_jitter = as_number(v); }},
      {"run.seed", [](SimConfig& c, const Value& v) { c.seed = as_count(v); }},
      {"run.attestation_period", [](SimConfig& c, const Value& v) { c.attestation_period = as_u32(v); }},
      {"run.tamper_multiplier", [](SimConfig& c, const Value& v) { c.tamper_multiplier = as_number(v); }},
  };
  return table;
}

void assign(SimConfig& c, const std::string& key, std::string_view raw) {
  const auto& table = setters();
  auto it = table.find(key);
  if (it == table.end()) throw Error(Errc::config_invalid, "unknown key '" + key + "'");
  try {
    it->second(c, parse_value(raw));
  } catch (const Error& e) {
    throw Error(Errc::config_invalid, key + ": " + e.what());
  }
}

}  // namespace

SimConfig parse_config(std::string_view text, SimConfig base) {
  std::string section;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    try {
      std::string_view s = line;
      if (const auto hash = s.find('#'); hash != std::string_view::npos) {
        // A '#' inside a quoted string is content, not a comment.
        const auto quotes = std::count(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(hash), '"');
        if (quotes % 2 == 0) s = s.substr(0, hash);
      }
      s = trim(s);
      if (s.empty()) continue;
      if (s.front() == '[') {
        if (s.back() != ']' || s.size() < 3) throw Error(Errc::config_invalid, "malformed section header");
        section = std::string(trim(s.substr(1, s.size() - 2)));
        continue;
      }
      const auto eq = s.find('=');
      if (eq == std::string_view::npos) throw Error(Errc::config_invalid, "expected key = value");
      const std::string key(trim(s.substr(0, eq)));
      if (key.empty()) throw Error(Errc::config_invalid, "empty key");
      if (section.empty()) throw Error(Errc::config_invalid, "key '" + key + "' outside any section");
      assign(base, section + "." + key, s.substr(eq + 1));
    } catch (const Error& e) {
      throw Error(Errc::config_invalid, "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return base;
}

SimConfig load_config_file(const std::string& path, SimConfig base) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(Errc::config_invalid, "cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  try {
    return parse_config(ss.str(), std::move(base));
  } catch (const Error& e) {
    throw Error(Errc::config_invalid, path + ": " + e.what());
  }
}

void apply_override(SimConfig& config, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos)
    throw Error(Errc::config_invalid, "override '" + std::string(assignment) + "' is not key=value");
  assign(config, std::string(trim(assignment.substr(0, eq))), assignment.substr(eq + 1));
}

SimConfig config_from_json(const nlohmann::json& j) {
  try {
    SimConfig c;
    auto range = [&](const char* k) {
      const auto& a = j.at(k);
      if (!a.is_array() || a.size() != 2) throw Error(Errc::config_invalid, std::string(k) + " must be [lo, hi]");
      return Range{a[0].get<double>(), a[1].get<double>()};
    };
    c.neighborhoods = j.at("neighborhoods").get<std::uint32_t>();
    c.nodes_per_neighborhood = j.at("nodes_per_neighborhood").get<std::uint32_t>();
    c.empowered_per_neighborhood = j.at("empowered_per_neighborhood").get<std::uint32_t>();
    c.market_cycles = j.at("market_cycles").get<std::uint32_t>();
    c.buyer_fraction = j.at("buyer_fraction").get<double>();
    c.seller_fraction = j.at("seller_fraction").get<double>();
    const auto& w = j.at("weights");
    c.weights = {w.at("a").get<double>(), w.at("b").get<double>(), w.at("a_nongreen").get<double>(),
                 w.at("b_min").get<double>()};
    const Range wb = range("weight_bounds");
    c.weight_bounds = {wb.lo, wb.hi};
    c.starting_price = j.at("starting_price").get<double>();
    c.buyer_reserve = range("buyer_reserve");
    c.seller_reserve = range("seller_reserve");
    c.buyer_production = range("buyer_production");
    c.buyer_consumption = range("buyer_consumption");
    c.seller_production = range("seller_production");
    c.seller_consumption = range("seller_consumption");
    c.low_threshold = range("low_threshold");
    c.high_threshold = range("high_threshold");
    c.rate_jitter = j.at("rate_jitter").get<double>();
    c.initial_balance = j.at("initial_balance").get<double>();
    c.green_fraction = j.at("green_fraction").get<double>();
    c.green_only_fraction = j.at("green_only_fraction").get<double>();
    c.min_sell_price = j.at("min_sell_price").get<double>();
    c.max_buy_price = j.at("max_buy_price").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.chain_limit = j.at("chain_limit").get<std::size_t>();
    c.scheme = identity::parse_scheme(j.at("scheme").get<std::string>());
    c.attestation_period = j.at("attestation_period").get<std::uint32_t>();
    c.tamper_multiplier = j.at("tamper_multiplier").get<double>();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::config_invalid, std::string("manifest config: ") + e.what());
  } catch (const Error& e) {
    throw Error(Errc::config_invalid, std::string("manifest config: ") + e.what());
  }
}

std::vector<std::string> known_keys() {
  std::vector<std::string> out;
  for (const auto& [k, _] : setters()) out.push_back(k);
  return out;
}

}  // namespace retina::config
