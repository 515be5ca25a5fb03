#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace retina {

/// Every failure the library reports. Invalidity results (a bad signature, a
/// broken chain) are values, not errors; these are the refused operations.
enum class Errc {
  invalid_argument,
  invalid_validity_window,
  already_signed,
  certificate_revoked,
  malformed_certificate,
  network_too_small,
  attestation_failed,
  no_empowered_node,
  unknown_node,
  node_revoked,
  node_offline,
  node_exists,
  no_trust_path,
  certificate_not_found,
  neighborhood_empty,
  neighborhood_has_authority,
  not_empowered,
  empty_block,
  wrong_ledger,
  malformed_ledger,
  empty_state,
  no_attesters,
  nonpositive_price,
  untrusted_node,
  insufficient_energy,
  insufficient_funds,
  config_invalid,
  missing_component,
};

std::string_view errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// Node identifier ID_n, n in [1, N]. Ring position is n - 1.
struct NodeId {
  std::uint32_t value = 0;

  constexpr auto operator<=>(const NodeId&) const = default;
  constexpr std::uint32_t position() const { return value - 1; }
  static constexpr NodeId at_position(std::uint32_t pos) { return NodeId{pos + 1}; }
};

struct NeighborhoodId {
  std::uint32_t value = 0;
  constexpr auto operator<=>(const NeighborhoodId&) const = default;
};

/// Calendar date without time of day.
class Date {
 public:
  constexpr Date() = default;
  constexpr Date(int y, unsigned m, unsigned d)
      : ymd_{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}} {}
  explicit constexpr Date(std::chrono::year_month_day ymd) : ymd_(ymd) {}

  /// Parses YYYY-MM-DD. Throws Error(invalid_argument) on anything else.
  static Date parse(std::string_view text);

  int year() const { return int(ymd_.year()); }
  unsigned month() const { return unsigned(ymd_.month()); }
  unsigned day() const { return unsigned(ymd_.day()); }
  bool ok() const { return ymd_.ok(); }

  Date plus_days(int n) const {
    return Date{std::chrono::year_month_day{std::chrono::sys_days{ymd_} + std::chrono::days{n}}};
  }

  std::string str() const;

  auto operator<=>(const Date& o) const { return ymd_ <=> o.ymd_; }
  bool operator==(const Date& o) const = default;

 private:
  std::chrono::year_month_day ymd_{std::chrono::year{1970}, std::chrono::month{1},
                                   std::chrono::day{1}};
};

}  // namespace retina

template <>
struct std::hash<retina::NodeId> {
  std::size_t operator()(const retina::NodeId& id) const noexcept {
    return std::hash<std::uint32_t>{}(id.value);
  }
};
