#pragma once

// Hash primitives and canonical byte encoding shared by every module.
// Backed by OpenSSL's EVP interface.

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace retina {

using Bytes = std::vector<std::uint8_t>;
using Digest160 = std::array<std::uint8_t, 20>;
using Digest256 = std::array<std::uint8_t, 32>;

Digest160 sha1(std::span<const std::uint8_t> data);
Digest256 sha256(std::span<const std::uint8_t> data);
Digest256 hmac_sha256(std::span<const std::uint8_t> key, std::span<const std::uint8_t> data);

inline std::span<const std::uint8_t> as_bytes(std::string_view s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

/// Lowercase by default; certificate key ids use uppercase.
std::string to_hex(std::span<const std::uint8_t> data, bool upper = false);
/// Throws Error(invalid_argument) on odd length or non-hex characters.
Bytes from_hex(std::string_view hex);

template <std::size_t N>
std::array<std::uint8_t, N> fixed_from_hex(std::string_view hex);

/// Big-endian, length-prefixed encoder used for every digest preimage.
class ByteWriter {
 public:
  ByteWriter& u8(std::uint8_t v) {
    buf_.push_back(v);
    return *this;
  }
  ByteWriter& u16(std::uint16_t v) { return be(v, 2); }
  ByteWriter& u32(std::uint32_t v) { return be(v, 4); }
  ByteWriter& u64(std::uint64_t v) { return be(v, 8); }
  ByteWriter& f64(double v);
  ByteWriter& raw(std::span<const std::uint8_t> data) {
    buf_.insert(buf_.end(), data.begin(), data.end());
    return *this;
  }
  /// u32 length prefix followed by the bytes.
  ByteWriter& str(std::string_view s) {
    u32(static_cast<std::uint32_t>(s.size()));
    return raw(as_bytes(s));
  }
  ByteWriter& blob(std::span<const std::uint8_t> data) {
    u32(static_cast<std::uint32_t>(data.size()));
    return raw(data);
  }

  const Bytes& bytes() const& { return buf_; }
  Bytes bytes() && { return std::move(buf_); }

 private:
  ByteWriter& be(std::uint64_t v, int width) {
    for (int i = width - 1; i >= 0; --i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    return *this;
  }
  Bytes buf_;
};

}  // namespace retina
