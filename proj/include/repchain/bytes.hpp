#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace repchain {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

/// 32-byte digest. Ordered lexicographically, which is also the order used
/// for UTXO addresses.
using Hash = std::array<std::uint8_t, 32>;

/// Genesis sentinel: 32 zero bytes.
inline constexpr Hash kZeroHash{};

std::string to_hex(ByteView bytes);
Bytes from_hex(std::string_view hex);
Hash hash_from_hex(std::string_view hex);

/// Low 64 bits of a digest read as a big-endian integer (the last 8 bytes).
/// All shard routing ("id mod k") goes through this.
std::uint64_t low64(const Hash& h);

inline ByteView as_bytes(std::string_view s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

}  // namespace repchain
