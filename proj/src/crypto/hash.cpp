#include "repchain/crypto/hash.hpp"

#include <bit>
#include <mutex>
#include <stdexcept>

namespace repchain {

std::string to_hex(ByteView bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (auto b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0x0f]);
  }
  return out;
}

namespace {
int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  throw std::invalid_argument("invalid hex digit");
}
}  // namespace

Bytes from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) throw std::invalid_argument("odd-length hex string");
  Bytes out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<std::uint8_t>(hex_value(hex[2 * i]) << 4 | hex_value(hex[2 * i + 1]));
  }
  return out;
}

Hash hash_from_hex(std::string_view hex) {
  auto raw = from_hex(hex);
  if (raw.size() != 32) throw std::invalid_argument("hash must be 32 bytes");
  Hash h{};
  std::copy(raw.begin(), raw.end(), h.begin());
  return h;
}

std::uint64_t low64(const Hash& h) {
  std::uint64_t v = 0;
  for (std::size_t i = 24; i < 32; ++i) v = (v << 8) | h[i];
  return v;
}

namespace crypto {

void ensure_sodium() {
  static std::once_flag once;
  std::call_once(once, [] {
    if (sodium_init() < 0) throw std::runtime_error("libsodium initialisation failed");
  });
}

Hash sha256(ByteView data) {
  ensure_sodium();
  Hash out{};
  crypto_hash_sha256(out.data(), data.data(), data.size());
  return out;
}

Sha256::Sha256() {
  ensure_sodium();
  crypto_hash_sha256_init(&state_);
}

Sha256& Sha256::update(ByteView data) {
  crypto_hash_sha256_update(&state_, data.data(), data.size());
  return *this;
}

Sha256& Sha256::update_u64(std::uint64_t v) {
  std::array<std::uint8_t, 8> be{};
  for (int i = 7; i >= 0; --i) {
    be[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(v & 0xff);
    v >>= 8;
  }
  return update(be);
}

Hash Sha256::finish() {
  Hash out{};
  crypto_hash_sha256_final(&state_, out.data());
  return out;
}

int leading_zero_bits(const Hash& h) {
  int bits = 0;
  for (auto b : h) {
    if (b == 0) {
      bits += 8;
      continue;
    }
    bits += std::countl_zero(b);
    break;
  }
  return bits;
}

}  // namespace crypto
}  // namespace repchain
