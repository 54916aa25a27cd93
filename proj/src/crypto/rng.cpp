#include "repchain/crypto/rng.hpp"

#include <stdexcept>

#include "repchain/crypto/hash.hpp"

namespace repchain::crypto {

SeededRng::SeededRng(const Seed& seed) : seed_(seed) { ensure_sodium(); }

void SeededRng::refill() {
  static constexpr std::array<std::uint8_t, 64> kZeros{};
  static constexpr std::array<std::uint8_t, crypto_stream_chacha20_NONCEBYTES> kNonce{};
  std::array<std::uint8_t, 64> block{};
  crypto_stream_chacha20_xor_ic(block.data(), kZeros.data(), block.size(), kNonce.data(), block_,
                                seed_.data());
  for (std::size_t w = 0; w < 8; ++w) {
    std::uint64_t v = 0;
    for (int b = 7; b >= 0; --b) v = (v << 8) | block[w * 8 + static_cast<std::size_t>(b)];
    words_[w] = v;
  }
  ++block_;
  index_ = 0;
}

std::uint64_t SeededRng::next_u64() {
  if (index_ == 8) refill();
  return words_[index_++];
}

std::uint64_t SeededRng::next_int(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("next_int: bound must be >= 1");
  if (bound == 1) {
    next_u64();
    return 0;
  }
  // Discard the lowest 2^64 mod bound values so every residue is equally likely.
  const std::uint64_t reject_below = (0 - bound) % bound;  // 2^64 mod bound
  for (;;) {
    const std::uint64_t x = next_u64();
    if (x >= reject_below) return x % bound;
  }
}

double SeededRng::next_unit() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

Seed derive_seed(std::span<const Hash> state_block_hashes, std::string_view label) {
  Sha256 h;
  h.update(as_bytes(label));
  for (const auto& sbh : state_block_hashes) h.update(sbh);
  return h.finish();
}

Seed derive_subseed(const Seed& parent, std::string_view label) {
  return Sha256().update(as_bytes(label)).update(parent).finish();
}

}  // namespace repchain::crypto
