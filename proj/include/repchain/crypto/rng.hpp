#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>

#include "repchain/bytes.hpp"

namespace repchain::crypto {

using Seed = Hash;

/// Deterministic generator: the ChaCha20 block function (original 64-bit
/// nonce / 64-bit counter layout, zero nonce) in counter mode keyed by a
/// 32-byte seed. Output words are the keystream read as little-endian u64.
/// Identical seeds give identical streams on every platform.
class SeededRng {
 public:
  explicit SeededRng(const Seed& seed);

  std::uint64_t next_u64();

  /// Uniform integer in [0, bound) by rejection sampling. bound >= 1.
  std::uint64_t next_int(std::uint64_t bound);

  /// 53 uniform bits scaled by 2^-53, in [0, 1).
  double next_unit();

  const Seed& seed() const { return seed_; }
  /// Number of 64-bit words consumed so far.
  std::uint64_t position() const { return block_ * 8 + index_ - 8; }

 private:
  void refill();

  Seed seed_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 8> words_{};
  std::size_t index_ = 8;
};

/// hash(label || h_1 || ... || h_k): the epoch seed from the previous
/// epoch's state-block hashes ordered by shard index.
Seed derive_seed(std::span<const Hash> state_block_hashes, std::string_view label);

/// Sub-seed for an independent named stream: hash(label || parent).
Seed derive_subseed(const Seed& parent, std::string_view label);

}  // namespace repchain::crypto
