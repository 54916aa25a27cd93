#pragma once

#include <cstdint>

#include "repchain/bytes.hpp"

namespace repchain::crypto {

inline constexpr int kMaxPowDifficulty = 32;

/// sha256(body_hash || nonce as 8-byte big-endian).
Hash pow_digest(const Hash& body_hash, std::uint64_t nonce);

/// Smallest nonce, scanning upward from 0, whose digest has at least
/// `difficulty_bits` leading zero bits. difficulty_bits in [0, 32].
std::uint64_t pow_solve(const Hash& body_hash, int difficulty_bits);

bool pow_verify(const Hash& body_hash, std::uint64_t nonce, int difficulty_bits);

}  // namespace repchain::crypto
