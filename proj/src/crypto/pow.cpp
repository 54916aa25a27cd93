#include "repchain/crypto/pow.hpp"

#include <stdexcept>

#include "repchain/crypto/hash.hpp"

namespace repchain::crypto {

Hash pow_digest(const Hash& body_hash, std::uint64_t nonce) {
  return Sha256().update(body_hash).update_u64(nonce).finish();
}

std::uint64_t pow_solve(const Hash& body_hash, int difficulty_bits) {
  if (difficulty_bits < 0 || difficulty_bits > kMaxPowDifficulty) {
    throw std::invalid_argument("PoW difficulty must be in [0, 32]");
  }
  for (std::uint64_t nonce = 0;; ++nonce) {
    if (leading_zero_bits(pow_digest(body_hash, nonce)) >= difficulty_bits) return nonce;
  }
}

bool pow_verify(const Hash& body_hash, std::uint64_t nonce, int difficulty_bits) {
  if (difficulty_bits < 0 || difficulty_bits > kMaxPowDifficulty) return false;
  return leading_zero_bits(pow_digest(body_hash, nonce)) >= difficulty_bits;
}

}  // namespace repchain::crypto
