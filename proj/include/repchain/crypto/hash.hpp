#pragma once

#include <sodium.h>

#include "repchain/bytes.hpp"

namespace repchain::crypto {

/// Idempotent libsodium initialisation. Every entry point that touches
/// libsodium calls this first.
void ensure_sodium();

Hash sha256(ByteView data);

/// Incremental SHA-256.
class Sha256 {
 public:
  Sha256();
  Sha256& update(ByteView data);
  Sha256& update(const Hash& h) { return update(ByteView(h)); }
  Sha256& update_u64(std::uint64_t v);
  Hash finish();

 private:
  crypto_hash_sha256_state state_{};
};

/// Number of leading zero bits of a digest.
int leading_zero_bits(const Hash& h);

}  // namespace repchain::crypto
