#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "repchain/bytes.hpp"

namespace repchain::crypto {

using PublicKey = std::array<std::uint8_t, 32>;
using SecretKey = std::array<std::uint8_t, 32>;
using Signature = std::array<std::uint8_t, 64>;

struct KeyPair {
  PublicKey public_key{};
  SecretKey secret{};
};

/// Which signer took part in a collective signature, indexed by roster
/// position.
using SignerBitmap = std::vector<bool>;

std::size_t popcount(const SignerBitmap& bitmap);
/// Packs the bitmap MSB-first into ceil(m/8) bytes prefixed by the
/// 4-byte big-endian bit count.
Bytes pack_bitmap(const SignerBitmap& bitmap);

enum class SchemeKind : std::uint8_t { fast_mac = 0, schnorr = 1 };

std::string_view scheme_name(SchemeKind kind);

/// Individual and collective signatures behind one interface so protocol
/// code never knows which concrete scheme is running.
///
/// Collective signing follows the two-round protocol: each participant
/// answers the announcement with a commitment, the leader derives a
/// challenge over the committed set, each participant answers with a
/// response, and the leader aggregates the responses.
class SignatureScheme {
 public:
  virtual ~SignatureScheme() = default;

  virtual SchemeKind kind() const = 0;

  /// Deterministic key generation from a 32-byte seed.
  virtual KeyPair keypair_from_seed(const Hash& seed) = 0;

  /// Deterministic signature.
  virtual Signature sign(const KeyPair& key, ByteView message) const = 0;
  /// Never throws; false on any malformed input.
  virtual bool verify(const PublicKey& key, ByteView message, const Signature& sig) const = 0;

  virtual Bytes cosign_commit(const KeyPair& key, ByteView message, std::uint64_t session) const = 0;
  /// Challenge derived from the roster, the participant bitmap, the
  /// commitments of the participants (in roster order) and the message.
  virtual Bytes cosign_challenge(std::span<const PublicKey> roster, const SignerBitmap& signers,
                                 std::span<const Bytes> commitments, ByteView message) const = 0;
  virtual Bytes cosign_respond(const KeyPair& key, ByteView message, std::uint64_t session,
                               ByteView challenge) const = 0;
  /// Aggregates responses (roster order) into the final aggregate value.
  virtual Bytes cosign_aggregate(std::span<const Bytes> commitments, ByteView challenge,
                                 std::span<const Bytes> responses) const = 0;
  virtual bool cosign_verify_aggregate(std::span<const PublicKey> roster, const SignerBitmap& signers,
                                       ByteView message, ByteView aggregate) const = 0;
};

/// Simulation stand-in: keyed BLAKE2b MACs. The scheme object doubles as the
/// simulated key directory (public key -> MAC key) so verification needs
/// only the public key. Collective "aggregates" store one MAC per signer.
class FastMacScheme final : public SignatureScheme {
 public:
  SchemeKind kind() const override { return SchemeKind::fast_mac; }
  KeyPair keypair_from_seed(const Hash& seed) override;
  Signature sign(const KeyPair& key, ByteView message) const override;
  bool verify(const PublicKey& key, ByteView message, const Signature& sig) const override;

  Bytes cosign_commit(const KeyPair& key, ByteView message, std::uint64_t session) const override;
  Bytes cosign_challenge(std::span<const PublicKey> roster, const SignerBitmap& signers,
                         std::span<const Bytes> commitments, ByteView message) const override;
  Bytes cosign_respond(const KeyPair& key, ByteView message, std::uint64_t session,
                       ByteView challenge) const override;
  Bytes cosign_aggregate(std::span<const Bytes> commitments, ByteView challenge,
                         std::span<const Bytes> responses) const override;
  bool cosign_verify_aggregate(std::span<const PublicKey> roster, const SignerBitmap& signers,
                               ByteView message, ByteView aggregate) const override;

 private:
  const SecretKey* lookup(const PublicKey& key) const;
  std::map<PublicKey, SecretKey> directory_;
};

/// Schnorr signatures and Schnorr multisignatures (CoSi-style) in the
/// prime-order subgroup of edwards25519, built on libsodium's group
/// arithmetic. Nonces are derived from the secret, the message and the
/// session id, so signing is deterministic.
class SchnorrScheme final : public SignatureScheme {
 public:
  SchnorrScheme();
  SchemeKind kind() const override { return SchemeKind::schnorr; }
  KeyPair keypair_from_seed(const Hash& seed) override;
  Signature sign(const KeyPair& key, ByteView message) const override;
  bool verify(const PublicKey& key, ByteView message, const Signature& sig) const override;

  Bytes cosign_commit(const KeyPair& key, ByteView message, std::uint64_t session) const override;
  Bytes cosign_challenge(std::span<const PublicKey> roster, const SignerBitmap& signers,
                         std::span<const Bytes> commitments, ByteView message) const override;
  Bytes cosign_respond(const KeyPair& key, ByteView message, std::uint64_t session,
                       ByteView challenge) const override;
  Bytes cosign_aggregate(std::span<const Bytes> commitments, ByteView challenge,
                         std::span<const Bytes> responses) const override;
  bool cosign_verify_aggregate(std::span<const PublicKey> roster, const SignerBitmap& signers,
                               ByteView message, ByteView aggregate) const override;
};

std::unique_ptr<SignatureScheme> make_scheme(SchemeKind kind);

}  // namespace repchain::crypto
