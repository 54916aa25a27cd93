#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "repchain/crypto/signature.hpp"

namespace repchain::crypto {

struct CollectiveSignature {
  SignerBitmap signers;
  Bytes aggregate;

  std::size_t signer_count() const { return popcount(signers); }
  bool operator==(const CollectiveSignature&) const = default;
};

/// Strict majority: floor(m/2) + 1.
constexpr std::size_t default_cosign_threshold(std::size_t roster_size) {
  return roster_size / 2 + 1;
}

struct CosignAborted : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Leader-side state of one collective-signing run.
///
/// Round one: members answer the announcement with commitments. The
/// challenge freezes the participant set to the members that committed;
/// stragglers that never committed are simply left out of the bitmap.
/// Round two: every committed participant must respond, otherwise the run
/// is aborted and its partial result discarded.
class CosignSession {
 public:
  CosignSession(const SignatureScheme& scheme, std::vector<PublicKey> roster, Bytes message,
                std::uint64_t session_id);

  const Bytes& message() const { return message_; }
  std::uint64_t session_id() const { return session_id_; }
  std::size_t roster_size() const { return roster_.size(); }

  void add_commitment(std::size_t member, Bytes commitment);
  std::size_t commitment_count() const;

  /// Ends round one. Throws CosignAborted when nobody committed.
  const Bytes& challenge();
  bool challenged() const { return challenge_.has_value(); }
  const SignerBitmap& participants() const { return participants_; }

  void add_response(std::size_t member, Bytes response);

  /// Aggregate over exactly the committed participants, or nullopt if any of
  /// them failed to respond.
  std::optional<CollectiveSignature> finish() const;

 private:
  const SignatureScheme* scheme_;
  std::vector<PublicKey> roster_;
  Bytes message_;
  std::uint64_t session_id_;
  std::vector<std::optional<Bytes>> commitments_;
  std::vector<std::optional<Bytes>> responses_;
  SignerBitmap participants_;
  std::optional<Bytes> challenge_;
};

/// Runs both rounds in-process for the given participants (roster indices
/// with their key pairs). Throws CosignAborted if a participant index is not
/// in the roster or the participant set is empty.
struct CosignParticipant {
  std::size_t index;
  const KeyPair* key;
};

CollectiveSignature cosign(const SignatureScheme& scheme, std::span<const PublicKey> roster,
                           std::span<const CosignParticipant> participants, ByteView message,
                           std::uint64_t session_id = 0);

/// True iff the aggregate verifies for the bitmap-selected keys and at least
/// `threshold` members signed.
bool cosign_verify(const SignatureScheme& scheme, std::span<const PublicKey> roster, ByteView message,
                   const CollectiveSignature& cosig, std::size_t threshold);

inline bool cosign_verify(const SignatureScheme& scheme, std::span<const PublicKey> roster,
                          ByteView message, const CollectiveSignature& cosig) {
  return cosign_verify(scheme, roster, message, cosig, default_cosign_threshold(roster.size()));
}

}  // namespace repchain::crypto
