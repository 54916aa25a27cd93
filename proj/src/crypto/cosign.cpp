#include "repchain/crypto/cosign.hpp"

namespace repchain::crypto {

CosignSession::CosignSession(const SignatureScheme& scheme, std::vector<PublicKey> roster, Bytes message,
                             std::uint64_t session_id)
    : scheme_(&scheme),
      roster_(std::move(roster)),
      message_(std::move(message)),
      session_id_(session_id),
      commitments_(roster_.size()),
      responses_(roster_.size()),
      participants_(roster_.size(), false) {}

void CosignSession::add_commitment(std::size_t member, Bytes commitment) {
  if (member >= roster_.size()) throw CosignAborted("commitment from a non-member");
  if (challenge_) return;  // late commitment, round one is over
  commitments_[member] = std::move(commitment);
}

std::size_t CosignSession::commitment_count() const {
  std::size_t n = 0;
  for (const auto& c : commitments_) n += c.has_value() ? 1 : 0;
  return n;
}

const Bytes& CosignSession::challenge() {
  if (challenge_) return *challenge_;
  std::vector<Bytes> committed;
  for (std::size_t i = 0; i < roster_.size(); ++i) {
    participants_[i] = commitments_[i].has_value();
    if (participants_[i]) committed.push_back(*commitments_[i]);
  }
  if (committed.empty()) throw CosignAborted("no participant committed");
  challenge_ = scheme_->cosign_challenge(roster_, participants_, committed, message_);
  return *challenge_;
}

void CosignSession::add_response(std::size_t member, Bytes response) {
  if (member >= roster_.size() || !challenge_ || !participants_[member]) return;
  responses_[member] = std::move(response);
}

std::optional<CollectiveSignature> CosignSession::finish() const {
  if (!challenge_) return std::nullopt;
  std::vector<Bytes> committed;
  std::vector<Bytes> responses;
  for (std::size_t i = 0; i < roster_.size(); ++i) {
    if (!participants_[i]) continue;
    if (!responses_[i]) return std::nullopt;
    committed.push_back(*commitments_[i]);
    responses.push_back(*responses_[i]);
  }
  return CollectiveSignature{participants_, scheme_->cosign_aggregate(committed, *challenge_, responses)};
}

CollectiveSignature cosign(const SignatureScheme& scheme, std::span<const PublicKey> roster,
                           std::span<const CosignParticipant> participants, ByteView message,
                           std::uint64_t session_id) {
  CosignSession session(scheme, {roster.begin(), roster.end()}, Bytes(message.begin(), message.end()),
                        session_id);
  for (const auto& p : participants) {
    if (p.index >= roster.size()) throw CosignAborted("participant outside the roster");
    session.add_commitment(p.index, scheme.cosign_commit(*p.key, message, session_id));
  }
  const Bytes challenge = session.challenge();
  for (const auto& p : participants) {
    session.add_response(p.index, scheme.cosign_respond(*p.key, message, session_id, challenge));
  }
  auto result = session.finish();
  if (!result) throw CosignAborted("participant failed to respond");
  return *std::move(result);
}

bool cosign_verify(const SignatureScheme& scheme, std::span<const PublicKey> roster, ByteView message,
                   const CollectiveSignature& cosig, std::size_t threshold) {
  if (cosig.signers.size() != roster.size()) return false;
  if (cosig.signer_count() < threshold || cosig.signer_count() == 0) return false;
  return scheme.cosign_verify_aggregate(roster, cosig.signers, message, cosig.aggregate);
}

}  // namespace repchain::crypto
