#include "repchain/crypto/signature.hpp"

#include <algorithm>
#include <optional>
#include <stdexcept>

#include "repchain/crypto/hash.hpp"

namespace repchain::crypto {

std::size_t popcount(const SignerBitmap& bitmap) {
  return static_cast<std::size_t>(std::count(bitmap.begin(), bitmap.end(), true));
}

Bytes pack_bitmap(const SignerBitmap& bitmap) {
  Bytes out;
  const auto n = static_cast<std::uint32_t>(bitmap.size());
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(n >> shift));
  out.resize(4 + (bitmap.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < bitmap.size(); ++i) {
    if (bitmap[i]) out[4 + i / 8] |= static_cast<std::uint8_t>(0x80u >> (i % 8));
  }
  return out;
}

std::string_view scheme_name(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::fast_mac: return "fast";
    case SchemeKind::schnorr: return "schnorr";
  }
  return "unknown";
}

std::unique_ptr<SignatureScheme> make_scheme(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::fast_mac: return std::make_unique<FastMacScheme>();
    case SchemeKind::schnorr: return std::make_unique<SchnorrScheme>();
  }
  throw std::invalid_argument("unknown signature scheme");
}

// ---------------------------------------------------------------------------
// FastMacScheme

namespace {

Signature keyed_mac(const SecretKey& key, ByteView domain, ByteView message) {
  Signature out{};
  crypto_generichash_state st;
  crypto_generichash_init(&st, key.data(), key.size(), out.size());
  crypto_generichash_update(&st, domain.data(), domain.size());
  crypto_generichash_update(&st, message.data(), message.size());
  crypto_generichash_final(&st, out.data(), out.size());
  return out;
}

constexpr std::string_view kSignDomain = "repchain/sign";
constexpr std::string_view kCosiDomain = "repchain/cosi";

}  // namespace

KeyPair FastMacScheme::keypair_from_seed(const Hash& seed) {
  ensure_sodium();
  KeyPair kp;
  kp.secret = Sha256().update(as_bytes("fast-secret")).update(seed).finish();
  kp.public_key = Sha256().update(as_bytes("fast-public")).update(ByteView(kp.secret)).finish();
  directory_[kp.public_key] = kp.secret;
  return kp;
}

const SecretKey* FastMacScheme::lookup(const PublicKey& key) const {
  auto it = directory_.find(key);
  return it == directory_.end() ? nullptr : &it->second;
}

Signature FastMacScheme::sign(const KeyPair& key, ByteView message) const {
  return keyed_mac(key.secret, as_bytes(kSignDomain), message);
}

bool FastMacScheme::verify(const PublicKey& key, ByteView message, const Signature& sig) const {
  const SecretKey* secret = lookup(key);
  if (secret == nullptr) return false;
  const Signature expected = keyed_mac(*secret, as_bytes(kSignDomain), message);
  return sodium_memcmp(expected.data(), sig.data(), sig.size()) == 0;
}

Bytes FastMacScheme::cosign_commit(const KeyPair&, ByteView, std::uint64_t) const { return {}; }

Bytes FastMacScheme::cosign_challenge(std::span<const PublicKey> roster, const SignerBitmap& signers,
                                      std::span<const Bytes>, ByteView message) const {
  Sha256 h;
  h.update(as_bytes(kCosiDomain));
  for (const auto& pk : roster) h.update(ByteView(pk));
  h.update(pack_bitmap(signers));
  h.update(message);
  const Hash c = h.finish();
  return Bytes(c.begin(), c.end());
}

Bytes FastMacScheme::cosign_respond(const KeyPair& key, ByteView, std::uint64_t,
                                    ByteView challenge) const {
  const Signature mac = keyed_mac(key.secret, as_bytes(kCosiDomain), challenge);
  return Bytes(mac.begin(), mac.end());
}

Bytes FastMacScheme::cosign_aggregate(std::span<const Bytes>, ByteView,
                                      std::span<const Bytes> responses) const {
  Bytes out;
  for (const auto& r : responses) out.insert(out.end(), r.begin(), r.end());
  return out;
}

bool FastMacScheme::cosign_verify_aggregate(std::span<const PublicKey> roster,
                                            const SignerBitmap& signers, ByteView message,
                                            ByteView aggregate) const {
  if (signers.size() != roster.size()) return false;
  const std::size_t count = popcount(signers);
  if (aggregate.size() != count * sizeof(Signature)) return false;
  const Bytes challenge = cosign_challenge(roster, signers, {}, message);
  std::size_t slot = 0;
  for (std::size_t i = 0; i < roster.size(); ++i) {
    if (!signers[i]) continue;
    const SecretKey* secret = lookup(roster[i]);
    if (secret == nullptr) return false;
    const Signature expected = keyed_mac(*secret, as_bytes(kCosiDomain), challenge);
    if (sodium_memcmp(expected.data(), aggregate.data() + slot * sizeof(Signature),
                      sizeof(Signature)) != 0) {
      return false;
    }
    ++slot;
  }
  return true;
}

// ---------------------------------------------------------------------------
// SchnorrScheme

namespace {

using Scalar = std::array<std::uint8_t, crypto_core_ed25519_SCALARBYTES>;
using Point = std::array<std::uint8_t, crypto_core_ed25519_BYTES>;

Scalar hash_to_scalar(std::initializer_list<ByteView> parts) {
  crypto_hash_sha512_state st;
  crypto_hash_sha512_init(&st);
  for (auto p : parts) crypto_hash_sha512_update(&st, p.data(), p.size());
  std::array<std::uint8_t, crypto_hash_sha512_BYTES> wide{};
  crypto_hash_sha512_final(&st, wide.data());
  Scalar s{};
  crypto_core_ed25519_scalar_reduce(s.data(), wide.data());
  return s;
}

std::array<std::uint8_t, 8> be64(std::uint64_t v) {
  std::array<std::uint8_t, 8> out{};
  for (int i = 7; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(v & 0xff);
    v >>= 8;
  }
  return out;
}

bool is_canonical_scalar(const std::uint8_t* s) {
  std::array<std::uint8_t, crypto_core_ed25519_NONREDUCEDSCALARBYTES> wide{};
  std::copy(s, s + 32, wide.begin());
  Scalar reduced{};
  crypto_core_ed25519_scalar_reduce(reduced.data(), wide.data());
  return std::equal(reduced.begin(), reduced.end(), s);
}

bool base_mult(Point& out, const Scalar& s) {
  return crypto_scalarmult_ed25519_base_noclamp(out.data(), s.data()) == 0;
}

/// Checks s*B == R + c*X.
bool schnorr_equation(const Scalar& s, const Point& r, const Scalar& c, const Point& x) {
  if (crypto_core_ed25519_is_valid_point(r.data()) != 1) return false;
  if (crypto_core_ed25519_is_valid_point(x.data()) != 1) return false;
  Point sb{};
  if (!base_mult(sb, s)) return false;
  Point cx{};
  if (crypto_scalarmult_ed25519_noclamp(cx.data(), c.data(), x.data()) != 0) return false;
  Point rhs{};
  if (crypto_core_ed25519_add(rhs.data(), r.data(), cx.data()) != 0) return false;
  return sodium_memcmp(sb.data(), rhs.data(), sb.size()) == 0;
}

std::optional<Point> sum_points(std::span<const Point> points) {
  if (points.empty()) return std::nullopt;
  Point acc = points[0];
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (crypto_core_ed25519_add(acc.data(), acc.data(), points[i].data()) != 0) return std::nullopt;
  }
  return acc;
}

std::optional<Point> aggregate_key(std::span<const PublicKey> roster, const SignerBitmap& signers) {
  std::vector<Point> keys;
  for (std::size_t i = 0; i < roster.size(); ++i) {
    if (signers[i]) keys.push_back(roster[i]);
  }
  return sum_points(keys);
}

Scalar cosi_challenge(const Point& r, const Point& x, const SignerBitmap& signers, ByteView message) {
  const Bytes bitmap = pack_bitmap(signers);
  return hash_to_scalar({as_bytes(kCosiDomain), ByteView(r), ByteView(x), bitmap, message});
}

}  // namespace

SchnorrScheme::SchnorrScheme() { ensure_sodium(); }

KeyPair SchnorrScheme::keypair_from_seed(const Hash& seed) {
  KeyPair kp;
  const Scalar x = hash_to_scalar({as_bytes("schnorr-secret"), ByteView(seed)});
  kp.secret = x;
  Point pub{};
  if (!base_mult(pub, x)) throw std::runtime_error("degenerate Schnorr secret");
  kp.public_key = pub;
  return kp;
}

Signature SchnorrScheme::sign(const KeyPair& key, ByteView message) const {
  const Scalar r = hash_to_scalar({as_bytes("schnorr-nonce"), ByteView(key.secret), message});
  Point big_r{};
  if (!base_mult(big_r, r)) throw std::runtime_error("degenerate Schnorr nonce");
  const Scalar c = hash_to_scalar({as_bytes(kSignDomain), ByteView(big_r), ByteView(key.public_key), message});
  Scalar cx{};
  crypto_core_ed25519_scalar_mul(cx.data(), c.data(), key.secret.data());
  Scalar s{};
  crypto_core_ed25519_scalar_add(s.data(), r.data(), cx.data());
  Signature sig{};
  std::copy(big_r.begin(), big_r.end(), sig.begin());
  std::copy(s.begin(), s.end(), sig.begin() + 32);
  return sig;
}

bool SchnorrScheme::verify(const PublicKey& key, ByteView message, const Signature& sig) const {
  Point r{};
  Scalar s{};
  std::copy(sig.begin(), sig.begin() + 32, r.begin());
  std::copy(sig.begin() + 32, sig.end(), s.begin());
  if (!is_canonical_scalar(s.data())) return false;
  const Scalar c = hash_to_scalar({as_bytes(kSignDomain), ByteView(r), ByteView(key), message});
  return schnorr_equation(s, r, c, key);
}

Bytes SchnorrScheme::cosign_commit(const KeyPair& key, ByteView message, std::uint64_t session) const {
  const auto sess = be64(session);
  const Scalar r = hash_to_scalar({as_bytes("cosi-nonce"), ByteView(key.secret), ByteView(sess), message});
  Point big_r{};
  if (!base_mult(big_r, r)) throw std::runtime_error("degenerate CoSi nonce");
  return Bytes(big_r.begin(), big_r.end());
}

Bytes SchnorrScheme::cosign_challenge(std::span<const PublicKey> roster, const SignerBitmap& signers,
                                      std::span<const Bytes> commitments, ByteView message) const {
  std::vector<Point> rs;
  for (const auto& c : commitments) {
    if (c.size() != 32) throw std::invalid_argument("malformed CoSi commitment");
    Point p{};
    std::copy(c.begin(), c.end(), p.begin());
    rs.push_back(p);
  }
  const auto r = sum_points(rs);
  const auto x = aggregate_key(roster, signers);
  if (!r || !x) throw std::invalid_argument("empty CoSi participant set");
  const Scalar c = cosi_challenge(*r, *x, signers, message);
  Bytes out(r->begin(), r->end());
  out.insert(out.end(), c.begin(), c.end());
  return out;
}

Bytes SchnorrScheme::cosign_respond(const KeyPair& key, ByteView message, std::uint64_t session,
                                    ByteView challenge) const {
  if (challenge.size() != 64) throw std::invalid_argument("malformed CoSi challenge");
  const auto sess = be64(session);
  const Scalar r = hash_to_scalar({as_bytes("cosi-nonce"), ByteView(key.secret), ByteView(sess), message});
  Scalar c{};
  std::copy(challenge.begin() + 32, challenge.end(), c.begin());
  Scalar cx{};
  crypto_core_ed25519_scalar_mul(cx.data(), c.data(), key.secret.data());
  Scalar s{};
  crypto_core_ed25519_scalar_add(s.data(), r.data(), cx.data());
  return Bytes(s.begin(), s.end());
}

Bytes SchnorrScheme::cosign_aggregate(std::span<const Bytes>, ByteView challenge,
                                      std::span<const Bytes> responses) const {
  if (challenge.size() != 64) throw std::invalid_argument("malformed CoSi challenge");
  Scalar s{};
  for (const auto& resp : responses) {
    if (resp.size() != 32) throw std::invalid_argument("malformed CoSi response");
    crypto_core_ed25519_scalar_add(s.data(), s.data(), resp.data());
  }
  Bytes out(challenge.begin(), challenge.begin() + 32);
  out.insert(out.end(), s.begin(), s.end());
  return out;
}

bool SchnorrScheme::cosign_verify_aggregate(std::span<const PublicKey> roster,
                                            const SignerBitmap& signers, ByteView message,
                                            ByteView aggregate) const {
  if (signers.size() != roster.size() || aggregate.size() != 64) return false;
  const auto x = aggregate_key(roster, signers);
  if (!x) return false;
  Point r{};
  Scalar s{};
  std::copy(aggregate.begin(), aggregate.begin() + 32, r.begin());
  std::copy(aggregate.begin() + 32, aggregate.end(), s.begin());
  if (!is_canonical_scalar(s.data())) return false;
  const Scalar c = cosi_challenge(r, *x, signers, message);
  return schnorr_equation(s, r, c, *x);
}

}  // namespace repchain::crypto
