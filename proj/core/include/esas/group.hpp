#pragma once

// Pairing group substrate.
//
// The protocol is written for a symmetric pairing e: G1 x G1 -> GT. It runs
// here on BLS12-381, an asymmetric curve, through a facade: a `G1` value
// always carries its representation in the curve's first source group and,
// when the element is a known power of the generator, also the matching
// representation in the second source group ("dual" elements). Hash outputs
// and products involving them carry only the first representation.
// `pair(a, b)` orients its arguments so that one side supplies a dual
// representation; pairing two hash-derived values is rejected.

#include <blst.h>
#include <gmpxx.h>

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "esas/random.hpp"
#include "esas/serialization.hpp"

namespace esas::group {

inline constexpr int kSecurityLevel = 128;
inline constexpr std::string_view kCurveName = "BLS12-381";

// Residue modulo the prime group order p.
class Scalar {
 public:
  static constexpr std::size_t kEncodedSize = 32;

  Scalar() = default;
  static Scalar from_u64(std::uint64_t v);
  static Scalar from_int(std::int64_t v);
  static Scalar from_mpz(const mpz_class& v);  // reduced mod p
  // Uniform in [1, p-1].
  static Scalar random_nonzero(RandomSource& rng);
  // 32-byte big-endian; rejects values >= p.
  static Scalar from_bytes(std::span<const std::uint8_t> b);

  static const mpz_class& modulus();

  Bytes to_bytes() const;
  const mpz_class& value() const noexcept { return v_; }
  bool is_zero() const { return v_ == 0; }

  Scalar inverse() const;
  Scalar operator-() const;
  friend Scalar operator+(const Scalar& a, const Scalar& b);
  friend Scalar operator-(const Scalar& a, const Scalar& b);
  friend Scalar operator*(const Scalar& a, const Scalar& b);
  friend bool operator==(const Scalar& a, const Scalar& b) { return a.v_ == b.v_; }

 private:
  mpz_class v_{0};
};

// Element of the symmetric source group (see file comment).
class G1 {
 public:
  // Identity element, dual.
  G1();

  static G1 generator();

  bool has_dual() const noexcept { return p2_.has_value(); }
  bool is_identity() const;

  G1 pow(const Scalar& e) const;
  G1 inverse() const;
  friend G1 operator*(const G1& a, const G1& b);
  friend G1 operator/(const G1& a, const G1& b) { return a * b.inverse(); }
  friend bool operator==(const G1& a, const G1& b);

  // 1 flag byte (1 = single, 2 = dual), 48-byte compressed point and, for
  // dual elements, the 96-byte compressed second-group point.
  Bytes to_bytes() const;
  static G1 from_bytes(std::span<const std::uint8_t> b);

  const blst_p1& first() const noexcept { return p1_; }
  const std::optional<blst_p2>& second() const noexcept { return p2_; }

 private:
  friend G1 hash_to_g1(std::span<const std::uint8_t> label);
  G1(const blst_p1& p1, std::optional<blst_p2> p2) : p1_(p1), p2_(p2) {}

  blst_p1 p1_;
  std::optional<blst_p2> p2_;
};

// Target group element.
class Gt {
 public:
  static constexpr std::size_t kEncodedSize = 48 * 12;

  // Identity.
  Gt();

  // e(g, g).
  static const Gt& generator();
  // e(g, g)^k for uniform nonzero k.
  static Gt random(RandomSource& rng);

  bool is_one() const;
  Gt pow(const Scalar& e) const;
  Gt inverse() const;
  friend Gt operator*(const Gt& a, const Gt& b);
  friend Gt operator/(const Gt& a, const Gt& b) { return a * b.inverse(); }
  friend bool operator==(const Gt& a, const Gt& b);

  Bytes to_bytes() const;
  static Gt from_bytes(std::span<const std::uint8_t> b);

 private:
  friend Gt pair(const G1& a, const G1& b);
  friend Gt pair_ratio(const G1& a, const G1& b, const G1& c, const G1& d);
  explicit Gt(const blst_fp12& v) : v_(v) {}

  blst_fp12 v_;
};

struct GroupContext {
  int security_level = kSecurityLevel;
  std::string curve{kCurveName};

  const mpz_class& order() const { return Scalar::modulus(); }
  G1 generator() const { return G1::generator(); }

  Bytes to_bytes() const;
  static GroupContext from_bytes(ByteReader& r);
  friend bool operator==(const GroupContext&, const GroupContext&) = default;
};

// Only 128-bit security (BLS12-381) is supported.
GroupContext setup_group(int security_level);

// e(a, b). Throws InvalidArgument if neither argument has a dual
// representation.
Gt pair(const G1& a, const G1& b);

// e(a, b) / e(c, d) with one shared final exponentiation.
Gt pair_ratio(const G1& a, const G1& b, const G1& c, const G1& d);

// Hash onto the curve (RFC 9380, SSWU, random oracle) with a protocol DST.
// The result carries only the first-group representation.
G1 hash_to_g1(std::span<const std::uint8_t> label);
G1 hash_to_g1(std::string_view label);

struct SymmetricKey {
  static constexpr std::size_t kSize = 32;
  std::array<std::uint8_t, kSize> bytes{};
  friend bool operator==(const SymmetricKey&, const SymmetricKey&) = default;
};

// HKDF-SHA256 over the canonical encoding with a fixed protocol label.
SymmetricKey kdf_key(const Gt& element);
SymmetricKey kdf_key(const G1& element);

// AES-256-GCM. Output layout: 12-byte nonce || ciphertext || 16-byte tag.
Bytes sym_encrypt(const SymmetricKey& key, std::span<const std::uint8_t> plaintext,
                  RandomSource& rng);
// Throws AuthenticationError on tampering or a wrong key.
Bytes sym_decrypt(const SymmetricKey& key, std::span<const std::uint8_t> ciphertext);

}  // namespace esas::group
