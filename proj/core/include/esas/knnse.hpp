#pragma once

// Secure inner-product (KNN-SE) encryption over exact rationals.
//
// A plain vector v of length n is extended to v* = (v, 1) and split by the
// key's bit vector S; the index is {M1^T v', M2^T v''}. A query q becomes
// q* = (a q, r) with a > 0, r != 0, split by the complementary rule, and the
// trapdoor is {M1^-1 q', M2^-1 q''}. Their inner product is a (v . q) + r.

#include <gmpxx.h>

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "esas/random.hpp"
#include "esas/serialization.hpp"

namespace esas::knnse {

using Rational = mpq_class;
using Vector = std::vector<Rational>;

// Bound of every random integer drawn by this module (matrix entries, split
// summands, a and r').
inline constexpr std::int64_t kRandomBound = std::int64_t{1} << 20;

Rational dot(const Vector& x, const Vector& y);

// Dense square matrix.
class Matrix {
 public:
  Matrix() = default;
  explicit Matrix(std::size_t n) : n_(n), cells_(n * n) {}

  static Matrix identity(std::size_t n);
  // Integer entries uniform in [-bound, bound].
  static Matrix random(std::size_t n, RandomSource& rng, std::int64_t bound = kRandomBound);

  std::size_t size() const noexcept { return n_; }
  Rational& operator()(std::size_t r, std::size_t c) { return cells_[r * n_ + c]; }
  const Rational& operator()(std::size_t r, std::size_t c) const { return cells_[r * n_ + c]; }

  Vector multiply(const Vector& v) const;             // M v
  Vector transpose_multiply(const Vector& v) const;   // M^T v
  Matrix operator*(const Matrix& other) const;

  Rational determinant() const;
  // Throws InvalidArgument if singular.
  Matrix inverse() const;

  bool is_identity() const;
  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  Matrix integer_inverse() const;
  Matrix rational_inverse() const;

  std::size_t n_ = 0;
  std::vector<Rational> cells_;
};

struct OwnerKey {
  std::size_t n = 0;             // vocabulary dimension
  std::vector<std::uint8_t> s;   // n+1 bits
  Matrix m1;
  Matrix m2;
  Matrix m1_inv;
  Matrix m2_inv;

  std::size_t extended_size() const noexcept { return n + 1; }

  // Builds a key from explicit material; validates sizes and invertibility
  // and computes the inverses.
  static OwnerKey from_parts(std::vector<std::uint8_t> s, Matrix m1, Matrix m2);

  std::string to_envelope() const;
  static OwnerKey from_envelope(std::string_view text);
};

// Vector over the vocabulary's n dimensions plus the vocabulary version it
// was built against.
struct PlainVector {
  Vector values;
  std::uint64_t vocabulary_version = 0;

  std::size_t dimension() const noexcept { return values.size(); }
};

struct EncryptedPair {
  std::uint64_t vocabulary_version = 0;
  Vector first;
  Vector second;

  std::size_t size() const noexcept { return first.size(); }

  void write(ByteWriter& w) const;
  static EncryptedPair read(ByteReader& r);
  friend bool operator==(const EncryptedPair&, const EncryptedPair&) = default;
};

struct SecureIndex : EncryptedPair {
  std::string to_envelope() const;
  static SecureIndex from_envelope(std::string_view text);
};

struct Trapdoor : EncryptedPair {
  Bytes to_bytes() const;
  std::string to_envelope() const;
  static Trapdoor from_envelope(std::string_view text);
};

// Throws InvalidArgument for n == 0.
OwnerKey owner_keygen(std::size_t n, RandomSource& rng);

Vector extend_index_vector(const PlainVector& v);
// S[t] == 0: both halves copy v*[t]; S[t] == 1: random halves summing to v*[t].
std::pair<Vector, Vector> split_index_vector(const Vector& vstar, std::span<const std::uint8_t> s,
                                             RandomSource& rng);
SecureIndex encrypt_index(const OwnerKey& key, const PlainVector& v, RandomSource& rng);

// Throws InvalidArgument unless a > 0 and r != 0.
Vector extend_query_vector(const PlainVector& q, const Rational& a, const Rational& r);
// S[t] == 1: both halves copy q*[t]; S[t] == 0: random halves summing to q*[t].
std::pair<Vector, Vector> split_query_vector(const Vector& qstar, std::span<const std::uint8_t> s,
                                             RandomSource& rng);

struct TrapdoorResult {
  Trapdoor trapdoor;
  // Blinding values, kept for test oracles; never serialized with the trapdoor.
  Rational a;
  Rational r;
};

TrapdoorResult gen_trapdoor(const OwnerKey& key, const PlainVector& q, RandomSource& rng);

Rational score(const SecureIndex& index, const Trapdoor& trapdoor);

void write_rational(ByteWriter& w, const Rational& q);
Rational read_rational(ByteReader& r);

}  // namespace esas::knnse
