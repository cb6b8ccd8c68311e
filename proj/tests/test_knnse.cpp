#include <gtest/gtest.h>

#include <set>

#include "esas/errors.hpp"
#include "esas/knnse.hpp"
#include "support.hpp"

using namespace esas;
using namespace esas::knnse;

namespace {

// Cofactor expansion; fine for n <= 5.
Rational oracle_det(const std::vector<std::vector<Rational>>& m) {
  const std::size_t n = m.size();
  if (n == 1) return m[0][0];
  Rational acc = 0;
  for (std::size_t c = 0; c < n; ++c) {
    std::vector<std::vector<Rational>> minor;
    for (std::size_t r = 1; r < n; ++r) {
      std::vector<Rational> row;
      for (std::size_t k = 0; k < n; ++k) {
        if (k != c) row.push_back(m[r][k]);
      }
      minor.push_back(row);
    }
    const Rational term = m[0][c] * oracle_det(minor);
    acc += (c % 2 == 0) ? term : Rational(-term);
  }
  return acc;
}

std::vector<std::vector<Rational>> rows_of(const Matrix& m) {
  std::vector<std::vector<Rational>> out(m.size(), std::vector<Rational>(m.size()));
  for (std::size_t r = 0; r < m.size(); ++r) {
    for (std::size_t c = 0; c < m.size(); ++c) out[r][c] = m(r, c);
  }
  return out;
}

TEST(Matrix, DeterminantMatchesCofactorExpansion) {
  SeededRandom rng(1);
  for (std::size_t n = 1; n <= 5; ++n) {
    for (int t = 0; t < 5; ++t) {
      const auto m = Matrix::random(n, rng, 50);
      EXPECT_EQ(m.determinant(), oracle_det(rows_of(m)));
    }
  }
}

TEST(Matrix, InverseIsTwoSided) {
  SeededRandom rng(2);
  for (std::size_t n : {1u, 2u, 5u, 9u}) {
    const auto m = Matrix::random(n, rng);
    const auto inv = m.inverse();
    EXPECT_TRUE((m * inv).is_identity());
    EXPECT_TRUE((inv * m).is_identity());
  }
}

TEST(Matrix, RationalEntriesInvert) {
  Matrix m(2);
  m(0, 0) = Rational(1, 2);
  m(0, 1) = 3;
  m(1, 0) = Rational(-2, 7);
  m(1, 1) = 1;
  EXPECT_TRUE((m * m.inverse()).is_identity());
}

TEST(Matrix, SingularRejected) {
  Matrix m(3);
  for (std::size_t c = 0; c < 3; ++c) {
    m(0, c) = static_cast<long>(c + 1);
    m(1, c) = static_cast<long>(2 * (c + 1));
    m(2, c) = 7;
  }
  EXPECT_EQ(m.determinant(), 0);
  EXPECT_THROW(m.inverse(), InvalidArgument);
  EXPECT_THROW(OwnerKey::from_parts({0, 1, 0}, m, Matrix::identity(3)), InvalidArgument);
}

TEST(Matrix, TransposeMultiply) {
  SeededRandom rng(3);
  const auto m = Matrix::random(4, rng, 9);
  const auto v = testkit::random_vector(rng, 4, 9);
  const auto got = m.transpose_multiply(v);
  for (std::size_t c = 0; c < 4; ++c) {
    Rational acc = 0;
    for (std::size_t r = 0; r < 4; ++r) acc += m(r, c) * v[r];
    EXPECT_EQ(got[c], acc);
  }
}

TEST(Split, IndexRule) {
  SeededRandom rng(4);
  const Vector v = {5, -3, 2, 1};
  const std::vector<std::uint8_t> s = {0, 1, 0, 1};
  const auto [a, b] = split_index_vector(v, s, rng);
  EXPECT_EQ(a[0], 5);
  EXPECT_EQ(b[0], 5);
  EXPECT_EQ(a[2], 2);
  EXPECT_EQ(b[2], 2);
  EXPECT_EQ(a[1] + b[1], -3);
  EXPECT_EQ(a[3] + b[3], 1);
}

TEST(Split, QueryRuleIsComplementary) {
  SeededRandom rng(5);
  const Vector q = {5, -3, 2, 1};
  const std::vector<std::uint8_t> s = {0, 1, 0, 1};
  const auto [a, b] = split_query_vector(q, s, rng);
  EXPECT_EQ(a[1], -3);
  EXPECT_EQ(b[1], -3);
  EXPECT_EQ(a[0] + b[0], 5);
  EXPECT_EQ(a[2] + b[2], 2);
}

TEST(Extend, Layout) {
  const PlainVector v{{1, 0, 2}, 0};
  EXPECT_EQ(extend_index_vector(v), (Vector{1, 0, 2, 1}));
  EXPECT_EQ(extend_query_vector(v, 3, -4), (Vector{3, 0, 6, -4}));
  EXPECT_THROW(extend_query_vector(v, 0, 1), InvalidArgument);
  EXPECT_THROW(extend_query_vector(v, -1, 1), InvalidArgument);
  EXPECT_THROW(extend_query_vector(v, 1, 0), InvalidArgument);
}

// score(I, T) == a * (v . q) + r' for random keys and vectors.
TEST(Score, IdentityProperty) {
  SeededRandom rng(6);
  for (int t = 0; t < 60; ++t) {
    const auto n = static_cast<std::size_t>(rng.uniform_int(1, 10));
    const auto key = owner_keygen(n, rng);
    const PlainVector v{testkit::random_vector(rng, n, 100), 0};
    const PlainVector q{testkit::random_vector(rng, n, 100), 0};
    const auto idx = encrypt_index(key, v, rng);
    const auto td = gen_trapdoor(key, q, rng);
    EXPECT_GT(td.a, 0);
    EXPECT_NE(td.r, 0);
    EXPECT_EQ(score(idx, td.trapdoor), td.a * testkit::oracle_dot(v.values, q.values) + td.r);
  }
}

TEST(Score, RationalEntries) {
  SeededRandom rng(7);
  const auto key = owner_keygen(3, rng);
  const PlainVector v{{Rational(1, 3), Rational(5, 7), 0}, 0};
  const PlainVector q{{1, 1, 1}, 0};
  const auto td = gen_trapdoor(key, q, rng);
  EXPECT_EQ(score(encrypt_index(key, v, rng), td.trapdoor), td.a * Rational(22, 21) + td.r);
}

TEST(Score, DimensionChecks) {
  SeededRandom rng(8);
  const auto k3 = owner_keygen(3, rng);
  const auto k4 = owner_keygen(4, rng);
  EXPECT_THROW(encrypt_index(k3, PlainVector{{1, 2}, 0}, rng), InvalidArgument);
  EXPECT_THROW(gen_trapdoor(k3, PlainVector{{1, 2, 3, 4}, 0}, rng), InvalidArgument);
  const auto idx = encrypt_index(k3, PlainVector{{1, 2, 3}, 0}, rng);
  const auto td = gen_trapdoor(k4, PlainVector{{1, 2, 3, 4}, 0}, rng);
  EXPECT_THROW(score(idx, td.trapdoor), InvalidArgument);
  EXPECT_THROW(owner_keygen(0, rng), InvalidArgument);
}

TEST(Trapdoor, RepeatedQueriesDiffer) {
  SeededRandom rng(9);
  const auto key = owner_keygen(6, rng);
  const PlainVector q{{1, 0, 1, 0, 0, 1}, 0};
  std::set<Bytes> seen;
  for (int i = 0; i < 20; ++i) seen.insert(gen_trapdoor(key, q, rng).trapdoor.to_bytes());
  EXPECT_EQ(seen.size(), 20u);
}

TEST(Serialization, KeyIndexTrapdoor) {
  SeededRandom rng(10);
  const auto key = owner_keygen(5, rng);
  const auto back = OwnerKey::from_envelope(key.to_envelope());
  EXPECT_EQ(back.s, key.s);
  EXPECT_EQ(back.m1, key.m1);
  EXPECT_EQ(back.m2_inv, key.m2_inv);

  const PlainVector v{{1, Rational(-2, 3), 0, 4, 5}, 7};
  const auto idx = encrypt_index(key, v, rng);
  const auto idx2 = SecureIndex::from_envelope(idx.to_envelope());
  EXPECT_EQ(idx2, idx);
  EXPECT_EQ(idx2.vocabulary_version, 7u);

  const auto td = gen_trapdoor(back, v, rng).trapdoor;
  EXPECT_EQ(Trapdoor::from_envelope(td.to_envelope()), td);
  EXPECT_THROW(SecureIndex::from_envelope(td.to_envelope()), FormatError);
}

TEST(Serialization, RationalCanonicalForm) {
  auto encode = [](const std::string& num, const std::string& den) {
    ByteWriter w;
    w.str(num);
    w.str(den);
    return w.data();
  };
  {
    const auto b = encode("-4", "6");
    ByteReader r(b);
    EXPECT_THROW(read_rational(r), FormatError);
  }
  {
    const auto b = encode("1", "0");
    ByteReader r(b);
    EXPECT_THROW(read_rational(r), FormatError);
  }
  ByteWriter w;
  write_rational(w, Rational(-2, 3));
  ByteReader r(w.data());
  EXPECT_EQ(read_rational(r), Rational(-2, 3));
}

TEST(Keygen, ShapeAndEntryBounds) {
  SeededRandom rng(11);
  const auto key = owner_keygen(8, rng);
  EXPECT_EQ(key.extended_size(), 9u);
  EXPECT_EQ(key.s.size(), 9u);
  for (auto b : key.s) EXPECT_LE(b, 1);
  for (std::size_t r = 0; r < 9; ++r) {
    for (std::size_t c = 0; c < 9; ++c) {
      EXPECT_LE(abs(key.m1(r, c)), kRandomBound);
      EXPECT_EQ(key.m1(r, c).get_den(), 1);
    }
  }
  EXPECT_TRUE((key.m1 * key.m1_inv).is_identity());
  EXPECT_TRUE((key.m2 * key.m2_inv).is_identity());
}

}  // namespace
