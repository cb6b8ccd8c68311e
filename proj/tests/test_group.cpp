#include <gtest/gtest.h>

#include "esas/errors.hpp"
#include "esas/group.hpp"

using namespace esas;
using namespace esas::group;

namespace {

TEST(Scalar, ArithmeticModP) {
  const auto p = Scalar::modulus();
  EXPECT_EQ(Scalar::from_mpz(p), Scalar());
  EXPECT_EQ(Scalar::from_int(-1), Scalar::from_mpz(p - 1));
  const auto x = Scalar::from_u64(123456789);
  EXPECT_EQ(x * x.inverse(), Scalar::from_u64(1));
  EXPECT_EQ(x + (-x), Scalar());
  EXPECT_EQ(Scalar::from_u64(7) - Scalar::from_u64(9), Scalar::from_int(-2));
}

TEST(Scalar, BytesRoundTripAndRange) {
  SeededRandom rng(1);
  for (int i = 0; i < 20; ++i) {
    const auto s = Scalar::random_nonzero(rng);
    EXPECT_FALSE(s.is_zero());
    EXPECT_EQ(Scalar::from_bytes(s.to_bytes()), s);
  }
  Bytes p_bytes(32);
  mpz_export(p_bytes.data(), nullptr, 1, 1, 1, 0, Scalar::modulus().get_mpz_t());
  EXPECT_THROW(Scalar::from_bytes(p_bytes), FormatError);
  EXPECT_THROW(Scalar::from_bytes(Bytes(31)), FormatError);
}

TEST(Scalar, ZeroHasNoInverse) { EXPECT_THROW(Scalar().inverse(), InvalidArgument); }

TEST(Pairing, Bilinear) {
  SeededRandom rng(2);
  const auto g = G1::generator();
  const auto a = Scalar::random_nonzero(rng);
  const auto b = Scalar::random_nonzero(rng);
  const auto lhs = pair(g.pow(a), g.pow(b));
  EXPECT_EQ(lhs, Gt::generator().pow(a * b));
  EXPECT_EQ(pair(g.pow(a), g), pair(g, g.pow(a)));
  EXPECT_FALSE(Gt::generator().is_one());
  EXPECT_TRUE(Gt::generator().pow(Scalar()).is_one());
}

TEST(Pairing, HashSideMatchesGeneratorSide) {
  SeededRandom rng(3);
  const auto h = hash_to_g1("attribute:doctor");
  EXPECT_FALSE(h.has_dual());
  const auto x = Scalar::random_nonzero(rng);
  const auto g = G1::generator();
  // e(H^x, g) == e(H, g^x) == e(H, g)^x
  EXPECT_EQ(pair(h.pow(x), g), pair(h, g.pow(x)));
  EXPECT_EQ(pair(h, g).pow(x), pair(h, g.pow(x)));
  // products mixing hash and dual elements stay consistent
  const auto mixed = g.pow(x) * h;
  EXPECT_FALSE(mixed.has_dual());
  EXPECT_EQ(pair(mixed, g), pair(g, g).pow(x) * pair(h, g));
}

TEST(Pairing, TwoHashOutputsRejected) {
  EXPECT_THROW(pair(hash_to_g1("a"), hash_to_g1("b")), InvalidArgument);
}

TEST(Pairing, RatioMatchesQuotient) {
  SeededRandom rng(4);
  const auto g = G1::generator();
  const auto h = hash_to_g1("x");
  const auto a = g.pow(Scalar::random_nonzero(rng));
  const auto b = g.pow(Scalar::random_nonzero(rng));
  EXPECT_EQ(pair_ratio(a, h, b, h), pair(a, h) / pair(b, h));
  EXPECT_TRUE(pair_ratio(a, b, a, b).is_one());
}

TEST(G1, GroupLaws) {
  SeededRandom rng(5);
  const auto g = G1::generator();
  const auto x = Scalar::random_nonzero(rng);
  const auto y = Scalar::random_nonzero(rng);
  EXPECT_EQ(g.pow(x) * g.pow(y), g.pow(x + y));
  EXPECT_TRUE((g.pow(x) / g.pow(x)).is_identity());
  EXPECT_TRUE(G1().is_identity());
  EXPECT_EQ(g.pow(x).pow(y), g.pow(x * y));
  EXPECT_TRUE(g.pow(x).has_dual());
}

TEST(G1, SerializationRoundTrip) {
  SeededRandom rng(6);
  const auto dual = G1::generator().pow(Scalar::random_nonzero(rng));
  const auto single = hash_to_g1("leaf").pow(Scalar::random_nonzero(rng));
  for (const auto& e : {dual, single, G1()}) {
    const auto b = e.to_bytes();
    const auto back = G1::from_bytes(b);
    EXPECT_EQ(back, e);
    EXPECT_EQ(back.has_dual(), e.has_dual());
    EXPECT_EQ(back.to_bytes(), b);
  }
  EXPECT_EQ(dual.to_bytes().size(), 1u + 48 + 96);
  EXPECT_EQ(single.to_bytes().size(), 1u + 48);
}

TEST(G1, RejectsMalformedEncodings) {
  auto b = G1::generator().to_bytes();
  EXPECT_THROW(G1::from_bytes(std::span(b).first(10)), FormatError);
  auto bad_flag = b;
  bad_flag[0] = 7;
  EXPECT_THROW(G1::from_bytes(bad_flag), FormatError);
  auto garbage = b;
  for (std::size_t i = 1; i < 49; ++i) garbage[i] = 0xAB;
  EXPECT_THROW(G1::from_bytes(garbage), FormatError);
  // second-group half from a different element
  auto mismatched = b;
  const auto other = G1::generator().pow(Scalar::from_u64(2)).to_bytes();
  std::copy(other.begin() + 49, other.end(), mismatched.begin() + 49);
  EXPECT_THROW(G1::from_bytes(mismatched), FormatError);
}

TEST(Gt, SerializationRoundTrip) {
  SeededRandom rng(7);
  const auto t = Gt::random(rng);
  const auto b = t.to_bytes();
  ASSERT_EQ(b.size(), Gt::kEncodedSize);
  EXPECT_EQ(Gt::from_bytes(b), t);
  EXPECT_EQ(Gt::from_bytes(Gt().to_bytes()), Gt());
  auto bad = b;
  bad[100] ^= 1;
  EXPECT_THROW(Gt::from_bytes(bad), FormatError);
}

TEST(Gt, InverseAndPow) {
  SeededRandom rng(8);
  const auto t = Gt::random(rng);
  EXPECT_TRUE((t * t.inverse()).is_one());
  EXPECT_EQ(t.pow(Scalar::from_u64(3)), t * t * t);
  EXPECT_TRUE(t.pow(Scalar()).is_one());
  EXPECT_EQ(t.pow(Scalar::from_int(-1)), t.inverse());
}

TEST(Context, OnlyLevel128) {
  EXPECT_EQ(setup_group(128).curve, "BLS12-381");
  EXPECT_THROW(setup_group(80), InvalidArgument);
  EXPECT_THROW(setup_group(256), InvalidArgument);
}

TEST(Symmetric, RoundTripAndTamper) {
  SeededRandom rng(9);
  const auto key = kdf_key(Gt::random(rng));
  const Bytes msg = {'h', 'e', 'l', 'l', 'o'};
  auto ct = sym_encrypt(key, msg, rng);
  EXPECT_EQ(ct.size(), 12 + msg.size() + 16);
  EXPECT_EQ(sym_decrypt(key, ct), msg);
  ct[13] ^= 1;
  EXPECT_THROW(sym_decrypt(key, ct), AuthenticationError);
  EXPECT_THROW(sym_decrypt(key, Bytes(5)), AuthenticationError);

  const auto other = kdf_key(Gt::random(rng));
  EXPECT_THROW(sym_decrypt(other, sym_encrypt(key, msg, rng)), AuthenticationError);
  EXPECT_EQ(sym_decrypt(key, sym_encrypt(key, Bytes{}, rng)), Bytes{});
}

TEST(Symmetric, KdfIsDeterministicAndSeparating) {
  SeededRandom rng(10);
  const auto t = Gt::random(rng);
  EXPECT_EQ(kdf_key(t), kdf_key(Gt::from_bytes(t.to_bytes())));
  EXPECT_NE(kdf_key(t), kdf_key(t * Gt::generator()));
}

}  // namespace
