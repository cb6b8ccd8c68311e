#include <gtest/gtest.h>

#include "esas/cpabe.hpp"
#include "esas/errors.hpp"
#include "support.hpp"

using namespace esas;
using namespace esas::cpabe;
using group::G1;
using group::Gt;
using group::Scalar;

namespace {

struct Fixture : ::testing::Test {
  SeededRandom rng{2024};
  SetupResult sys = system_setup(group::setup_group(128), rng);
};

// Independent modular Lagrange interpolation at zero over integer points.
mpz_class oracle_interpolate(const std::vector<std::pair<std::uint32_t, mpz_class>>& pts) {
  const mpz_class& p = Scalar::modulus();
  mpz_class acc = 0;
  for (const auto& [i, yi] : pts) {
    mpz_class num = 1;
    mpz_class den = 1;
    for (const auto& [j, yj] : pts) {
      if (j == i) continue;
      num = num * (p - j) % p;
      den = den * ((mpz_class(i) - j) % p + p) % p;
    }
    mpz_class inv;
    mpz_invert(inv.get_mpz_t(), den.get_mpz_t(), p.get_mpz_t());
    acc = (acc + yi * num % p * inv) % p;
  }
  return acc;
}

// Recovers the node secret from leaf shares using every child.
mpz_class oracle_recover(const PolicyNode& n, const std::vector<Scalar>& shares, std::size_t& next) {
  if (n.is_leaf()) return shares[next++].value();
  std::vector<std::pair<std::uint32_t, mpz_class>> pts;
  for (std::uint32_t i = 0; i < n.children.size(); ++i) pts.emplace_back(i + 1, oracle_recover(n.children[i], shares, next));
  // Any `threshold` points determine the polynomial; use the last ones.
  pts.erase(pts.begin(), pts.end() - n.threshold);
  return oracle_interpolate(pts);
}

TEST_F(Fixture, SetupPublishesConsistentValues) {
  const auto& [params, msk] = sys;
  EXPECT_EQ(params.x, Gt::generator().pow(msk.alpha));
  EXPECT_EQ(params.h, params.g.pow(msk.beta));
  EXPECT_EQ(params.g_a, params.g.pow(msk.a));
  EXPECT_EQ(params.g_b, params.g.pow(msk.b));
  const auto back = SystemParams::from_envelope(params.to_envelope());
  EXPECT_EQ(back.x, params.x);
  EXPECT_EQ(back.h, params.h);
  const auto m = MasterSecret::from_envelope(msk.to_envelope());
  EXPECT_EQ(m.alpha, msk.alpha);
  EXPECT_EQ(m.beta, msk.beta);
}

TEST(Lagrange, MatchesDirectPolynomialEvaluation) {
  SeededRandom rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const int degree = static_cast<int>(rng.uniform_int(0, 4));
    std::vector<Scalar> coeffs;
    for (int i = 0; i <= degree; ++i) coeffs.push_back(Scalar::random_nonzero(rng));
    std::vector<std::uint32_t> points;
    for (std::uint32_t x = 1; points.size() < static_cast<std::size_t>(degree + 1); ++x) {
      if (rng.coin() || x > 10) points.push_back(x);
    }
    Scalar acc;
    for (auto x : points) {
      Scalar y;
      Scalar xp = Scalar::from_u64(1);
      for (const auto& c : coeffs) {
        y = y + c * xp;
        xp = xp * Scalar::from_u64(x);
      }
      acc = acc + y * lagrange_at_zero(x, points);
    }
    EXPECT_EQ(acc, coeffs[0]);
  }
}

TEST(Sharing, SharesRecoverRootSecret) {
  SeededRandom rng(4);
  const auto universe = testkit::attribute_universe(8);
  for (int i = 0; i < 100; ++i) {
    const auto tree = testkit::random_tree(rng, 6, 3, universe);
    const auto r0 = Scalar::random_nonzero(rng);
    const auto shares = share_root_secret(tree, r0, rng);
    ASSERT_EQ(shares.size(), tree.leaf_count());
    std::size_t next = 0;
    EXPECT_EQ(oracle_recover(tree.root(), shares, next), r0.value()) << tree.to_string();
  }
}

TEST_F(Fixture, KeyStructure) {
  const auto u = Scalar::random_nonzero(rng);
  const auto key = user_keygen(sys.params, sys.master, {"doctor", "nurse"}, u, rng);
  EXPECT_EQ(key.s1, sys.params.g.pow(u));
  EXPECT_EQ(key.s, sys.params.g.pow((sys.master.alpha + u) * sys.master.beta.inverse()));
  EXPECT_EQ(key.attribute_set(), (AttributeSet{"doctor", "nurse"}));
  // e(S_m, g) / e(S'_m, H(m)) == e(g, g)^u
  const auto& comp = key.attributes.at("doctor");
  EXPECT_EQ(group::pair_ratio(comp.s_m, sys.params.g, comp.s_m_prime, hash_attribute("doctor")),
            Gt::generator().pow(u));
}

TEST_F(Fixture, KeygenRejectsBadAttributes) {
  EXPECT_THROW(user_keygen(sys.params, sys.master, {}, rng), InvalidArgument);
  EXPECT_THROW(user_keygen(sys.params, sys.master, {"has space"}, rng), InvalidArgument);
}

TEST_F(Fixture, RootValueIsEggToURo) {
  const auto u = Scalar::random_nonzero(rng);
  const auto r0 = Scalar::random_nonzero(rng);
  const auto s = Scalar::random_nonzero(rng);
  const auto key_value = Gt::random(rng);
  const auto tree = parse_policy("and(a, or(b, c), 2-of(d, e, f))");
  const auto ck = encapsulate_key(sys.params, tree, key_value, s, r0, rng);
  const auto key = user_keygen(sys.params, sys.master, {"a", "c", "d", "f"}, u, rng);

  const auto root = recover_root(ck, key);
  ASSERT_TRUE(root.has_value());
  EXPECT_EQ(*root, Gt::generator().pow(u * r0));
  EXPECT_TRUE(check_root(ck, key, *root));
  EXPECT_FALSE(check_root(ck, key, *root * Gt::generator()));
  EXPECT_EQ(decapsulate_key(ck, key, *root), key_value);
  EXPECT_EQ(ck.c0, sys.params.g.pow(s));
  EXPECT_EQ(ck.c2, sys.params.g.pow(s - r0));
}

TEST_F(Fixture, RoundTripForCommonGates) {
  const std::pair<std::string, AttributeSet> ok[] = {
      {"doctor", {"doctor"}},
      {"and(doctor, cardiology)", {"doctor", "cardiology", "extra"}},
      {"or(doctor, nurse)", {"nurse"}},
      {"2-of(a, b, c)", {"a", "c"}},
  };
  for (const auto& [policy, attrs] : ok) {
    const auto enc = encapsulate_key(sys.params, parse_policy(policy), rng);
    const auto key = user_keygen(sys.params, sys.master, attrs, rng);
    const auto root = authorize(enc.ciphertext, key);
    ASSERT_TRUE(root) << policy;
    EXPECT_EQ(decapsulate_key(enc.ciphertext, key, *root), enc.key) << policy;
  }
  const std::pair<std::string, AttributeSet> denied[] = {
      {"doctor", {"nurse"}},
      {"and(doctor, cardiology)", {"doctor"}},
      {"2-of(a, b, c)", {"b"}},
  };
  for (const auto& [policy, attrs] : denied) {
    const auto enc = encapsulate_key(sys.params, parse_policy(policy), rng);
    const auto key = user_keygen(sys.params, sys.master, attrs, rng);
    EXPECT_FALSE(verify_authorization(enc.ciphertext, key)) << policy;
    EXPECT_FALSE(recover_root(enc.ciphertext, key).has_value()) << policy;
  }
}

TEST_F(Fixture, RepeatedAttributeLeaves) {
  const auto enc = encapsulate_key(sys.params, parse_policy("and(a, or(a, b))"), rng);
  const auto key = user_keygen(sys.params, sys.master, {"a"}, rng);
  const auto root = authorize(enc.ciphertext, key);
  ASSERT_TRUE(root);
  EXPECT_EQ(decapsulate_key(enc.ciphertext, key, *root), enc.key);
}

TEST_F(Fixture, LeafDecryptRequiresAttribute) {
  const auto enc = encapsulate_key(sys.params, parse_policy("and(a, b)"), rng);
  const auto key = user_keygen(sys.params, sys.master, {"a"}, rng);
  EXPECT_NO_THROW(leaf_decrypt(key, enc.ciphertext, 0));
  EXPECT_THROW(leaf_decrypt(key, enc.ciphertext, 1), ProtocolError);
  EXPECT_THROW(leaf_decrypt(key, enc.ciphertext, 2), InvalidArgument);
}

TEST_F(Fixture, WrongUserRootFailsCheck) {
  const auto enc = encapsulate_key(sys.params, parse_policy("or(a, b)"), rng);
  const auto alice = user_keygen(sys.params, sys.master, {"a"}, rng);
  const auto bob = user_keygen(sys.params, sys.master, {"b"}, rng);
  const auto alice_root = recover_root(enc.ciphertext, alice);
  ASSERT_TRUE(alice_root);
  EXPECT_TRUE(check_root(enc.ciphertext, alice, *alice_root));
  EXPECT_FALSE(check_root(enc.ciphertext, bob, *alice_root));
}

TEST_F(Fixture, SelectLeavesPicksSmallestLiveChildren) {
  const auto tree = parse_policy("2-of(a, b, c, d)");
  EXPECT_EQ(select_leaves(tree, {"b", "c", "d"}), (std::vector<std::size_t>{1, 2}));
  EXPECT_EQ(select_leaves(tree, {"d"}), std::nullopt);
  const auto nested = parse_policy("or(and(a, b), c)");
  EXPECT_EQ(select_leaves(nested, {"a", "c"}), (std::vector<std::size_t>{2}));
}

TEST(SelectLeaves, AgreesWithOracleProperty) {
  SeededRandom rng(5);
  const auto universe = testkit::attribute_universe(8);
  for (int i = 0; i < 300; ++i) {
    const auto tree = testkit::random_tree(rng, 6, 3, universe);
    for (std::uint32_t mask = 0; mask < 256; ++mask) {
      const auto attrs = testkit::subset_from_mask(universe, mask);
      const auto chosen = select_leaves(tree, attrs);
      ASSERT_EQ(chosen.has_value(), testkit::oracle_satisfies(tree.root(), attrs)) << tree.to_string();
      if (chosen) {
        for (auto leaf : *chosen) ASSERT_TRUE(attrs.contains(tree.leaves()[leaf]));
      }
    }
  }
}

// Cryptographic agreement over a small random sample; the acceptance suite
// runs the exhaustive version.
TEST_F(Fixture, VerifyAgreesWithOracleSample) {
  const auto universe = testkit::attribute_universe(5);
  for (int i = 0; i < 6; ++i) {
    const auto tree = testkit::random_tree(rng, 4, 3, universe);
    const auto enc = encapsulate_key(sys.params, tree, rng);
    const auto full = user_keygen(sys.params, sys.master, {universe.begin(), universe.end()}, rng);
    for (std::uint32_t mask = 1; mask < 32; mask += 3) {
      const auto attrs = testkit::subset_from_mask(universe, mask);
      const auto key = full.restricted_to(attrs);
      const auto root = authorize(enc.ciphertext, key);
      ASSERT_EQ(root.has_value(), testkit::oracle_satisfies(tree.root(), attrs)) << tree.to_string();
      if (root) EXPECT_EQ(decapsulate_key(enc.ciphertext, key, *root), enc.key);
    }
  }
}

TEST_F(Fixture, SerializationRoundTrip) {
  const auto enc = encapsulate_key(sys.params, parse_policy("and(a, 2-of(b, c, d))"), rng);
  const auto ck = KeyCiphertext::from_envelope(enc.ciphertext.to_envelope());
  EXPECT_EQ(ck.to_envelope(), enc.ciphertext.to_envelope());
  EXPECT_EQ(ck.tree, enc.ciphertext.tree);

  const auto key = user_keygen(sys.params, sys.master, {"a", "b", "c"}, rng);
  const auto back = UserKey::from_envelope(key.to_envelope());
  EXPECT_EQ(back.to_envelope(), key.to_envelope());
  const auto root = authorize(ck, back);
  ASSERT_TRUE(root);
  EXPECT_EQ(decapsulate_key(ck, back, *root), enc.key);
}

TEST_F(Fixture, RestrictedKeyKeepsOnlyListedAttributes) {
  const auto key = user_keygen(sys.params, sys.master, {"a", "b", "c"}, rng);
  const auto r = key.restricted_to({"a", "c", "zzz"});
  EXPECT_EQ(r.attribute_set(), (AttributeSet{"a", "c"}));
  EXPECT_EQ(r.s, key.s);
  EXPECT_EQ(r.s1, key.s1);
}

TEST_F(Fixture, TamperedCiphertextRejectedOnLoad) {
  const auto enc = encapsulate_key(sys.params, parse_policy("and(a, b)"), rng);
  ByteWriter w;
  enc.ciphertext.write(w);
  auto bytes = w.data();
  bytes.pop_back();
  ByteReader r(bytes);
  EXPECT_THROW(KeyCiphertext::read(r), FormatError);
}

}  // namespace
