#include <gtest/gtest.h>

#include "esas/errors.hpp"
#include "esas/policy.hpp"
#include "support.hpp"

using namespace esas;
using namespace esas::cpabe;

namespace {

TEST(Policy, ParsesGates) {
  const auto t = parse_policy("and(doctor, or(cardiology, 2-of(a, b, c)))");
  EXPECT_EQ(t.to_string(), "and(doctor, or(cardiology, 2-of(a, b, c)))");
  EXPECT_EQ(t.leaves(), (std::vector<std::string>{"doctor", "cardiology", "a", "b", "c"}));
  EXPECT_EQ(t.depth(), 4u);
  EXPECT_EQ(t.root().threshold, 2u);
  EXPECT_EQ(t.root().children[1].threshold, 1u);
  EXPECT_EQ(t.root().children[1].children[1].threshold, 2u);
}

TEST(Policy, SingleAttributeAndWhitespace) {
  const auto t = parse_policy("  nurse ");
  EXPECT_TRUE(t.root().is_leaf());
  EXPECT_EQ(t.to_string(), "nurse");
  EXPECT_EQ(parse_policy("and( a ,b )"), parse_policy("and(a,b)"));
  EXPECT_EQ(parse_policy("dept:icu").leaves().front(), "dept:icu");
}

TEST(Policy, AttributesAreCaseSensitive) {
  EXPECT_NE(parse_policy("Doctor"), parse_policy("doctor"));
}

TEST(Policy, SyntaxErrorsCarryPosition) {
  const std::pair<std::string, std::size_t> cases[] = {
      {"and(doctor,", 11},
      {"and(doctor cardiology)", 11},
      {"", 0},
      {"xor(a,b)", 0},
      {"and(a,b))", 8},
      {"and()", 4},
  };
  for (const auto& [text, pos] : cases) {
    try {
      parse_policy(text);
      ADD_FAILURE() << "accepted: " << text;
    } catch (const PolicySyntaxError& e) {
      EXPECT_EQ(e.position(), pos) << text << ": " << e.what();
    }
  }
}

TEST(Policy, ThresholdOutOfBounds) {
  EXPECT_THROW(parse_policy("3-of(a, b)"), InvalidArgument);
  EXPECT_THROW(parse_policy("0-of(a, b)"), InvalidArgument);
  EXPECT_NO_THROW(parse_policy("2-of(a, b)"));
}

TEST(Policy, TreeConstructorValidates) {
  EXPECT_THROW(AccessTree(PolicyNode::leaf("bad name")), InvalidArgument);
  EXPECT_THROW(AccessTree(PolicyNode::gate(3, {PolicyNode::leaf("a"), PolicyNode::leaf("b")})), InvalidArgument);
}

// Canonical text and binary form both round-trip for random trees.
TEST(Policy, RoundTripProperty) {
  SeededRandom rng(11);
  const auto universe = testkit::attribute_universe(8);
  for (int i = 0; i < 300; ++i) {
    const auto t = testkit::random_tree(rng, 6, 3, universe);
    ASSERT_LE(t.depth(), 3u);
    ASSERT_LE(t.leaf_count(), 6u);
    EXPECT_EQ(parse_policy(t.to_string()), t) << t.to_string();
    ByteWriter w;
    t.write(w);
    ByteReader r(w.data());
    EXPECT_EQ(AccessTree::read(r), t);
  }
}

TEST(Policy, ReadRejectsInvalidTrees) {
  ByteWriter w;
  w.u8(1);
  w.u32(5);  // threshold larger than child count
  w.u32(1);
  w.u8(0);
  w.str("a");
  ByteReader r(w.data());
  EXPECT_THROW(AccessTree::read(r), FormatError);
}

TEST(Policy, OracleAgreesOnHandCases) {
  const auto t = parse_policy("and(doctor, or(cardiology, 2-of(a, b, c)))");
  EXPECT_TRUE(testkit::oracle_satisfies(t.root(), {"doctor", "cardiology"}));
  EXPECT_TRUE(testkit::oracle_satisfies(t.root(), {"doctor", "a", "c"}));
  EXPECT_FALSE(testkit::oracle_satisfies(t.root(), {"doctor", "a"}));
  EXPECT_FALSE(testkit::oracle_satisfies(t.root(), {"cardiology", "a", "b", "c"}));
}

}  // namespace
