#include <gtest/gtest.h>

#include <set>

#include "esas/errors.hpp"
#include "esas/random.hpp"
#include "esas/serialization.hpp"

using namespace esas;

namespace {

TEST(ByteCodec, RoundTrip) {
  ByteWriter w;
  w.u8(7);
  w.u32(0xDEADBEEF);
  w.u64(1ull << 40);
  w.str("hello");
  w.bytes(Bytes{1, 2, 3});
  ByteReader r(w.data());
  EXPECT_EQ(r.u8(), 7);
  EXPECT_EQ(r.u32(), 0xDEADBEEFu);
  EXPECT_EQ(r.u64(), 1ull << 40);
  EXPECT_EQ(r.str(), "hello");
  EXPECT_EQ(r.bytes(), (Bytes{1, 2, 3}));
  EXPECT_TRUE(r.at_end());
  EXPECT_NO_THROW(r.expect_end());
}

TEST(ByteCodec, TruncationAndTrailingBytes) {
  ByteWriter w;
  w.str("abc");
  auto data = w.data();
  const std::span<const std::uint8_t> prefix(data.data(), data.size() - 1);
  ByteReader short_reader(prefix);
  EXPECT_THROW(short_reader.str(), FormatError);

  data.push_back(0);
  ByteReader r(data);
  r.str();
  EXPECT_THROW(r.expect_end(), FormatError);
}

TEST(ByteCodec, CountRejectsImpossibleLengths) {
  ByteWriter w;
  w.u32(1000);
  w.u8(0);
  ByteReader r(w.data());
  EXPECT_THROW(r.count(4), FormatError);
}

TEST(Base64, KnownVectors) {
  // RFC 4648 section 10
  const std::pair<std::string, std::string> cases[] = {
      {"", ""},         {"f", "Zg=="},         {"fo", "Zm8="},         {"foo", "Zm9v"},
      {"foob", "Zm9vYg=="}, {"fooba", "Zm9vYmE="}, {"foobar", "Zm9vYmFy"},
  };
  for (const auto& [plain, enc] : cases) {
    const Bytes b(plain.begin(), plain.end());
    EXPECT_EQ(base64_encode(b), enc);
    EXPECT_EQ(base64_decode(enc), b);
  }
}

TEST(Base64, RejectsNonCanonical) {
  EXPECT_THROW(base64_decode("Zg="), FormatError);
  EXPECT_THROW(base64_decode("Zh=="), FormatError);  // nonzero padding bits
  EXPECT_THROW(base64_decode("Z!=="), FormatError);
}

TEST(Envelope, RoundTripAndChecks) {
  SeededRandom rng(1);
  const auto payload = rng.bytes(200);
  const auto text = wrap_envelope("TEST-THING", 3, payload);
  EXPECT_TRUE(text.starts_with("-----BEGIN ESAS TEST-THING v3-----\n"));
  EXPECT_EQ(envelope_tag(text), "TEST-THING");
  EXPECT_EQ(unwrap_envelope(text, "TEST-THING", 3), payload);
  EXPECT_THROW(unwrap_envelope(text, "OTHER", 3), FormatError);
  EXPECT_THROW(unwrap_envelope(text, "TEST-THING", 4), FormatError);
  EXPECT_THROW(unwrap_envelope("not an envelope", "TEST-THING", 3), FormatError);
  EXPECT_NE(text.find("\n-----END ESAS TEST-THING-----"), std::string::npos);
}

TEST(Hex, Lowercase) { EXPECT_EQ(to_hex(Bytes{0x00, 0xAB, 0x10}), "00ab10"); }

TEST(Random, SeededIsReproducible) {
  SeededRandom a(42);
  SeededRandom b(42);
  SeededRandom c(43);
  const auto x = a.bytes(64);
  EXPECT_EQ(x, b.bytes(64));
  EXPECT_NE(x, c.bytes(64));
  SeededRandom s1("seed");
  SeededRandom s2("seed");
  EXPECT_EQ(s1.next_u64(), s2.next_u64());
}

TEST(Random, UniformIntStaysInRangeAndCoversIt) {
  SeededRandom rng(5);
  std::set<std::int64_t> seen;
  for (int i = 0; i < 2000; ++i) {
    const auto v = rng.uniform_int(-3, 3);
    ASSERT_GE(v, -3);
    ASSERT_LE(v, 3);
    seen.insert(v);
  }
  EXPECT_EQ(seen.size(), 7u);
  EXPECT_EQ(rng.uniform_int(5, 5), 5);
  EXPECT_THROW(rng.uniform_int(2, 1), InvalidArgument);
}

TEST(Random, SystemRandomProducesBytes) {
  SystemRandom rng;
  EXPECT_NE(rng.bytes(32), rng.bytes(32));
}

}  // namespace
