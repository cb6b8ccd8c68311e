#include <gtest/gtest.h>

#include "esas/errors.hpp"
#include "esas/semantic.hpp"
#include "support.hpp"

using namespace esas;
using namespace esas::semantic;

namespace {

std::vector<Triple> T(std::initializer_list<std::array<const char*, 3>> rows) {
  std::vector<Triple> out;
  for (const auto& r : rows) out.push_back(Triple::make(r[0], r[1], r[2]));
  return out;
}

TEST(Triple, CanonicalForm) {
  const auto t = Triple::make("  Go ", "Dest", "LONDON");
  EXPECT_EQ(t.head, "go");
  EXPECT_EQ(t.relation, "dest");
  EXPECT_EQ(t.tail, "london");
  EXPECT_EQ(t.to_string(), "[go, dest, london]");
  EXPECT_THROW(Triple::make("", "a", "b"), InvalidArgument);
  EXPECT_THROW(Triple::make("a", " ", "b"), InvalidArgument);
  EXPECT_THROW(Triple::make("a\tb", "r", "c"), InvalidArgument);
}

TEST(Extract, AmyExample) {
  const auto got = extract_triples("Amy is going to London by train", ExtractionMode::ThemeSentence);
  EXPECT_EQ(got, T({{"go", "agent", "amy"}, {"go", "dest", "london"}, {"go", "inst", "train"}}));
}

TEST(Extract, EmptyText) {
  EXPECT_TRUE(extract_triples("", ExtractionMode::AllSentences).empty());
  EXPECT_TRUE(extract_triples("  ...  ", ExtractionMode::ThemeSentence).empty());
}

TEST(Extract, RoleRules) {
  EXPECT_EQ(extract_sentence("Bob drove his car to Paris"),
            T({{"drive", "agent", "bob"}, {"drive", "obj", "car"}, {"drive", "dest", "paris"}}));
  EXPECT_EQ(extract_sentence("The doctor treated the patient with antibiotics"),
            T({{"treat", "agent", "doctor"}, {"treat", "obj", "patient"}, {"treat", "inst", "antibiotics"}}));
  EXPECT_EQ(extract_sentence("Alice is a nurse"), T({{"be", "agent", "alice"}, {"be", "attr", "nurse"}}));
  EXPECT_EQ(extract_sentence("John will travel to Rome via Milan"),
            T({{"travel", "agent", "john"}, {"travel", "dest", "rome"}, {"travel", "inst", "milan"}}));
  EXPECT_EQ(extract_sentence("Researchers studied cancer cells in the lab"),
            T({{"study", "agent", "researchers"}, {"study", "obj", "cells"}}));
}

TEST(Extract, Deterministic) {
  const std::string text = "The nurse sends the report to the clinic. Amy is going to London by train.";
  EXPECT_EQ(extract_triples(text, ExtractionMode::AllSentences), extract_triples(text, ExtractionMode::AllSentences));
}

// Theme mode keeps exactly the argmax-score sentence's triples.
TEST(Extract, ThemeSentenceIsArgmax) {
  const std::vector<std::string> docs = {
      "Bob ran. Amy is going to London by train.",
      "Amy is going to London by train. Bob drove his old car to Paris with Carl.",
      "Alice is a nurse. Bob is a doctor.",
      "The doctor treated the patient with antibiotics! Amy went home?",
  };
  for (const auto& d : docs) {
    const auto sentences = split_sentences(d);
    std::size_t best = 0;
    for (std::size_t i = 1; i < sentences.size(); ++i) {
      if (sentence_score(sentences[i]) > sentence_score(sentences[best])) best = i;
    }
    EXPECT_EQ(extract_triples(d, ExtractionMode::ThemeSentence), extract_sentence(sentences[best])) << d;
    std::vector<Triple> all;
    for (const auto& s : sentences) {
      auto t = extract_sentence(s);
      all.insert(all.end(), t.begin(), t.end());
    }
    EXPECT_EQ(extract_triples(d, ExtractionMode::AllSentences), all) << d;
  }
}

TEST(Extract, TieGoesToEarliestSentence) {
  EXPECT_EQ(extract_triples("Alice is a nurse. Bob is a doctor.", ExtractionMode::ThemeSentence),
            T({{"be", "agent", "alice"}, {"be", "attr", "nurse"}}));
}

TEST(Lemmatize, Forms) {
  const std::pair<const char*, const char*> cases[] = {
      {"going", "go"},    {"went", "go"},     {"drove", "drive"}, {"running", "run"},
      {"studied", "study"}, {"treated", "treat"}, {"moves", "move"}, {"carries", "carry"},
      {"arrived", "arrive"}, {"watches", "watch"}, {"is", "be"},
  };
  for (const auto& [in, out] : cases) EXPECT_EQ(lemmatize_verb(in), out) << in;
}

TEST(Tokenize, Basics) {
  EXPECT_EQ(tokenize("Amy's car, (new)!"), (std::vector<std::string>{"amy's", "car", "new"}));
  EXPECT_EQ(split_sentences("A b. C d! E?").size(), 3u);
}

TEST(Mode, Parse) {
  EXPECT_EQ(parse_mode("theme"), ExtractionMode::ThemeSentence);
  EXPECT_EQ(parse_mode("all"), ExtractionMode::AllSentences);
  EXPECT_THROW(parse_mode("some"), InvalidArgument);
  EXPECT_EQ(to_string(ExtractionMode::AllSentences), "all");
}

TEST(Vocabulary, InitialState) {
  Vocabulary v(10);
  EXPECT_EQ(v.version(), 0u);
  const auto doc = T({{"go", "agent", "amy"}, {"go", "dest", "london"}, {"go", "inst", "train"}});
  v = update_vocabulary(v, doc);
  EXPECT_EQ(v.size(), 3u);
  EXPECT_EQ(v.version(), 1u);
  EXPECT_EQ(v.document_count(), 1u);
  EXPECT_EQ(v.dimension_of(doc[1]), 2u);
  EXPECT_THROW(Vocabulary(0), InvalidArgument);
}

TEST(Vocabulary, ReingestKeepsDimensions) {
  const auto doc = T({{"go", "agent", "amy"}, {"go", "dest", "london"}});
  auto v = update_vocabulary(Vocabulary(10), doc);
  v = update_vocabulary(v, doc);
  EXPECT_EQ(v.size(), 2u);
  EXPECT_EQ(v.version(), 1u);
  EXPECT_EQ(v.entry(1).document_frequency, 2u);
  EXPECT_EQ(v.document_count(), 2u);
}

TEST(Vocabulary, DimensionsStableAcrossUpdates) {
  SeededRandom rng(3);
  Vocabulary v(64);
  std::map<Triple, std::size_t> seen;
  for (int d = 0; d < 30; ++d) {
    std::vector<Triple> doc;
    for (int i = 0; i < 3; ++i) {
      doc.push_back(Triple::make("v" + std::to_string(rng.uniform_int(0, 5)), "obj",
                                 "x" + std::to_string(rng.uniform_int(0, 7))));
    }
    v = update_vocabulary(v, doc);
    for (const auto& [t, dim] : seen) ASSERT_EQ(v.dimension_of(t), dim);
    for (const auto& t : doc) seen.emplace(t, *v.dimension_of(t));
    for (const auto& e : v.entries()) ASSERT_LE(e.document_frequency, v.document_count());
  }
}

TEST(Vocabulary, CapacityEnforced) {
  const auto v = update_vocabulary(Vocabulary(2), T({{"a", "r", "b"}}));
  EXPECT_THROW(update_vocabulary(v, T({{"c", "r", "d"}, {"e", "r", "f"}})), ProtocolError);
  EXPECT_NO_THROW(update_vocabulary(v, T({{"c", "r", "d"}, {"a", "r", "b"}})));
}

TEST(Vocabulary, EnvelopeRoundTrip) {
  auto v = update_vocabulary(Vocabulary(5), T({{"go", "agent", "amy"}, {"go", "dest", "london"}}));
  v = update_vocabulary(v, T({{"go", "agent", "amy"}}));
  const auto back = Vocabulary::from_envelope(v.to_envelope());
  EXPECT_EQ(back.to_envelope(), v.to_envelope());
  EXPECT_EQ(back.entry(1).document_frequency, 2u);
  EXPECT_EQ(back.capacity(), 5u);
}

TEST(Vectorize, Binary) {
  const auto doc = T({{"a", "r", "b"}, {"c", "r", "d"}, {"a", "r", "b"}});
  const auto v = update_vocabulary(Vocabulary(4), doc);
  const auto pv = vectorize_binary(doc, v);
  EXPECT_EQ(pv.values, (knnse::Vector{1, 1, 0, 0}));
  EXPECT_EQ(pv.vocabulary_version, v.version());
  EXPECT_EQ(vectorize_binary({}, v).values, knnse::Vector(4));
  EXPECT_THROW(vectorize_binary(T({{"x", "y", "z"}}), v), InvalidArgument);
}

knnse::Rational micro12(const char* digits) {
  knnse::Rational q(mpz_class(digits), mpz_class("1000000000000"));
  q.canonicalize();
  return q;
}

TEST(Idf, HandValues) {
  // ln 2, ln 3, ln 4 to 12 fractional digits
  EXPECT_EQ(idf(1, 1), micro12("693147180560"));
  EXPECT_EQ(idf(2, 1), micro12("1098612288668"));
  EXPECT_EQ(idf(3, 1), micro12("1386294361120"));
  EXPECT_THROW(idf(1, 0), InvalidArgument);
  EXPECT_THROW(idf(1, 2), InvalidArgument);
}

TEST(Vectorize, TfIdfSingleDocument) {
  const auto doc = T({{"go", "dest", "london"}});
  const auto v = update_vocabulary(Vocabulary(3), doc);
  const auto pv = vectorize_tfidf(doc, v);
  EXPECT_EQ(pv.values[0], idf(1, 1));
  EXPECT_EQ(pv.values[1], 0);
}

// TF entries (value / idf) of a non-empty document sum to 1.
TEST(Vectorize, TfNormalization) {
  SeededRandom rng(4);
  Vocabulary v(40);
  for (int d = 0; d < 15; ++d) {
    std::vector<Triple> doc;
    const auto len = rng.uniform_int(1, 6);
    for (int i = 0; i < len; ++i) doc.push_back(Triple::make("h", "r", "t" + std::to_string(rng.uniform_int(0, 6))));
    v = update_vocabulary(v, doc);
    const auto pv = vectorize_tfidf(doc, v);
    knnse::Rational sum = 0;
    for (std::size_t dim = 1; dim <= v.size(); ++dim) {
      if (pv.values[dim - 1] != 0) sum += pv.values[dim - 1] / idf(v.document_count(), v.entry(dim).document_frequency);
    }
    EXPECT_EQ(sum, 1);
  }
}

TEST(Vectorize, UniformDocument) {
  const auto doc = T({{"a", "r", "b"}, {"c", "r", "d"}, {"e", "r", "f"}});
  const auto v = update_vocabulary(Vocabulary(3), doc);
  const auto pv = vectorize_tfidf(doc, v);
  for (const auto& x : pv.values) EXPECT_EQ(x, knnse::Rational(1, 3) * idf(1, 1));
}

TEST(QueryVector, KnownAndUnknownTriples) {
  const auto doc = extract_triples("Amy is going to London by train", ExtractionMode::AllSentences);
  auto v = update_vocabulary(Vocabulary(6), doc);
  v = update_vocabulary(v, T({{"be", "agent", "bob"}}));
  const auto q = query_to_vector("Amy is going to London.", v);
  EXPECT_EQ(q.values, (knnse::Vector{1, 1, 0, 0, 0, 0}));
  EXPECT_EQ(query_to_vector("Zed flew to Mars", v).values, knnse::Vector(6));
  EXPECT_EQ(query_to_vector("", v).values, knnse::Vector(6));
}

TEST(TripleFile, ParseAndFormat) {
  const auto t = parse_triple_file("go\tagent\tamy\n\nGo\tDest\tLondon\r\n");
  EXPECT_EQ(t, T({{"go", "agent", "amy"}, {"go", "dest", "london"}}));
  EXPECT_EQ(parse_triple_file(format_triple_file(t)), t);
  EXPECT_THROW(parse_triple_file("go agent amy\n"), FormatError);
  EXPECT_THROW(parse_triple_file("a\tb\tc\td\n"), FormatError);
  EXPECT_THROW(parse_triple_file("a\t\tc\n"), FormatError);
}

}  // namespace
