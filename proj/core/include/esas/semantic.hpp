#pragma once

// Text to conceptual-graph triples to vectors.
//
// Extraction is a small deterministic rule set: sentences are split on
// terminal punctuation, the main verb is located with an auxiliary and
// morphology heuristic, and each sentence yields (verb-lemma, role, argument)
// triples with roles agent, dest, inst, obj and attr.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "esas/knnse.hpp"

namespace esas::semantic {

struct Triple {
  std::string head;
  std::string relation;
  std::string tail;

  // Lowercases and trims each field; throws InvalidArgument if any field
  // is empty afterwards or contains a tab or newline.
  static Triple make(std::string_view head, std::string_view relation, std::string_view tail);

  std::string to_string() const;  // "[head, relation, tail]"

  friend auto operator<=>(const Triple&, const Triple&) = default;
  friend bool operator==(const Triple&, const Triple&) = default;
};

enum class ExtractionMode {
  // Only the highest-scoring sentence; vectors are binary.
  ThemeSentence,
  // Every sentence; vectors are TF x IDF.
  AllSentences,
};

std::string_view to_string(ExtractionMode mode);
// Accepts "theme" and "all".
ExtractionMode parse_mode(std::string_view text);

std::vector<std::string> split_sentences(std::string_view text);
std::vector<std::string> tokenize(std::string_view sentence);
// Content-token count used to pick the theme sentence.
std::size_t sentence_score(std::string_view sentence);
std::vector<Triple> extract_sentence(std::string_view sentence);
std::vector<Triple> extract_triples(std::string_view text, ExtractionMode mode);

// Verb lemmatizer used by the extractor.
std::string lemmatize_verb(std::string_view word);

class Vocabulary {
 public:
  struct Entry {
    Triple triple;
    std::uint64_t document_frequency = 0;
  };

  // `capacity` is the fixed vector dimension n; throws InvalidArgument for 0.
  explicit Vocabulary(std::size_t capacity);

  std::size_t capacity() const noexcept { return capacity_; }
  std::size_t size() const noexcept { return entries_.size(); }
  std::uint64_t version() const noexcept { return version_; }
  std::uint64_t document_count() const noexcept { return documents_; }

  // 1-based dimension, if known.
  std::optional<std::size_t> dimension_of(const Triple& t) const;
  const Entry& entry(std::size_t dimension) const;
  const std::vector<Entry>& entries() const noexcept { return entries_; }

  std::string to_envelope() const;
  static Vocabulary from_envelope(std::string_view text);

  friend Vocabulary update_vocabulary(const Vocabulary& vocab, const std::vector<Triple>& document);

 private:
  std::size_t capacity_;
  std::uint64_t version_ = 0;
  std::uint64_t documents_ = 0;
  std::vector<Entry> entries_;
  std::map<Triple, std::size_t> index_;
};

// Registers one document: appends unseen triples, bumps df once per distinct
// triple and the document count. The version increments iff new dimensions
// were added. Throws ProtocolError if the capacity would be exceeded.
Vocabulary update_vocabulary(const Vocabulary& vocab, const std::vector<Triple>& document);

// Vectors have length vocab.capacity(). Both throw InvalidArgument for
// triples not in the vocabulary.
knnse::PlainVector vectorize_binary(const std::vector<Triple>& triples, const Vocabulary& vocab);
knnse::PlainVector vectorize_tfidf(const std::vector<Triple>& triples, const Vocabulary& vocab);

// ln(1 + N / df) rounded to 12 fractional digits, as an exact rational.
knnse::Rational idf(std::uint64_t documents, std::uint64_t document_frequency);

// Binary vector of the query's triples; unknown triples are dropped.
knnse::PlainVector query_to_vector(std::string_view query, const Vocabulary& vocab);

// "head<TAB>relation<TAB>tail" per line; blank lines are ignored.
std::vector<Triple> parse_triple_file(std::string_view content);
std::string format_triple_file(const std::vector<Triple>& triples);

}  // namespace esas::semantic
