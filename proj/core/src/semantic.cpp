#include "esas/semantic.hpp"

#include <mpfr.h>

#include <algorithm>
#include <cctype>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "esas/errors.hpp"

namespace esas::semantic {

namespace {

constexpr std::uint32_t kEnvelopeVersion = 1;
constexpr int kIdfDigits = 12;

const std::unordered_set<std::string_view> kDeterminers = {
    "a", "an", "the", "this", "that", "these", "those", "my", "your", "his", "her",
    "its", "our", "their", "some", "any", "every", "each", "all", "no", "another"};

const std::unordered_set<std::string_view> kCopulas = {"is", "am", "are", "was", "were", "be", "been", "being"};

const std::unordered_set<std::string_view> kAuxiliaries = {
    "is",    "am",  "are",   "was",    "were", "be",  "been", "being", "will", "shall", "would",
    "should", "can", "could", "may",   "might", "must", "do",  "does",  "did",  "has",   "have", "had"};

const std::unordered_set<std::string_view> kConjunctions = {"and", "or", "but", "then", "so"};

const std::unordered_set<std::string_view> kSkippable = {"not", "also", "already", "just", "often", "never"};

// Preposition -> role; an empty role marks a boundary whose phrase is dropped.
const std::unordered_map<std::string_view, std::string_view> kPrepositions = {
    {"to", "dest"},    {"into", "dest"},  {"onto", "dest"},   {"toward", "dest"}, {"towards", "dest"},
    {"by", "inst"},    {"with", "inst"},  {"via", "inst"},    {"in", ""},         {"on", ""},
    {"at", ""},        {"from", ""},      {"for", ""},        {"of", ""},         {"about", ""},
    {"under", ""},     {"over", ""},      {"through", ""},    {"near", ""},       {"after", ""},
    {"before", ""},    {"during", ""},    {"without", ""},    {"across", ""},     {"against", ""}};

const std::unordered_map<std::string_view, std::string_view> kIrregular = {
    {"went", "go"},      {"gone", "go"},       {"goes", "go"},      {"ate", "eat"},       {"eaten", "eat"},
    {"bought", "buy"},   {"brought", "bring"}, {"came", "come"},    {"did", "do"},        {"done", "do"},
    {"does", "do"},      {"drove", "drive"},   {"driven", "drive"}, {"flew", "fly"},      {"flown", "fly"},
    {"found", "find"},   {"gave", "give"},     {"given", "give"},   {"got", "get"},       {"had", "have"},
    {"has", "have"},     {"kept", "keep"},     {"knew", "know"},    {"known", "know"},    {"left", "leave"},
    {"made", "make"},    {"met", "meet"},      {"paid", "pay"},     {"ran", "run"},       {"rode", "ride"},
    {"ridden", "ride"},  {"said", "say"},      {"sold", "sell"},    {"sent", "send"},     {"saw", "see"},
    {"seen", "see"},     {"sat", "sit"},       {"spoke", "speak"},  {"spoken", "speak"},  {"spent", "spend"},
    {"stood", "stand"},  {"took", "take"},     {"taken", "take"},   {"taught", "teach"},  {"told", "tell"},
    {"thought", "think"}, {"wrote", "write"},  {"written", "write"}, {"won", "win"},       {"built", "build"},
    {"held", "hold"},    {"led", "lead"},      {"lost", "lose"},    {"began", "begin"},   {"begun", "begin"},
    {"is", "be"},        {"am", "be"},         {"are", "be"},       {"was", "be"},        {"were", "be"},
    {"been", "be"},      {"being", "be"}};

// Base forms the lemmatizer uses to restore a dropped final "e" and to
// recognise bare or -s verbs.
const std::unordered_set<std::string_view> kVerbLexicon = {
    "go",       "take",     "make",    "write",   "drive",   "ride",     "travel",  "send",    "buy",
    "sell",     "study",    "treat",   "visit",   "read",    "love",     "like",    "use",     "fly",
    "move",     "give",     "carry",   "eat",     "see",     "meet",     "run",     "walk",    "teach",
    "learn",    "diagnose", "prescribe", "publish", "store", "encrypt",  "search",  "analyze", "analyse",
    "research", "work",     "live",    "leave",   "arrive",  "bring",    "develop", "build",   "create",
    "own",      "manage",   "share",   "upload",  "download", "examine", "operate", "cure",    "require",
    "produce",  "provide",  "receive", "return",  "hire",    "join",     "open",    "close",   "describe",
    "contain",  "include",  "measure", "monitor", "report",  "record",   "review",  "test",    "trade",
    "invest",   "cook",     "play",    "watch",   "win",     "lose",     "find",    "keep",    "know",
    "sit",      "stand",    "speak",   "spend",   "tell",    "think",    "hold",    "lead",    "begin",
    "pay",      "come",     "get",     "have",    "do",      "say",      "outsource", "query", "sign",
    "archive",  "schedule", "ship",    "deliver", "approve", "reject",   "submit",  "save",    "serve"};

bool is_boundary(std::string_view tok) {
  return kPrepositions.contains(tok) || kConjunctions.contains(tok) || kAuxiliaries.contains(tok);
}

bool is_stopword(std::string_view tok) {
  return kDeterminers.contains(tok) || kAuxiliaries.contains(tok) || kConjunctions.contains(tok) ||
         kPrepositions.contains(tok) || kSkippable.contains(tok);
}

bool is_consonant(char c) { return std::string_view("aeiou").find(c) == std::string_view::npos; }

std::string strip_suffix(std::string_view word, std::size_t n) {
  std::string stem(word.substr(0, word.size() - n));
  const std::size_t k = stem.size();
  if (k >= 3 && stem[k - 1] == stem[k - 2] && is_consonant(stem[k - 1]) && stem[k - 1] != 'l' &&
      stem[k - 1] != 's') {
    // running -> run, stopped -> stop
    stem.pop_back();
    return stem;
  }
  if (kVerbLexicon.contains(stem + "e")) return stem + "e";
  return stem;
}

bool looks_like_verb(std::string_view tok, bool after_subject) {
  if (is_stopword(tok)) return false;
  if (kIrregular.contains(tok)) return true;
  const std::string lemma = lemmatize_verb(tok);
  if (kVerbLexicon.contains(lemma)) return true;
  if (!after_subject) return false;
  return (tok.size() > 4 && tok.ends_with("ing")) || (tok.size() > 3 && tok.ends_with("ed"));
}

// Head of the phrase starting at `from`: last content token before the next
// boundary. `end` receives the first index after the phrase.
std::optional<std::string> phrase_head(const std::vector<std::string>& toks, std::size_t from, std::size_t& end) {
  std::optional<std::string> head;
  std::size_t i = from;
  for (; i < toks.size(); ++i) {
    const auto& t = toks[i];
    if (is_boundary(t)) break;
    if (kDeterminers.contains(t) || kSkippable.contains(t)) continue;
    head = t;
  }
  end = i;
  return head;
}

std::string trim_lower(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b])) != 0) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1])) != 0) --e;
  std::string out(s.substr(b, e - b));
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

Triple Triple::make(std::string_view head, std::string_view relation, std::string_view tail) {
  Triple t{trim_lower(head), trim_lower(relation), trim_lower(tail)};
  for (const auto* f : {&t.head, &t.relation, &t.tail}) {
    if (f->empty()) throw InvalidArgument("triple fields must be non-empty");
    if (f->find_first_of("\t\n\r") != std::string::npos) {
      throw InvalidArgument("triple fields must not contain tabs or newlines");
    }
  }
  return t;
}

std::string Triple::to_string() const { return "[" + head + ", " + relation + ", " + tail + "]"; }

std::string_view to_string(ExtractionMode mode) {
  return mode == ExtractionMode::ThemeSentence ? "theme" : "all";
}

ExtractionMode parse_mode(std::string_view text) {
  if (text == "theme") return ExtractionMode::ThemeSentence;
  if (text == "all") return ExtractionMode::AllSentences;
  throw InvalidArgument("unknown extraction mode '" + std::string(text) + "' (expected theme or all)");
}

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!tokenize(cur).empty()) out.push_back(cur);
    cur.clear();
  };
  for (char c : text) {
    if (c == '.' || c == '!' || c == '?') {
      flush();
    } else {
      cur.push_back(c);
    }
  }
  flush();
  return out;
}

std::vector<std::string> tokenize(std::string_view sentence) {
  std::vector<std::string> toks;
  std::string cur;
  auto push = [&] {
    while (!cur.empty() && (cur.back() == '\'' || cur.back() == '-')) cur.pop_back();
    if (!cur.empty()) toks.push_back(cur);
    cur.clear();
  };
  for (char c : sentence) {
    const auto uc = static_cast<unsigned char>(c);
    if (std::isalnum(uc) != 0 || uc >= 0x80 || ((c == '\'' || c == '-') && !cur.empty())) {
      cur.push_back(static_cast<char>(std::tolower(uc)));
    } else {
      push();
    }
  }
  push();
  return toks;
}

std::size_t sentence_score(std::string_view sentence) {
  const auto toks = tokenize(sentence);
  return static_cast<std::size_t>(std::count_if(toks.begin(), toks.end(), [](const std::string& t) {
    return !is_stopword(t);
  }));
}

std::string lemmatize_verb(std::string_view word) {
  if (auto it = kIrregular.find(word); it != kIrregular.end()) return std::string(it->second);
  if (kVerbLexicon.contains(word)) return std::string(word);
  if (word.size() > 4 && word.ends_with("ing")) return strip_suffix(word, 3);
  if (word.size() > 4 && word.ends_with("ied")) return std::string(word.substr(0, word.size() - 3)) + "y";
  if (word.size() > 3 && word.ends_with("ed")) {
    if (kVerbLexicon.contains(word.substr(0, word.size() - 1))) return std::string(word.substr(0, word.size() - 1));
    return strip_suffix(word, 2);
  }
  if (word.size() > 3 && word.ends_with("ies")) return std::string(word.substr(0, word.size() - 3)) + "y";
  if (word.size() > 3 && word.ends_with("es")) {
    const auto stem = word.substr(0, word.size() - 2);
    if (stem.ends_with("s") || stem.ends_with("x") || stem.ends_with("z") || stem.ends_with("ch") ||
        stem.ends_with("sh")) {
      return std::string(stem);
    }
  }
  if (word.size() > 2 && word.ends_with("s") && !word.ends_with("ss")) {
    return std::string(word.substr(0, word.size() - 1));
  }
  return std::string(word);
}

std::vector<Triple> extract_sentence(std::string_view sentence) {
  const auto toks = tokenize(sentence);
  if (toks.empty()) return {};

  // Locate the main verb.
  std::optional<std::size_t> verb;
  for (std::size_t i = 0; i < toks.size() && !verb; ++i) {
    const auto& t = toks[i];
    if (kAuxiliaries.contains(t)) {
      std::size_t j = i + 1;
      while (j < toks.size() && kSkippable.contains(toks[j])) ++j;
      if (j < toks.size() && !kAuxiliaries.contains(toks[j]) && looks_like_verb(toks[j], true)) {
        verb = j;
      } else if (j < toks.size() && kAuxiliaries.contains(toks[j])) {
        continue;  // chained auxiliaries: "will be going"
      } else {
        verb = i;
      }
    } else if (i >= 1 && looks_like_verb(t, true)) {
      verb = i;
    }
  }
  if (!verb && toks.size() >= 3 && !is_stopword(toks[1])) verb = 1;
  if (!verb) return {};

  const std::string lemma = lemmatize_verb(toks[*verb]);
  const bool copula = lemma == "be";
  std::vector<Triple> out;

  // Agent: last content token before the verb group.
  for (std::size_t i = *verb; i-- > 0;) {
    if (!is_stopword(toks[i])) {
      out.push_back(Triple::make(lemma, "agent", toks[i]));
      break;
    }
  }

  bool object_taken = false;
  std::size_t i = *verb + 1;
  while (i < toks.size()) {
    const auto& t = toks[i];
    if (auto prep = kPrepositions.find(t); prep != kPrepositions.end()) {
      std::size_t end = i + 1;
      auto head = phrase_head(toks, i + 1, end);
      if (head && !prep->second.empty()) out.push_back(Triple::make(lemma, prep->second, *head));
      i = std::max(end, i + 1);
      continue;
    }
    if (kConjunctions.contains(t) || kAuxiliaries.contains(t) || kSkippable.contains(t)) {
      ++i;
      continue;
    }
    std::size_t end = i;
    auto head = phrase_head(toks, i, end);
    if (head && !object_taken) {
      out.push_back(Triple::make(lemma, copula ? "attr" : "obj", *head));
      object_taken = true;
    }
    i = std::max(end, i + 1);
  }
  return out;
}

std::vector<Triple> extract_triples(std::string_view text, ExtractionMode mode) {
  const auto sentences = split_sentences(text);
  if (sentences.empty()) return {};
  if (mode == ExtractionMode::ThemeSentence) {
    std::size_t best = 0;
    std::size_t best_score = sentence_score(sentences[0]);
    for (std::size_t i = 1; i < sentences.size(); ++i) {
      const auto s = sentence_score(sentences[i]);
      if (s > best_score) {
        best = i;
        best_score = s;
      }
    }
    return extract_sentence(sentences[best]);
  }
  std::vector<Triple> out;
  for (const auto& s : sentences) {
    auto t = extract_sentence(s);
    out.insert(out.end(), t.begin(), t.end());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Vocabulary

Vocabulary::Vocabulary(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw InvalidArgument("vocabulary capacity must be at least 1");
}

std::optional<std::size_t> Vocabulary::dimension_of(const Triple& t) const {
  if (auto it = index_.find(t); it != index_.end()) return it->second;
  return std::nullopt;
}

const Vocabulary::Entry& Vocabulary::entry(std::size_t dimension) const {
  if (dimension == 0 || dimension > entries_.size()) throw InvalidArgument("dimension out of range");
  return entries_[dimension - 1];
}

Vocabulary update_vocabulary(const Vocabulary& vocab, const std::vector<Triple>& document) {
  std::set<Triple> distinct(document.begin(), document.end());
  std::size_t fresh = 0;
  for (const auto& t : distinct) {
    if (!vocab.index_.contains(t)) ++fresh;
  }
  if (vocab.entries_.size() + fresh > vocab.capacity_) {
    throw ProtocolError("vocabulary capacity " + std::to_string(vocab.capacity_) + " exceeded: document adds " +
                        std::to_string(fresh) + " new triples to " + std::to_string(vocab.entries_.size()));
  }
  Vocabulary out = vocab;
  // New triples take dimensions in first-occurrence order.
  for (const auto& t : document) {
    if (!out.index_.contains(t)) {
      out.entries_.push_back({t, 0});
      out.index_.emplace(t, out.entries_.size());
    }
  }
  for (const auto& t : distinct) ++out.entries_[out.index_.at(t) - 1].document_frequency;
  ++out.documents_;
  if (fresh > 0) ++out.version_;
  return out;
}

std::string Vocabulary::to_envelope() const {
  ByteWriter w;
  w.u64(capacity_);
  w.u64(version_);
  w.u64(documents_);
  w.u32(static_cast<std::uint32_t>(entries_.size()));
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    w.u32(static_cast<std::uint32_t>(i + 1));
    w.str(entries_[i].triple.head);
    w.str(entries_[i].triple.relation);
    w.str(entries_[i].triple.tail);
    w.u64(entries_[i].document_frequency);
  }
  return wrap_envelope("VOCABULARY", kEnvelopeVersion, w.data());
}

Vocabulary Vocabulary::from_envelope(std::string_view text) {
  const Bytes payload = unwrap_envelope(text, "VOCABULARY", kEnvelopeVersion);
  ByteReader r(payload);
  const auto capacity = r.u64();
  if (capacity == 0 || capacity > (1u << 24)) throw FormatError("bad vocabulary capacity");
  Vocabulary v(capacity);
  v.version_ = r.u64();
  v.documents_ = r.u64();
  const auto n = r.count(28);
  if (n > capacity) throw FormatError("vocabulary larger than its capacity");
  for (std::uint32_t i = 0; i < n; ++i) {
    if (r.u32() != i + 1) throw FormatError("vocabulary dimensions out of order");
    auto head = r.str();
    auto rel = r.str();
    auto tail = r.str();
    Triple t;
    try {
      t = Triple::make(head, rel, tail);
    } catch (const InvalidArgument& e) {
      throw FormatError(e.what());
    }
    if (t.head != head || t.relation != rel || t.tail != tail) throw FormatError("non-canonical triple");
    const auto df = r.u64();
    if (df == 0 || df > v.documents_) throw FormatError("document frequency out of range");
    if (!v.index_.emplace(t, i + 1).second) throw FormatError("duplicate triple in vocabulary");
    v.entries_.push_back({std::move(t), df});
  }
  r.expect_end();
  return v;
}

// ---------------------------------------------------------------------------
// Vectorization

namespace {

std::size_t require_dimension(const Vocabulary& vocab, const Triple& t) {
  auto d = vocab.dimension_of(t);
  if (!d) throw InvalidArgument("triple " + t.to_string() + " is not in the vocabulary");
  return *d;
}

}  // namespace

knnse::PlainVector vectorize_binary(const std::vector<Triple>& triples, const Vocabulary& vocab) {
  knnse::PlainVector v{knnse::Vector(vocab.capacity()), vocab.version()};
  for (const auto& t : triples) v.values[require_dimension(vocab, t) - 1] = 1;
  return v;
}

knnse::Rational idf(std::uint64_t documents, std::uint64_t document_frequency) {
  if (document_frequency == 0 || document_frequency > documents) {
    throw InvalidArgument("document frequency out of range");
  }
  mpfr_t x;
  mpfr_init2(x, 256);
  mpfr_set_ui(x, static_cast<unsigned long>(documents), MPFR_RNDN);
  mpfr_div_ui(x, x, static_cast<unsigned long>(document_frequency), MPFR_RNDN);
  mpfr_add_ui(x, x, 1, MPFR_RNDN);
  mpfr_log(x, x, MPFR_RNDN);
  mpz_class scale;
  mpz_ui_pow_ui(scale.get_mpz_t(), 10, kIdfDigits);
  mpfr_mul_z(x, x, scale.get_mpz_t(), MPFR_RNDN);
  mpz_class rounded;
  mpfr_get_z(rounded.get_mpz_t(), x, MPFR_RNDN);
  mpfr_clear(x);
  knnse::Rational q(rounded, scale);
  q.canonicalize();
  return q;
}

knnse::PlainVector vectorize_tfidf(const std::vector<Triple>& triples, const Vocabulary& vocab) {
  knnse::PlainVector v{knnse::Vector(vocab.capacity()), vocab.version()};
  if (triples.empty()) return v;
  std::map<std::size_t, std::uint64_t> counts;
  for (const auto& t : triples) ++counts[require_dimension(vocab, t)];
  const auto total = static_cast<unsigned long>(triples.size());
  for (const auto& [dim, count] : counts) {
    knnse::Rational tf(static_cast<unsigned long>(count), total);
    tf.canonicalize();
    v.values[dim - 1] = tf * idf(vocab.document_count(), vocab.entry(dim).document_frequency);
  }
  return v;
}

knnse::PlainVector query_to_vector(std::string_view query, const Vocabulary& vocab) {
  knnse::PlainVector v{knnse::Vector(vocab.capacity()), vocab.version()};
  for (const auto& t : extract_triples(query, ExtractionMode::AllSentences)) {
    if (auto d = vocab.dimension_of(t)) v.values[*d - 1] = 1;
  }
  return v;
}

// ---------------------------------------------------------------------------
// Triple files

std::vector<Triple> parse_triple_file(std::string_view content) {
  std::vector<Triple> out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= content.size()) {
    auto nl = content.find('\n', start);
    if (nl == std::string_view::npos) nl = content.size();
    auto line = content.substr(start, nl - start);
    start = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim_lower(line).empty()) continue;
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string_view::npos ? t1 : line.find('\t', t1 + 1);
    if (t1 == std::string_view::npos || t2 == std::string_view::npos ||
        line.find('\t', t2 + 1) != std::string_view::npos) {
      throw FormatError("triple file line " + std::to_string(line_no) + ": expected head<TAB>relation<TAB>tail");
    }
    try {
      out.push_back(Triple::make(line.substr(0, t1), line.substr(t1 + 1, t2 - t1 - 1), line.substr(t2 + 1)));
    } catch (const InvalidArgument& e) {
      throw FormatError("triple file line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::string format_triple_file(const std::vector<Triple>& triples) {
  std::string out;
  for (const auto& t : triples) out += t.head + '\t' + t.relation + '\t' + t.tail + '\n';
  return out;
}

}  // namespace esas::semantic
