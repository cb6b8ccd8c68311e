// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Each criterion carries its own wall-clock budget.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>

#include "esas/entities.hpp"
#include "esas/errors.hpp"
#include "support.hpp"

using namespace esas;
using namespace esas::entities;
using semantic::ExtractionMode;
using semantic::Triple;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;

  void fail(const std::string& why) {
    if (ok) detail = why;
    ok = false;
  }
};

Bytes bytes_of(std::string_view s) { return Bytes(s.begin(), s.end()); }

std::vector<std::string> hit_ids(const std::vector<SearchHit>& hits) {
  std::vector<std::string> out;
  for (const auto& h : hits) out.push_back(h.id);
  return out;
}

std::string join(const std::vector<std::string>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
  return s + "]";
}

template <class T>
const T& pick(RandomSource& rng, const std::vector<T>& v) {
  return v[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(v.size()) - 1))];
}

const std::vector<std::string> kNames = {"amy", "bob", "carol"};
const std::vector<std::string> kCities = {"london", "paris", "rome"};
const std::vector<std::string> kVehicles = {"train", "car"};

std::string capitalize(std::string s) {
  s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

// "<Name> is going to <City> by <vehicle>." with optional parts.
std::string random_sentence(RandomSource& rng) {
  std::string s = capitalize(pick(rng, kNames)) + " is going";
  if (rng.uniform_int(0, 3) != 0) s += " to " + capitalize(pick(rng, kCities));
  if (rng.uniform_int(0, 1) != 0) s += " by " + pick(rng, kVehicles);
  return s + ".";
}

std::vector<Triple> triple_pool() {
  std::vector<Triple> out;
  for (const auto& n : kNames) out.push_back(Triple::make("go", "agent", n));
  for (const auto& c : kCities) out.push_back(Triple::make("go", "dest", c));
  for (const auto& v : kVehicles) out.push_back(Triple::make("go", "inst", v));
  return out;
}

using Clock = std::chrono::steady_clock;

bool report(int number, const std::string& title, double budget_s, const std::function<Outcome()>& body) {
  const auto start = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o.fail(std::string("exception: ") + e.what());
  }
  const double secs = std::chrono::duration<double>(Clock::now() - start).count();
  if (o.ok && secs > budget_s) {
    std::ostringstream ss;
    ss << "time budget exceeded (" << budget_s << " s)";
    o.fail(ss.str());
  }
  std::printf("%s criterion %d: %s (%.2f s)%s%s\n", o.ok ? "PASS" : "FAIL", number, title.c_str(), secs,
              o.ok ? "" : " -- ", o.ok ? "" : o.detail.c_str());
  std::fflush(stdout);
  return o.ok;
}

// 1. score(I, T) == a * (v . q) + r exactly.
Outcome score_identity() {
  Outcome o;
  SeededRandom rng(1001);
  for (int i = 0; i < 1000; ++i) {
    const auto n = static_cast<std::size_t>(rng.uniform_int(1, 16));
    const auto key = knnse::owner_keygen(n, rng);
    const knnse::PlainVector v{testkit::random_vector(rng, n, 1000), 0};
    const knnse::PlainVector q{testkit::random_vector(rng, n, 1000), 0};
    const auto td = knnse::gen_trapdoor(key, q, rng);
    const auto idx = knnse::encrypt_index(key, v, rng);
    if (knnse::score(idx, td.trapdoor) != td.a * testkit::oracle_dot(v.values, q.values) + td.r) {
      o.fail("instance " + std::to_string(i) + " (n=" + std::to_string(n) + ")");
    }
  }
  return o;
}

// 2. Encrypted ranking equals plaintext ranking over L_B, ties by ascending id.
Outcome ranking_fidelity() {
  Outcome o;
  SeededRandom rng(2002);
  const auto pool = triple_pool();
  const std::vector<std::string> policies = {"a", "b", "or(a, b)", "and(a, b)", "or(a, c)"};
  for (int c = 0; c < 100 && o.ok; ++c) {
    auto ws = Workspace::create(std::make_unique<MemoryStore>(), 16, 128, rng);
    kgc::register_owner(ws, "o");
    kgc::register_owner(ws, "p");
    const auto user = kgc::register_user(ws, "u", {"a"}, rng);

    // Mirror of the vocabulary: dimension, document frequency.
    std::map<Triple, std::size_t> dim;
    std::map<Triple, std::uint64_t> df;
    std::uint64_t docs = 0;
    std::map<std::string, knnse::Vector> plain;
    std::set<std::string> allowed;

    const auto count = rng.uniform_int(1, 20);
    for (int d = 0; d < count; ++d) {
      std::vector<Triple> triples;
      const auto len = rng.uniform_int(1, 5);
      for (int t = 0; t < len; ++t) triples.push_back(pick(rng, pool));
      const bool tfidf = rng.uniform_int(0, 1) == 1;
      const auto& policy = pick(rng, policies);
      const std::string owner = rng.uniform_int(0, 1) ? "o" : "p";
      const auto id = owner::ingest(
          ws, {owner, bytes_of("doc"), triples, policy, tfidf ? ExtractionMode::AllSentences : ExtractionMode::ThemeSentence},
          rng);

      ++docs;
      std::map<Triple, int> counts;
      for (const auto& t : triples) {
        if (!dim.contains(t)) dim.emplace(t, dim.size());
        ++counts[t];
      }
      for (const auto& [t, _] : counts) ++df[t];
      knnse::Vector v(16);
      for (const auto& [t, n] : counts) {
        v[dim.at(t)] = tfidf ? knnse::Rational(n, static_cast<long>(triples.size())) * semantic::idf(docs, df.at(t))
                             : knnse::Rational(1);
      }
      plain[id] = v;
      if (testkit::oracle_satisfies(cpabe::parse_policy(policy).root(), {"a"})) allowed.insert(id);
    }

    std::string query = random_sentence(rng);
    if (rng.uniform_int(0, 1)) query += " " + random_sentence(rng);
    knnse::Vector q(16);
    for (const auto& t : semantic::extract_triples(query, ExtractionMode::AllSentences)) {
      if (auto it = dim.find(t); it != dim.end()) q[it->second] = 1;
    }
    const auto k = static_cast<std::size_t>(rng.uniform_int(1, count + 2));
    const auto got = hit_ids(du::query(ws, user, query, k, rng));
    const auto want = testkit::oracle_ranking(plain, q, allowed, k);
    if (got != want) o.fail("corpus " + std::to_string(c) + ": got " + join(got) + " want " + join(want));
  }
  return o;
}

// 3. For every subset of the universe, authorization agrees with tree
// satisfaction, and on success decapsulation yields K.
Outcome abe_soundness() {
  Outcome o;
  SeededRandom rng(3003);
  const auto setup = cpabe::system_setup(group::setup_group(128), rng);
  std::size_t checks = 0;
  for (int i = 0; i < 200 && o.ok; ++i) {
    const auto usize = static_cast<std::size_t>(rng.uniform_int(1, 8));
    const auto universe = testkit::attribute_universe(usize);
    const auto tree = testkit::random_tree(rng, 6, 3, universe);
    const auto enc = cpabe::encapsulate_key(setup.params, tree, rng);
    const cpabe::AttributeSet all(universe.begin(), universe.end());
    const auto full = cpabe::user_keygen(setup.params, setup.master, all, rng);
    for (std::uint32_t mask = 0; mask < (1u << usize); ++mask) {
      const auto attrs = testkit::subset_from_mask(universe, mask);
      const bool expected = testkit::oracle_satisfies(tree.root(), attrs);
      const auto key = full.restricted_to(attrs);
      const auto root = cpabe::authorize(enc.ciphertext, key);
      ++checks;
      if (root.has_value() != expected) {
        o.fail("tree " + tree.to_string() + " disagrees on mask " + std::to_string(mask));
        break;
      }
      if (root && cpabe::decapsulate_key(enc.ciphertext, key, *root) != enc.key) {
        o.fail("tree " + tree.to_string() + " recovered wrong K on mask " + std::to_string(mask));
        break;
      }
    }
  }
  if (o.ok) o.detail = std::to_string(checks) + " subsets";
  return o;
}

struct Scenario {
  Workspace ws;
  std::vector<UserCredentials> users;
  std::map<std::string, std::string> plaintext;
};

Scenario random_scenario(RandomSource& rng) {
  const auto universe = testkit::attribute_universe(4);
  Scenario s{Workspace::create(std::make_unique<MemoryStore>(), 16, 128, rng), {}, {}};
  kgc::register_owner(s.ws, "own");
  const auto nusers = rng.uniform_int(2, 4);
  // Half the users register before ingestion and half after.
  auto add_user = [&](int i) {
    cpabe::AttributeSet attrs;
    for (const auto& a : universe) {
      if (rng.uniform_int(0, 1)) attrs.insert(a);
    }
    if (attrs.empty()) attrs.insert(pick(rng, universe));
    s.users.push_back(kgc::register_user(s.ws, "user" + std::to_string(i), attrs, rng));
  };
  for (int i = 0; i < nusers / 2; ++i) add_user(i);
  const auto ndocs = rng.uniform_int(2, 6);
  for (int d = 0; d < ndocs; ++d) {
    std::string text = random_sentence(rng) + " " + random_sentence(rng);
    const auto tree = testkit::random_tree(rng, 4, 2, universe);
    const auto mode = rng.uniform_int(0, 1) ? ExtractionMode::AllSentences : ExtractionMode::ThemeSentence;
    const auto id = owner::ingest(s.ws, {"own", bytes_of(text), std::nullopt, tree.to_string(), mode}, rng);
    s.plaintext[id] = text;
  }
  for (int i = nusers / 2; i < nusers; ++i) add_user(i);
  return s;
}

// 4. Authorized users decrypt what they find; unauthorized users are
// excluded from results and fail decryption.
Outcome end_to_end() {
  Outcome o;
  SeededRandom rng(4004);
  for (int sc = 0; sc < 50 && o.ok; ++sc) {
    auto s = random_scenario(rng);
    for (const auto& user : s.users) {
      const auto& attrs = user.key.attribute_set();
      std::set<std::string> authorized;
      for (const auto& d : s.ws.documents()) {
        if (testkit::oracle_satisfies(s.ws.document(d).ck.tree.root(), attrs)) authorized.insert(d);
      }
      const auto hits = du::query(s.ws, user, random_sentence(rng), 10, rng);
      std::set<std::string> returned;
      for (const auto& h : hits) returned.insert(h.id);
      if (returned != authorized) {
        o.fail("scenario " + std::to_string(sc) + ": " + user.id + " result set differs from authorized set");
        break;
      }
      for (const auto& d : s.ws.documents()) {
        const auto record = s.ws.document(d);
        if (authorized.contains(d)) {
          if (du::decrypt(record, user.key) != bytes_of(s.plaintext.at(d))) {
            o.fail("scenario " + std::to_string(sc) + ": wrong plaintext for " + d);
          }
          continue;
        }
        try {
          du::decrypt(record, user.key);
          o.fail("scenario " + std::to_string(sc) + ": unauthorized decrypt of " + d + " succeeded");
        } catch (const ProtocolError& e) {
          if (std::string(e.what()).find("tree unsatisfied") == std::string::npos) {
            o.fail(std::string("unexpected error: ") + e.what());
          }
        }
      }
    }
  }
  return o;
}

// 5. Repeated identical queries never produce the same trapdoor.
Outcome unlinkability() {
  Outcome o;
  SeededRandom rng(5005);
  auto ws = Workspace::create(std::make_unique<MemoryStore>(), 16, 128, rng);
  kgc::register_owner(ws, "o");
  owner::ingest(ws, {"o", bytes_of("Amy is going to London by train."), std::nullopt, "a", ExtractionMode::ThemeSentence},
                rng);
  const auto user = kgc::register_user(ws, "u", {"a"}, rng);
  std::set<Bytes> seen;
  for (int i = 0; i < 100; ++i) seen.insert(du::make_query(ws, user, "Amy is going to London", 1, rng).trapdoor.to_bytes());
  if (seen.size() != 100) o.fail(std::to_string(seen.size()) + " distinct of 100");
  return o;
}

// 6. Two users holding one attribute each cannot pool leaf values.
Outcome collusion() {
  Outcome o;
  SeededRandom rng(6006);
  const auto setup = cpabe::system_setup(group::setup_group(128), rng);
  const auto tree = cpabe::parse_policy("and(a, b)");
  int false_accepts = 0;
  for (int i = 0; i < 100; ++i) {
    const auto enc = cpabe::encapsulate_key(setup.params, tree, rng);
    const auto ua = cpabe::user_keygen(setup.params, setup.master, {"a"}, rng);
    const auto ub = cpabe::user_keygen(setup.params, setup.master, {"b"}, rng);
    if (cpabe::authorize(enc.ciphertext, ua) || cpabe::authorize(enc.ciphertext, ub)) ++false_accepts;
    cpabe::LeafValues pooled;
    pooled.emplace(0, cpabe::leaf_decrypt(ua, enc.ciphertext, 0));
    pooled.emplace(1, cpabe::leaf_decrypt(ub, enc.ciphertext, 1));
    const auto root = cpabe::reconstruct_root(tree, pooled);
    if (!root) continue;
    if (cpabe::check_root(enc.ciphertext, ua, *root) || cpabe::check_root(enc.ciphertext, ub, *root)) ++false_accepts;
    if (cpabe::decapsulate_key(enc.ciphertext, ua, *root) == enc.key ||
        cpabe::decapsulate_key(enc.ciphertext, ub, *root) == enc.key) {
      ++false_accepts;
    }
  }
  if (false_accepts) o.fail(std::to_string(false_accepts) + " false accepts");
  return o;
}

// 7. Stored L_B and a query-time recomputation agree.
Outcome offline_authorization() {
  Outcome o;
  SeededRandom rng(4004);  // the criterion-4 scenarios
  for (int sc = 0; sc < 50 && o.ok; ++sc) {
    auto s = random_scenario(rng);
    const auto stored = s.ws.authorization_lists();
    for (const auto& user : s.users) {
      const auto req = du::make_query(s.ws, user, random_sentence(rng), 10, rng);
      const auto pre = ams::release_list(s.ws, req, ams::ListSource::Precomputed);
      const auto re = ams::release_list(s.ws, req, ams::ListSource::Recompute);
      if (pre != re || pre != stored.at(user.id)) {
        o.fail("scenario " + std::to_string(sc) + ": lists differ for " + user.id);
        break;
      }
      if (hit_ids(csp::search(s.ws, req.trapdoor, 10, pre)) != hit_ids(csp::search(s.ws, req.trapdoor, 10, re))) {
        o.fail("scenario " + std::to_string(sc) + ": results differ for " + user.id);
      }
    }
  }
  return o;
}

// 8. The reference sentence.
Outcome reference_extraction() {
  Outcome o;
  const std::vector<Triple> want = {Triple::make("go", "agent", "amy"), Triple::make("go", "dest", "london"),
                                    Triple::make("go", "inst", "train")};
  for (auto mode : {ExtractionMode::ThemeSentence, ExtractionMode::AllSentences}) {
    const auto got = semantic::extract_triples("Amy is going to London by train", mode);
    if (got != want) {
      std::string s;
      for (const auto& t : got) s += t.to_string() + " ";
      o.fail("got " + s);
    }
  }
  return o;
}

}  // namespace

int main() {
  bool ok = true;
  ok &= report(1, "score identity, 1000 instances", 10, score_identity);
  ok &= report(2, "ranking fidelity, 100 corpora", 30, ranking_fidelity);
  ok &= report(3, "ABE soundness and completeness, 200 trees", 300, abe_soundness);
  ok &= report(4, "end-to-end, 50 scenarios", 300, end_to_end);
  ok &= report(5, "trapdoor unlinkability, 100 queries", 60, unlinkability);
  ok &= report(6, "collusion resistance, 100 key pairs", 120, collusion);
  ok &= report(7, "offline authorization equivalence", 300, offline_authorization);
  ok &= report(8, "reference sentence extraction", 1, reference_extraction);
  std::printf("%s\n", ok ? "ALL CRITERIA PASS" : "SOME CRITERIA FAIL");
  return ok ? 0 : 1;
}
