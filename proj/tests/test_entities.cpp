#include <gtest/gtest.h>

#include <filesystem>

#include "esas/entities.hpp"
#include "esas/errors.hpp"
#include "support.hpp"

using namespace esas;
using namespace esas::entities;
using semantic::ExtractionMode;
using semantic::Triple;

namespace {

Bytes bytes_of(std::string_view s) { return Bytes(s.begin(), s.end()); }

class EntitiesTest : public ::testing::Test {
 protected:
  SeededRandom rng{77};
  Workspace ws = Workspace::create(std::make_unique<MemoryStore>(), 24, 128, rng);

  std::string ingest_text(const std::string& owner, const std::string& text, const std::string& policy,
                          ExtractionMode mode = ExtractionMode::AllSentences) {
    return owner::ingest(ws, {owner, bytes_of(text), std::nullopt, policy, mode}, rng);
  }

  // Brute-force L_B from the AMS copies of keys and ciphertexts.
  AuthorizationLists oracle_lists() {
    AuthorizationLists out;
    for (const auto& u : ws.users()) {
      auto& l = out[u];
      const auto attrs = ws.user(u).attributes;
      for (const auto& d : ws.documents()) {
        if (testkit::oracle_satisfies(ws.ams_ciphertext(d).tree.root(), attrs)) l.insert(d);
      }
    }
    return out;
  }
};

std::vector<std::string> ids(const std::vector<SearchHit>& hits) {
  std::vector<std::string> out;
  for (const auto& h : hits) out.push_back(h.id);
  return out;
}

TEST(Identifier, Rules) {
  EXPECT_TRUE(is_valid_identifier("alice"));
  EXPECT_TRUE(is_valid_identifier("hosp_1.a-b"));
  EXPECT_FALSE(is_valid_identifier(""));
  EXPECT_FALSE(is_valid_identifier(".hidden"));
  EXPECT_FALSE(is_valid_identifier("-x"));
  EXPECT_FALSE(is_valid_identifier("a/b"));
  EXPECT_FALSE(is_valid_identifier(std::string(65, 'a')));
}

TEST_F(EntitiesTest, OwnerRegistration) {
  kgc::register_owner(ws, "hosp");
  EXPECT_EQ(ws.owners(), std::vector<std::string>{"hosp"});
  EXPECT_THROW(kgc::register_owner(ws, "hosp"), ProtocolError);
  EXPECT_THROW(kgc::register_owner(ws, "bad/id"), InvalidArgument);
  EXPECT_EQ(ws.owners().size(), 1u);
}

TEST_F(EntitiesTest, UserRegistrationErrors) {
  kgc::register_user(ws, "alice", {"doctor"}, rng);
  EXPECT_THROW(kgc::register_user(ws, "alice", {"nurse"}, rng), ProtocolError);
  EXPECT_THROW(kgc::register_user(ws, "bob", {}, rng), InvalidArgument);
  EXPECT_FALSE(ws.has_user("bob"));
}

TEST_F(EntitiesTest, OwnerAndUserNamespacesAreSeparate) {
  kgc::register_owner(ws, "sam");
  EXPECT_NO_THROW(kgc::register_user(ws, "sam", {"doctor"}, rng));
}

TEST_F(EntitiesTest, LateRegistrationAuthorizesExistingDocuments) {
  kgc::register_owner(ws, "hosp");
  const auto d1 = ingest_text("hosp", "Amy is going to London by train.", "and(doctor, cardiology)");
  const auto d2 = ingest_text("hosp", "Bob drove his car to Paris.", "or(doctor, nurse)");
  const auto d3 = ingest_text("hosp", "Alice is a nurse.", "nurse");
  const auto creds = kgc::register_user(ws, "alice", {"doctor", "cardiology"}, rng);
  const auto lists = ws.authorization_lists();
  std::set<std::string> expected;
  for (const auto& d : {d1, d2, d3}) {
    if (cpabe::verify_authorization(ws.ams_ciphertext(d), creds.key)) expected.insert(d);
  }
  EXPECT_EQ(lists.at("alice"), expected);
  EXPECT_EQ(expected, (std::set<std::string>{d1, d2}));

  kgc::register_user(ws, "eve", {"janitor"}, rng);
  EXPECT_TRUE(ws.authorization_lists().at("eve").empty());
}

TEST_F(EntitiesTest, IngestRefreshesEveryList) {
  kgc::register_owner(ws, "hosp");
  kgc::register_user(ws, "alice", {"doctor", "cardiology"}, rng);
  kgc::register_user(ws, "bob", {"nurse"}, rng);
  kgc::register_user(ws, "carol", {"doctor"}, rng);
  for (const auto& policy : {"and(doctor, cardiology)", "or(doctor, nurse)", "nurse", "2-of(doctor, nurse, cardiology)",
                             "admin"}) {
    ingest_text("hosp", "Amy is going to London by train.", policy);
    EXPECT_EQ(ws.authorization_lists(), oracle_lists()) << policy;
  }
  EXPECT_EQ(ws.authorization_lists().at("bob").size(), 2u);
}

TEST_F(EntitiesTest, RefreshIsIdempotentAndMatchesOracle) {
  EXPECT_TRUE(ams::refresh(ws).empty());
  kgc::register_owner(ws, "o");
  kgc::register_user(ws, "u1", {"a"}, rng);
  kgc::register_user(ws, "u2", {"b", "c"}, rng);
  ingest_text("o", "Amy is going to London.", "or(a, b)");
  ingest_text("o", "Bob is going to Rome.", "and(b, c)");
  const auto first = ams::refresh(ws);
  const auto second = ams::refresh(ws);
  EXPECT_EQ(first, second);
  EXPECT_EQ(first, oracle_lists());
  EXPECT_EQ(first, ws.authorization_lists());
}

TEST_F(EntitiesTest, DocumentIdsAreOwnerPlusCounter) {
  kgc::register_owner(ws, "hosp");
  kgc::register_owner(ws, "lab");
  EXPECT_EQ(ingest_text("hosp", "Amy is going to London.", "a"), "hosp-000001");
  EXPECT_EQ(ingest_text("lab", "Amy is going to London.", "a"), "lab-000001");
  EXPECT_EQ(ingest_text("hosp", "Amy is going to London.", "a"), "hosp-000002");
  EXPECT_EQ(ws.owner("hosp").documents, 2u);
}

TEST_F(EntitiesTest, StoresStayConsistent) {
  kgc::register_owner(ws, "o");
  for (int i = 0; i < 3; ++i) {
    ingest_text("o", "Amy is going to London by train.", "or(a, b)");
    for (const auto& d : ws.documents()) {
      EXPECT_EQ(ws.ams_ciphertext(d).to_envelope(), ws.document(d).ck.to_envelope());
    }
    EXPECT_EQ(ws.store().list("ams/ck").size(), ws.documents().size());
  }
}

TEST_F(EntitiesTest, IngestFailuresLeaveWorkspaceUntouched) {
  kgc::register_owner(ws, "o");
  ingest_text("o", "Amy is going to London by train.", "a");
  auto& mem = static_cast<MemoryStore&>(ws.store());
  const auto before = mem.files();

  EXPECT_THROW(ingest_text("o", "Bob is going to Rome.", "and(a,"), PolicySyntaxError);
  EXPECT_THROW(ingest_text("nobody", "Bob is going to Rome.", "a"), ProtocolError);
  std::vector<Triple> many;
  for (int i = 0; i < 30; ++i) many.push_back(Triple::make("x", "obj", "t" + std::to_string(i)));
  EXPECT_THROW(owner::ingest(ws, {"o", bytes_of("doc"), many, "a", ExtractionMode::ThemeSentence}, rng),
               ProtocolError);
  EXPECT_EQ(mem.files(), before);
}

TEST_F(EntitiesTest, QueryDecryptRoundTrip) {
  kgc::register_owner(ws, "hosp");
  const std::string text = "Amy is going to London by train. The doctor treated the patient with antibiotics.";
  const auto doc = ingest_text("hosp", text, "and(doctor, cardiology)");
  const auto alice = kgc::register_user(ws, "alice", {"doctor", "cardiology"}, rng);
  const auto bob = kgc::register_user(ws, "bob", {"doctor"}, rng);
  const auto carol = kgc::register_user(ws, "carol", {"cardiology", "doctor", "surgeon"}, rng);

  const auto hits = du::query(ws, alice, "Amy is going to London", 3, rng);
  ASSERT_EQ(ids(hits), std::vector<std::string>{doc});
  EXPECT_EQ(du::decrypt(ws.document(doc), alice.key), bytes_of(text));
  EXPECT_EQ(du::decrypt(ws.document(doc), carol.key), bytes_of(text));

  EXPECT_TRUE(du::query(ws, bob, "Amy is going to London", 3, rng).empty());
  try {
    du::decrypt(ws.document(doc), bob.key);
    FAIL() << "unauthorized decrypt succeeded";
  } catch (const ProtocolError& e) {
    EXPECT_NE(std::string(e.what()).find("access tree unsatisfied"), std::string::npos);
  }
}

TEST_F(EntitiesTest, UnauthorizedPerfectMatchNeverReturned) {
  kgc::register_owner(ws, "o");
  const auto secret = ingest_text("o", "Amy is going to London by train.", "admin");
  const auto weak = ingest_text("o", "Bob is going to London.", "staff");
  const auto u = kgc::register_user(ws, "u", {"staff"}, rng);
  const auto hits = du::query(ws, u, "Amy is going to London by train", 10, rng);
  EXPECT_EQ(ids(hits), std::vector<std::string>{weak});
  (void)secret;
}

TEST_F(EntitiesTest, RankingMatchesPlaintextOracle) {
  kgc::register_owner(ws, "o");
  const std::vector<std::vector<Triple>> docs = {
      {Triple::make("go", "agent", "amy"), Triple::make("go", "dest", "london")},
      {Triple::make("go", "agent", "amy")},
      {Triple::make("go", "dest", "london"), Triple::make("go", "inst", "train"), Triple::make("go", "agent", "amy")},
      {Triple::make("be", "agent", "alice")},
      {Triple::make("go", "dest", "london")},
  };
  for (const auto& t : docs) {
    owner::ingest(ws, {"o", bytes_of("x"), t, "or(a, b)", ExtractionMode::ThemeSentence}, rng);
  }
  owner::ingest(ws, {"o", bytes_of("x"), docs[2], "c", ExtractionMode::ThemeSentence}, rng);
  const auto u = kgc::register_user(ws, "u", {"a"}, rng);

  const auto vocab = ws.vocabulary();
  std::map<std::string, knnse::Vector> plain;
  const auto all = ws.documents();
  for (std::size_t i = 0; i < docs.size(); ++i) {
    knnse::Vector v(vocab.capacity());
    for (const auto& t : docs[i]) v[*vocab.dimension_of(t) - 1] = 1;
    plain[all[i]] = v;
  }
  const std::string query = "Amy is going to London";
  knnse::Vector q(vocab.capacity());
  for (const auto& t : semantic::extract_triples(query, ExtractionMode::AllSentences)) {
    if (auto d = vocab.dimension_of(t)) q[*d - 1] = 1;
  }
  const auto allowed = ws.authorization_lists().at("u");
  for (std::size_t k : {1u, 2u, 3u, 5u, 50u}) {
    EXPECT_EQ(ids(du::query(ws, u, query, k, rng)), testkit::oracle_ranking(plain, q, allowed, k)) << k;
  }
  EXPECT_EQ(du::query(ws, u, query, 50, rng).size(), 5u);
  EXPECT_THROW(du::query(ws, u, query, 0, rng), InvalidArgument);
}

TEST_F(EntitiesTest, TwoOwnersShareOneTrapdoor) {
  const auto k1 = kgc::register_owner(ws, "o1");
  const auto k2 = kgc::register_owner(ws, "o2");
  EXPECT_EQ(k1.to_envelope(), k2.to_envelope());
  const auto a = ingest_text("o1", "Amy is going to London.", "x");
  const auto b = ingest_text("o2", "Amy is going to Paris.", "x");
  const auto u = kgc::register_user(ws, "u", {"x"}, rng);
  const auto req = du::make_query(ws, u, "Amy is going to London", 2, rng);
  const auto hits = csp::search(ws, req.trapdoor, 2, ams::release_list(ws, req));
  EXPECT_EQ(ids(hits), (std::vector<std::string>{a, b}));
}

TEST_F(EntitiesTest, QueryAuthentication) {
  kgc::register_owner(ws, "o");
  ingest_text("o", "Amy is going to London.", "x");
  const auto alice = kgc::register_user(ws, "alice", {"x"}, rng);
  const auto bob = kgc::register_user(ws, "bob", {"x"}, rng);

  auto req = du::make_query(ws, alice, "Amy", 1, rng);
  EXPECT_NO_THROW(ams::release_list(ws, req));

  auto forged = req;
  forged.tag = du::make_query(ws, bob, "Amy", 1, rng).tag;
  EXPECT_THROW(ams::release_list(ws, forged), AuthenticationError);

  auto impersonated = du::make_query(ws, bob, "Amy", 1, rng);
  impersonated.user_id = "alice";
  EXPECT_THROW(ams::release_list(ws, impersonated), AuthenticationError);

  auto modified = req;
  modified.trapdoor.first[0] += 1;
  EXPECT_THROW(ams::release_list(ws, modified), AuthenticationError);

  auto unknown = req;
  unknown.user_id = "mallory";
  EXPECT_THROW(ams::release_list(ws, unknown), ProtocolError);
}

TEST(Signature, SignVerify) {
  SeededRandom rng(5);
  const auto sk = signature::generate(rng);
  const auto vk = signature::public_key(sk);
  const Bytes msg = {1, 2, 3, 4};
  auto sig = signature::sign(sk, msg);
  EXPECT_TRUE(signature::verify(vk, msg, sig));
  for (std::size_t i = 0; i < sig.size(); i += 7) {
    auto bad = sig;
    bad[i] ^= 0x01;
    EXPECT_FALSE(signature::verify(vk, msg, bad));
  }
  auto other_msg = msg;
  other_msg[0] ^= 0x80;
  EXPECT_FALSE(signature::verify(vk, other_msg, sig));
  EXPECT_FALSE(signature::verify(signature::public_key(signature::generate(rng)), msg, sig));
  EXPECT_FALSE(signature::verify(vk, msg, Bytes(10)));
}

// RFC 8032 section 7.1, test 1.
TEST(Signature, KnownAnswer) {
  const auto sk_bytes = base64_decode("nWGxne/9WmC6hEr0kuwsxERJxWl7MmkZcDusAxyuf2A=");
  signature::SigningKey sk{};
  std::copy(sk_bytes.begin(), sk_bytes.end(), sk.begin());
  EXPECT_EQ(to_hex(signature::public_key(sk)), "d75a980182b10ab7d54bfed3c964073a0ee172f3daa62325af021a68f707511a");
  EXPECT_EQ(to_hex(signature::sign(sk, {})),
            "e5564300c360ac729086e2cc806e828a84877f1eb8e5d974d873e065224901555fb8821590a33bacc61e39701cf9b46bd25bf5f0"
            "595bbe24655141438e7a100b");
}

TEST_F(EntitiesTest, StaleTrapdoorRejectedAfterVocabularyGrows) {
  kgc::register_owner(ws, "o");
  ingest_text("o", "Amy is going to London.", "x");
  const auto u = kgc::register_user(ws, "u", {"x"}, rng);
  const auto old_req = du::make_query(ws, u, "Amy", 5, rng);
  ingest_text("o", "Bob drove his car to Paris.", "x");
  EXPECT_THROW(csp::search(ws, old_req.trapdoor, 5, ams::release_list(ws, old_req)), ProtocolError);
  // A fresh trapdoor scores both old and new indexes.
  EXPECT_EQ(du::query(ws, u, "Amy", 5, rng).size(), 2u);
}

TEST_F(EntitiesTest, PrecomputedAndRecomputedListsAgree) {
  kgc::register_owner(ws, "o");
  const auto u = kgc::register_user(ws, "u", {"a", "b"}, rng);
  for (const auto& p : {"a", "and(a, c)", "or(b, c)", "2-of(a, b, c)"}) ingest_text("o", "Amy is going to London.", p);
  const auto pre = du::query(ws, u, "Amy is going to London", 10, rng, ams::ListSource::Precomputed);
  const auto re = du::query(ws, u, "Amy is going to London", 10, rng, ams::ListSource::Recompute);
  EXPECT_EQ(ids(pre), ids(re));
  EXPECT_EQ(pre.size(), 3u);
}

TEST_F(EntitiesTest, EmptyListQueryReturnsNothing) {
  const auto u = kgc::register_user(ws, "u", {"a"}, rng);
  EXPECT_TRUE(du::query(ws, u, "anything at all", 3, rng).empty());
}

TEST_F(EntitiesTest, CredentialsRoundTrip) {
  const auto c = kgc::register_user(ws, "u", {"a", "b"}, rng);
  const auto back = UserCredentials::from_envelope(c.to_envelope());
  EXPECT_EQ(back.to_envelope(), c.to_envelope());
  EXPECT_EQ(ws.credentials("u").to_envelope(), c.to_envelope());
  EXPECT_EQ(ws.user("u").verify_key, signature::public_key(c.signing_key));
}

TEST(Workspace, CreateValidates) {
  SeededRandom rng(1);
  EXPECT_THROW(Workspace::create(std::make_unique<MemoryStore>(), 0, 128, rng), InvalidArgument);
  EXPECT_THROW(Workspace::create(std::make_unique<MemoryStore>(), 4, 80, rng), InvalidArgument);
  EXPECT_THROW(Workspace::open(std::make_unique<MemoryStore>()), IoError);
}

TEST(Workspace, DirectoryLifecycle) {
  testkit::TempDir dir;
  const auto root = dir.str("ws");
  SeededRandom rng(2);
  {
    auto ws = Workspace::create(std::make_unique<DirectoryStore>(root), 8, 128, rng);
    kgc::register_owner(ws, "o");
    kgc::register_user(ws, "u", {"a"}, rng);
    owner::ingest(ws, {"o", bytes_of("Amy is going to London."), std::nullopt, "a", ExtractionMode::AllSentences},
                  rng);
  }
  EXPECT_THROW(Workspace::create(std::make_unique<DirectoryStore>(root), 8, 128, rng), IoError);

  auto ws = Workspace::open(std::make_unique<DirectoryStore>(root));
  const auto creds = ws.credentials("u");
  const auto hits = du::query(ws, creds, "Amy is going to London", 1, rng);
  ASSERT_EQ(hits.size(), 1u);
  EXPECT_EQ(du::decrypt(ws.document(hits[0].id), creds.key), bytes_of("Amy is going to London."));

  namespace fs = std::filesystem;
  const auto perms = fs::status(fs::path(root) / "params/master.key").permissions();
  EXPECT_EQ(perms & (fs::perms::group_all | fs::perms::others_all), fs::perms::none);
  EXPECT_FALSE(fs::exists(fs::path(root) / ".lock"));
}

TEST(Workspace, WriterLockExcludesSecondWriter) {
  testkit::TempDir dir;
  SeededRandom rng(3);
  auto ws = Workspace::create(std::make_unique<DirectoryStore>(dir.str("ws")), 4, 128, rng);
  auto other = Workspace::open(std::make_unique<DirectoryStore>(dir.str("ws")));
  {
    auto held = ws.lock();
    EXPECT_THROW(kgc::register_owner(other, "o"), IoError);
  }
  EXPECT_NO_THROW(kgc::register_owner(other, "o"));

  auto mem = Workspace::create(std::make_unique<MemoryStore>(), 4, 128, rng);
  auto held = mem.lock();
  EXPECT_THROW(kgc::register_owner(mem, "o"), IoError);
}

}  // namespace
