#include "esas/entities.hpp"

#include <algorithm>

#include "esas/errors.hpp"

namespace esas::entities {

namespace {

constexpr std::uint32_t kEnvelopeVersion = 1;

const std::string kSystemFile = "params/system.env";
const std::string kMasterFile = "params/master.key";
const std::string kKnnFile = "params/knn.key";
const std::string kVocabFile = "vocab/vocab.env";
const std::string kListsFile = "ams/lists.env";

std::string owner_path(const std::string& id) { return "owners/" + id + ".env"; }
std::string user_pub_path(const std::string& id) { return "users/" + id + ".pub"; }
std::string user_key_path(const std::string& id) { return "users/" + id + ".key"; }
std::string ams_key_path(const std::string& id) { return "ams/keys/" + id + ".env"; }
std::string ams_ck_path(const std::string& id) { return "ams/ck/" + id + ".env"; }
std::string csp_path(const std::string& id) { return "csp/" + id + ".env"; }

std::vector<std::string> ids_with_suffix(const Store& s, const std::string& dir, std::string_view suffix) {
  std::vector<std::string> ids;
  for (auto& name : s.list(dir)) {
    if (name.size() > suffix.size() && name.ends_with(suffix)) ids.push_back(name.substr(0, name.size() - suffix.size()));
  }
  return ids;
}

void require_identifier(const std::string& id, std::string_view what) {
  if (!is_valid_identifier(id)) {
    throw InvalidArgument("invalid " + std::string(what) + " id '" + id + "'");
  }
}

std::string read_identifier(ByteReader& r) {
  auto id = r.str();
  if (!is_valid_identifier(id)) throw FormatError("invalid identifier in workspace file");
  return id;
}

template <std::size_t N>
void read_array(ByteReader& r, std::array<std::uint8_t, N>& out) {
  auto b = r.raw(N);
  std::copy(b.begin(), b.end(), out.begin());
}

}  // namespace

bool is_valid_identifier(std::string_view id) {
  if (id.empty() || id.size() > 64 || id.front() == '.' || id.front() == '-') return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '.' ||
           c == '-';
  });
}

// --- records ----------------------------------------------------------------

std::string DocumentRecord::to_envelope() const {
  ByteWriter w;
  w.str(id);
  ck.write(w);
  index.write(w);
  w.bytes(blob);
  return wrap_envelope("DOCUMENT-RECORD", kEnvelopeVersion, w.data());
}

DocumentRecord DocumentRecord::from_envelope(std::string_view text) {
  const Bytes payload = unwrap_envelope(text, "DOCUMENT-RECORD", kEnvelopeVersion);
  ByteReader r(payload);
  auto id = read_identifier(r);
  auto ck = cpabe::KeyCiphertext::read(r);
  knnse::SecureIndex index{knnse::EncryptedPair::read(r)};
  auto blob = r.bytes();
  r.expect_end();
  return DocumentRecord{std::move(id), std::move(ck), std::move(index), std::move(blob)};
}

std::string lists_to_envelope(const AuthorizationLists& lists) {
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(lists.size()));
  for (const auto& [user, docs] : lists) {
    w.str(user);
    w.u32(static_cast<std::uint32_t>(docs.size()));
    for (const auto& d : docs) w.str(d);
  }
  return wrap_envelope("AUTHORIZATION-LISTS", kEnvelopeVersion, w.data());
}

AuthorizationLists lists_from_envelope(std::string_view text) {
  const Bytes payload = unwrap_envelope(text, "AUTHORIZATION-LISTS", kEnvelopeVersion);
  ByteReader r(payload);
  AuthorizationLists out;
  const auto users = r.count(8);
  for (std::uint32_t i = 0; i < users; ++i) {
    auto user = read_identifier(r);
    auto& docs = out[user];
    if (!docs.empty()) throw FormatError("duplicate user in authorization lists");
    const auto n = r.count(4);
    for (std::uint32_t j = 0; j < n; ++j) {
      if (!docs.insert(read_identifier(r)).second) throw FormatError("duplicate document in authorization list");
    }
  }
  r.expect_end();
  return out;
}

std::string OwnerRecord::to_envelope() const {
  ByteWriter w;
  w.str(id);
  w.u64(documents);
  return wrap_envelope("OWNER", kEnvelopeVersion, w.data());
}

OwnerRecord OwnerRecord::from_envelope(std::string_view text) {
  const Bytes payload = unwrap_envelope(text, "OWNER", kEnvelopeVersion);
  ByteReader r(payload);
  OwnerRecord o;
  o.id = read_identifier(r);
  o.documents = r.u64();
  r.expect_end();
  return o;
}

std::string UserRecord::to_envelope() const {
  ByteWriter w;
  w.str(id);
  w.u32(static_cast<std::uint32_t>(attributes.size()));
  for (const auto& a : attributes) w.str(a);
  w.raw(verify_key);
  return wrap_envelope("USER", kEnvelopeVersion, w.data());
}

UserRecord UserRecord::from_envelope(std::string_view text) {
  const Bytes payload = unwrap_envelope(text, "USER", kEnvelopeVersion);
  ByteReader r(payload);
  UserRecord u;
  u.id = read_identifier(r);
  const auto n = r.count(4);
  for (std::uint32_t i = 0; i < n; ++i) {
    auto a = r.str();
    if (!cpabe::is_valid_attribute(a)) throw FormatError("invalid attribute in user record");
    u.attributes.insert(std::move(a));
  }
  read_array(r, u.verify_key);
  r.expect_end();
  return u;
}

std::string UserCredentials::to_envelope() const {
  ByteWriter w;
  w.str(id);
  key.write(w);
  w.raw(signing_key);
  w.str(knn_key.to_envelope());
  return wrap_envelope("USER-CREDENTIALS", kEnvelopeVersion, w.data());
}

UserCredentials UserCredentials::from_envelope(std::string_view text) {
  const Bytes payload = unwrap_envelope(text, "USER-CREDENTIALS", kEnvelopeVersion);
  ByteReader r(payload);
  UserCredentials c;
  c.id = read_identifier(r);
  c.key = cpabe::UserKey::read(r);
  read_array(r, c.signing_key);
  c.knn_key = knnse::OwnerKey::from_envelope(r.str());
  r.expect_end();
  return c;
}

// --- Workspace --------------------------------------------------------------

Workspace::Workspace(std::unique_ptr<Store> store) : store_(std::move(store)) {}

Workspace Workspace::create(std::unique_ptr<Store> store, std::size_t capacity, int security_level,
                            RandomSource& rng) {
  if (capacity == 0) throw InvalidArgument("vocabulary capacity must be at least 1");
  const auto ctx = group::setup_group(security_level);
  if (!store->empty()) throw IoError("workspace exists");
  auto guard = store->lock();

  auto setup = cpabe::system_setup(ctx, rng);
  auto knn = knnse::owner_keygen(capacity, rng);
  store->write(kMasterFile, setup.master.to_envelope(), true);
  store->write(kKnnFile, knn.to_envelope(), true);
  store->write(kVocabFile, semantic::Vocabulary(capacity).to_envelope());
  store->write(kListsFile, lists_to_envelope({}));
  // Written last: its presence marks a complete workspace.
  store->write(kSystemFile, setup.params.to_envelope());
  guard.reset();

  Workspace ws(std::move(store));
  ws.params_ = std::move(setup.params);
  ws.knn_key_ = std::move(knn);
  return ws;
}

Workspace Workspace::open(std::unique_ptr<Store> store) {
  auto text = store->read(kSystemFile);
  if (!text) throw IoError("not an initialized workspace (missing " + kSystemFile + ")");
  Workspace ws(std::move(store));
  ws.params_ = cpabe::SystemParams::from_envelope(*text);
  return ws;
}

std::size_t Workspace::capacity() const { return vocabulary().capacity(); }

semantic::Vocabulary Workspace::vocabulary() const {
  return semantic::Vocabulary::from_envelope(store_->require(kVocabFile));
}

void Workspace::save_vocabulary(const semantic::Vocabulary& v) { store_->write(kVocabFile, v.to_envelope()); }

cpabe::MasterSecret Workspace::master_secret() const {
  return cpabe::MasterSecret::from_envelope(store_->require(kMasterFile));
}

const knnse::OwnerKey& Workspace::knn_key() const {
  if (!knn_key_) knn_key_ = knnse::OwnerKey::from_envelope(store_->require(kKnnFile));
  return *knn_key_;
}

std::vector<std::string> Workspace::owners() const { return ids_with_suffix(*store_, "owners", ".env"); }
std::vector<std::string> Workspace::users() const { return ids_with_suffix(*store_, "users", ".pub"); }
std::vector<std::string> Workspace::documents() const { return ids_with_suffix(*store_, "csp", ".env"); }

bool Workspace::has_owner(const std::string& id) const {
  return is_valid_identifier(id) && store_->exists(owner_path(id));
}
bool Workspace::has_user(const std::string& id) const {
  return is_valid_identifier(id) && store_->exists(user_pub_path(id));
}
bool Workspace::has_document(const std::string& id) const {
  return is_valid_identifier(id) && store_->exists(csp_path(id));
}

OwnerRecord Workspace::owner(const std::string& id) const {
  if (!has_owner(id)) throw ProtocolError("unknown owner '" + id + "'");
  return OwnerRecord::from_envelope(store_->require(owner_path(id)));
}

UserRecord Workspace::user(const std::string& id) const {
  if (!has_user(id)) throw ProtocolError("unknown user '" + id + "'");
  return UserRecord::from_envelope(store_->require(user_pub_path(id)));
}

UserCredentials Workspace::credentials(const std::string& id) const {
  if (!has_user(id)) throw ProtocolError("unknown user '" + id + "'");
  return UserCredentials::from_envelope(store_->require(user_key_path(id)));
}

DocumentRecord Workspace::document(const std::string& id) const {
  if (!has_document(id)) throw ProtocolError("unknown document '" + id + "'");
  return DocumentRecord::from_envelope(store_->require(csp_path(id)));
}

cpabe::UserKey Workspace::ams_user_key(const std::string& id) const {
  if (!is_valid_identifier(id)) throw ProtocolError("unknown user '" + id + "'");
  return cpabe::UserKey::from_envelope(store_->require(ams_key_path(id)));
}

cpabe::KeyCiphertext Workspace::ams_ciphertext(const std::string& id) const {
  if (!is_valid_identifier(id)) throw ProtocolError("unknown document '" + id + "'");
  return cpabe::KeyCiphertext::from_envelope(store_->require(ams_ck_path(id)));
}

AuthorizationLists Workspace::authorization_lists() const {
  return lists_from_envelope(store_->require(kListsFile));
}

void Workspace::save_authorization_lists(const AuthorizationLists& lists) {
  store_->write(kListsFile, lists_to_envelope(lists));
}

void Workspace::put_owner(const OwnerRecord& r) { store_->write(owner_path(r.id), r.to_envelope()); }

void Workspace::put_user(const UserRecord& r, const cpabe::UserKey& key, const UserCredentials& creds) {
  store_->write(ams_key_path(r.id), key.to_envelope(), true);
  store_->write(user_key_path(r.id), creds.to_envelope(), true);
  store_->write(user_pub_path(r.id), r.to_envelope());
}

void Workspace::put_document(const DocumentRecord& r) {
  store_->write(csp_path(r.id), r.to_envelope());
  store_->write(ams_ck_path(r.id), r.ck.to_envelope());
}

// --- KGC --------------------------------------------------------------------

namespace kgc {

knnse::OwnerKey register_owner(Workspace& ws, const std::string& owner_id) {
  require_identifier(owner_id, "owner");
  auto guard = ws.lock();
  if (ws.has_owner(owner_id)) throw ProtocolError("owner '" + owner_id + "' already registered");
  ws.put_owner(OwnerRecord{owner_id, 0});
  return ws.knn_key();
}

UserCredentials register_user(Workspace& ws, const std::string& user_id, const cpabe::AttributeSet& attrs,
                              RandomSource& rng) {
  require_identifier(user_id, "user");
  if (attrs.empty()) throw InvalidArgument("user '" + user_id + "' needs at least one attribute");
  auto guard = ws.lock();
  if (ws.has_user(user_id)) throw ProtocolError("user '" + user_id + "' already registered");

  auto key = cpabe::user_keygen(ws.params(), ws.master_secret(), attrs, rng);
  const auto sk = signature::generate(rng);
  UserCredentials creds{user_id, key, sk, ws.knn_key()};
  ws.put_user(UserRecord{user_id, attrs, signature::public_key(sk)}, key, creds);

  // Offline authorization over every stored document.
  auto lists = ws.authorization_lists();
  lists[user_id] = ams::compute_list(ws, user_id);
  ws.save_authorization_lists(lists);
  return creds;
}

}  // namespace kgc

// --- Owner ------------------------------------------------------------------

namespace owner {

std::string ingest(Workspace& ws, const IngestRequest& req, RandomSource& rng) {
  auto guard = ws.lock();
  auto rec = ws.owner(req.owner_id);
  const auto tree = cpabe::parse_policy(req.policy);

  std::vector<semantic::Triple> triples;
  if (req.triples) {
    triples = *req.triples;
  } else {
    const std::string text(req.document.begin(), req.document.end());
    triples = semantic::extract_triples(text, req.mode);
  }
  const auto vocab = semantic::update_vocabulary(ws.vocabulary(), triples);
  const auto plain = req.mode == semantic::ExtractionMode::ThemeSentence ? semantic::vectorize_binary(triples, vocab)
                                                                          : semantic::vectorize_tfidf(triples, vocab);

  ++rec.documents;
  std::string counter = std::to_string(rec.documents);
  if (counter.size() < 6) counter.insert(0, 6 - counter.size(), '0');
  const std::string id = rec.id + "-" + counter;
  if (ws.has_document(id)) throw ProtocolError("document id '" + id + "' already in use");

  auto index = knnse::encrypt_index(ws.knn_key(), plain, rng);
  auto enc = cpabe::encapsulate_key(ws.params(), tree, rng);
  auto blob = group::sym_encrypt(group::kdf_key(enc.key), req.document, rng);
  const DocumentRecord doc{id, std::move(enc.ciphertext), std::move(index), std::move(blob)};

  ws.save_vocabulary(vocab);
  ws.put_document(doc);
  ws.put_owner(rec);
  ams::authorize_document(ws, doc.id);
  return doc.id;
}

}  // namespace owner

// --- AMS --------------------------------------------------------------------

namespace ams {

std::set<std::string> compute_list(const Workspace& ws, const std::string& user_id) {
  const auto key = ws.ams_user_key(user_id);
  std::set<std::string> out;
  for (const auto& doc : ws.documents()) {
    if (cpabe::verify_authorization(ws.ams_ciphertext(doc), key)) out.insert(doc);
  }
  return out;
}

AuthorizationLists refresh(Workspace& ws) {
  auto guard = ws.lock();
  AuthorizationLists lists;
  for (const auto& u : ws.users()) lists[u] = compute_list(ws, u);
  ws.save_authorization_lists(lists);
  return lists;
}

void authorize_document(Workspace& ws, const std::string& doc_id) {
  const auto ck = ws.ams_ciphertext(doc_id);
  auto lists = ws.authorization_lists();
  for (const auto& u : ws.users()) {
    auto& list = lists[u];
    if (cpabe::verify_authorization(ck, ws.ams_user_key(u))) {
      list.insert(doc_id);
    } else {
      list.erase(doc_id);
    }
  }
  ws.save_authorization_lists(lists);
}

std::set<std::string> release_list(const Workspace& ws, const QueryRequest& req, ListSource source) {
  const auto user = ws.user(req.user_id);
  if (!signature::verify(user.verify_key, req.trapdoor.to_bytes(), req.tag)) {
    throw AuthenticationError("query signature rejected for user '" + req.user_id + "'");
  }
  if (source == ListSource::Recompute) return compute_list(ws, req.user_id);
  const auto lists = ws.authorization_lists();
  auto it = lists.find(req.user_id);
  return it == lists.end() ? std::set<std::string>{} : it->second;
}

}  // namespace ams

// --- CSP --------------------------------------------------------------------

namespace csp {

std::vector<SearchHit> search(const Workspace& ws, const knnse::Trapdoor& td, std::size_t k,
                              const std::set<std::string>& allowed) {
  if (k == 0) throw InvalidArgument("k must be at least 1");
  std::vector<SearchHit> hits;
  hits.reserve(allowed.size());
  for (const auto& id : allowed) {
    const auto doc = ws.document(id);
    if (doc.index.size() != td.size()) {
      throw ProtocolError("trapdoor dimension " + std::to_string(td.size()) + " does not match index of '" + id +
                          "' (" + std::to_string(doc.index.size()) + ")");
    }
    // Dimensions are append-only, so an index built against an older
    // vocabulary is still aligned with a newer trapdoor.
    if (doc.index.vocabulary_version > td.vocabulary_version) {
      throw ProtocolError("trapdoor built against vocabulary version " + std::to_string(td.vocabulary_version) +
                          " but '" + id + "' uses version " + std::to_string(doc.index.vocabulary_version));
    }
    hits.push_back({id, knnse::score(doc.index, td)});
  }
  std::sort(hits.begin(), hits.end(), [](const SearchHit& a, const SearchHit& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.id < b.id;
  });
  if (hits.size() > k) hits.resize(k);
  return hits;
}

}  // namespace csp

// --- DU ---------------------------------------------------------------------

namespace du {

QueryRequest make_query(const Workspace& ws, const UserCredentials& creds, std::string_view query_text,
                        std::size_t k, RandomSource& rng) {
  if (k == 0) throw InvalidArgument("k must be at least 1");
  const auto q = semantic::query_to_vector(query_text, ws.vocabulary());
  QueryRequest req;
  req.user_id = creds.id;
  req.k = k;
  req.trapdoor = knnse::gen_trapdoor(creds.knn_key, q, rng).trapdoor;
  req.tag = signature::sign(creds.signing_key, req.trapdoor.to_bytes());
  return req;
}

std::vector<SearchHit> query(const Workspace& ws, const UserCredentials& creds, std::string_view query_text,
                             std::size_t k, RandomSource& rng, ams::ListSource source) {
  const auto req = make_query(ws, creds, query_text, k, rng);
  return csp::search(ws, req.trapdoor, req.k, ams::release_list(ws, req, source));
}

Bytes decrypt(const DocumentRecord& record, const cpabe::UserKey& key) {
  const auto root = cpabe::recover_root(record.ck, key);
  if (!root) throw ProtocolError("access tree unsatisfied for document '" + record.id + "'");
  const auto k = cpabe::decapsulate_key(record.ck, key, *root);
  return group::sym_decrypt(group::kdf_key(k), record.blob);
}

}  // namespace du

}  // namespace esas::entities
