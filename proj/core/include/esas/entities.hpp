#pragma once

// The six protocol roles over a persistent workspace.
//
//   kgc    registration of owners and users
//   owner  document ingestion (NLPS extraction runs inside ingest)
//   ams    offline authorization lists, query authentication
//   csp    ranked search over secure indexes
//   du     trapdoor generation and document decryption
//
// Workspace layout:
//
//   params/system.env     SystemParams
//   params/master.key     MasterSecret (owner-only permissions)
//   params/knn.key        system KNN-SE key (owner-only permissions)
//   owners/<id>.env       owner registry entry
//   users/<id>.pub        attributes and verification key
//   users/<id>.key        exported user credentials (owner-only permissions)
//   ams/keys/<id>.env     the AMS copy of a user's CP-ABE key
//   ams/ck/<doc>.env      (ID, CK)
//   ams/lists.env         authorization lists
//   csp/<doc>.env         document records
//   vocab/vocab.env       vocabulary

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "esas/cpabe.hpp"
#include "esas/knnse.hpp"
#include "esas/semantic.hpp"
#include "esas/signature.hpp"
#include "esas/store.hpp"

namespace esas::entities {

// [A-Za-z0-9_.-]{1,64}, not starting with '.' or '-'.
bool is_valid_identifier(std::string_view id);

struct DocumentRecord {
  std::string id;
  cpabe::KeyCiphertext ck;
  knnse::SecureIndex index;
  Bytes blob;  // AES-GCM under kdf_key(K)

  std::string to_envelope() const;
  static DocumentRecord from_envelope(std::string_view text);
};

// user id -> document ids
using AuthorizationLists = std::map<std::string, std::set<std::string>>;

std::string lists_to_envelope(const AuthorizationLists& lists);
AuthorizationLists lists_from_envelope(std::string_view text);

struct OwnerRecord {
  std::string id;
  std::uint64_t documents = 0;  // counter behind document ids

  std::string to_envelope() const;
  static OwnerRecord from_envelope(std::string_view text);
};

struct UserRecord {
  std::string id;
  cpabe::AttributeSet attributes;
  signature::VerifyKey verify_key{};

  std::string to_envelope() const;
  static UserRecord from_envelope(std::string_view text);
};

// Everything a data user receives out of band at registration.
struct UserCredentials {
  std::string id;
  cpabe::UserKey key;
  signature::SigningKey signing_key{};
  knnse::OwnerKey knn_key;

  std::string to_envelope() const;
  static UserCredentials from_envelope(std::string_view text);
};

class Workspace {
 public:
  // Fails with IoError("workspace exists") unless the store is empty.
  // Throws InvalidArgument for capacity 0 or an unsupported level.
  static Workspace create(std::unique_ptr<Store> store, std::size_t capacity, int security_level,
                          RandomSource& rng);
  static Workspace open(std::unique_ptr<Store> store);

  Store& store() noexcept { return *store_; }
  const Store& store() const noexcept { return *store_; }
  std::unique_ptr<WriterLock> lock() { return store_->lock(); }

  const cpabe::SystemParams& params() const noexcept { return params_; }
  std::size_t capacity() const;
  semantic::Vocabulary vocabulary() const;
  void save_vocabulary(const semantic::Vocabulary& v);

  // KGC-only material.
  cpabe::MasterSecret master_secret() const;
  const knnse::OwnerKey& knn_key() const;

  std::vector<std::string> owners() const;
  std::vector<std::string> users() const;
  std::vector<std::string> documents() const;

  bool has_owner(const std::string& id) const;
  bool has_user(const std::string& id) const;
  bool has_document(const std::string& id) const;

  OwnerRecord owner(const std::string& id) const;
  UserRecord user(const std::string& id) const;
  UserCredentials credentials(const std::string& id) const;
  DocumentRecord document(const std::string& id) const;

  cpabe::UserKey ams_user_key(const std::string& id) const;
  cpabe::KeyCiphertext ams_ciphertext(const std::string& id) const;
  AuthorizationLists authorization_lists() const;
  void save_authorization_lists(const AuthorizationLists& lists);

  // Raw writers used by the role operations.
  void put_owner(const OwnerRecord& r);
  void put_user(const UserRecord& r, const cpabe::UserKey& key, const UserCredentials& creds);
  void put_document(const DocumentRecord& r);

 private:
  explicit Workspace(std::unique_ptr<Store> store);

  std::unique_ptr<Store> store_;
  cpabe::SystemParams params_;
  mutable std::optional<knnse::OwnerKey> knn_key_;
};

namespace kgc {

// Binds the owner to the system KNN-SE key. Throws ProtocolError on a
// duplicate id.
knnse::OwnerKey register_owner(Workspace& ws, const std::string& owner_id);

// Issues a CP-ABE key and signing key pair, stores the export file and runs
// the AMS authorization for the new user.
UserCredentials register_user(Workspace& ws, const std::string& user_id, const cpabe::AttributeSet& attrs,
                              RandomSource& rng);

}  // namespace kgc

namespace owner {

struct IngestRequest {
  std::string owner_id;
  Bytes document;
  // When present, extraction is skipped and these triples index the document.
  std::optional<std::vector<semantic::Triple>> triples;
  std::string policy;
  semantic::ExtractionMode mode = semantic::ExtractionMode::ThemeSentence;
};

// Returns the new document id.
std::string ingest(Workspace& ws, const IngestRequest& req, RandomSource& rng);

}  // namespace owner

namespace ams {

// Documents whose CK the user's key passes verify_authorization on.
std::set<std::string> compute_list(const Workspace& ws, const std::string& user_id);

// Full recomputation for every user; idempotent.
AuthorizationLists refresh(Workspace& ws);

// Adds `doc_id` to every list whose user is authorized for it.
void authorize_document(Workspace& ws, const std::string& doc_id);

}  // namespace ams

struct QueryRequest {
  std::string user_id;
  std::size_t k = 0;
  knnse::Trapdoor trapdoor;
  Bytes tag;  // Ed25519 over trapdoor.to_bytes()
};

namespace ams {

enum class ListSource { Precomputed, Recompute };

// Checks the tag against the registered verification key and releases L_B.
// Throws AuthenticationError on a bad tag, ProtocolError for unknown users.
std::set<std::string> release_list(const Workspace& ws, const QueryRequest& req,
                                   ListSource source = ListSource::Precomputed);

}  // namespace ams

struct SearchHit {
  std::string id;
  knnse::Rational score;
};

namespace csp {

// Scores the documents in `allowed`, highest first, ties by ascending id;
// returns at most k hits.
std::vector<SearchHit> search(const Workspace& ws, const knnse::Trapdoor& td, std::size_t k,
                              const std::set<std::string>& allowed);

}  // namespace csp

namespace du {

QueryRequest make_query(const Workspace& ws, const UserCredentials& creds, std::string_view query_text,
                        std::size_t k, RandomSource& rng);

// make_query, ams::release_list, csp::search.
std::vector<SearchHit> query(const Workspace& ws, const UserCredentials& creds, std::string_view query_text,
                             std::size_t k, RandomSource& rng,
                             ams::ListSource source = ams::ListSource::Precomputed);

// Throws ProtocolError("access tree unsatisfied") before any symmetric work
// when the key does not satisfy the record's tree.
Bytes decrypt(const DocumentRecord& record, const cpabe::UserKey& key);

}  // namespace du

}  // namespace esas::entities
