#pragma once

// Ciphertext-policy attribute-based key encapsulation used for search
// authorization and document key delivery.
//
//   setup        X = e(g,g)^alpha, h = g^beta
//   user key     S = g^((alpha+u)/beta), S1 = g^u,
//                S_m = g^u * H(m)^(r_m), S'_m = g^(r_m)
//   encapsulate  C = K * X^r0, C0 = g^s, C1 = h^r0, C2 = g^(s-r0),
//                C_n = g^(q_n(0)), C'_n = H(att(n))^(q_n(0))
//   leaf value   M_n = e(S_m, C_n) / e(S'_m, C'_n) = e(g,g)^(u q_n(0))
//   root value   M_r = e(g,g)^(u r0) by Lagrange interpolation in the exponent
//   authorize    e(C2, S1) * M_r == e(C0, S1)
//   decapsulate  K = C / (e(C1, S) / M_r)

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "esas/group.hpp"
#include "esas/policy.hpp"

namespace esas::cpabe {

using group::G1;
using group::Gt;
using group::Scalar;

using AttributeSet = std::set<std::string>;

struct SystemParams {
  group::GroupContext context;
  G1 g;
  G1 g_a;
  G1 g_b;
  // g^beta. Owners need it to form C1 without knowing beta.
  G1 h;
  // e(g, g)^alpha.
  Gt x;

  std::string to_envelope() const;
  static SystemParams from_envelope(std::string_view text);
};

struct MasterSecret {
  Scalar alpha;
  Scalar beta;
  Scalar a;
  Scalar b;

  std::string to_envelope() const;
  static MasterSecret from_envelope(std::string_view text);
};

struct SetupResult {
  SystemParams params;
  MasterSecret master;
};

SetupResult system_setup(const group::GroupContext& ctx, RandomSource& rng);

struct AttributeKey {
  G1 s_m;        // g^u * H(m)^r_m
  G1 s_m_prime;  // g^r_m
};

struct UserKey {
  G1 s;   // g^((alpha+u)/beta)
  G1 s1;  // g^u
  std::map<std::string, AttributeKey> attributes;

  AttributeSet attribute_set() const;
  bool holds(const std::string& attribute) const { return attributes.contains(attribute); }

  // Same key with only the listed attributes' components.
  UserKey restricted_to(const AttributeSet& attrs) const;

  void write(ByteWriter& w) const;
  static UserKey read(ByteReader& r);
  std::string to_envelope() const;
  static UserKey from_envelope(std::string_view text);
};

// Throws InvalidArgument on an empty or malformed attribute set.
UserKey user_keygen(const SystemParams& params, const MasterSecret& msk, const AttributeSet& attrs,
                    RandomSource& rng);
// Variant with a caller-chosen u, for test harnesses that need it.
UserKey user_keygen(const SystemParams& params, const MasterSecret& msk, const AttributeSet& attrs,
                    const Scalar& u, RandomSource& rng);

struct LeafComponent {
  G1 c;        // g^q_n(0)
  G1 c_prime;  // H(att(n))^q_n(0)
};

struct KeyCiphertext {
  AccessTree tree;
  Gt c;
  G1 c0;
  G1 c1;
  G1 c2;
  // One entry per leaf, in AccessTree::leaves() order.
  std::vector<LeafComponent> leaves;

  void write(ByteWriter& w) const;
  static KeyCiphertext read(ByteReader& r);
  std::string to_envelope() const;
  static KeyCiphertext from_envelope(std::string_view text);
};

// Hash of an attribute name onto the group, with its own domain prefix.
G1 hash_attribute(std::string_view attribute);

// Lagrange basis coefficient for `index` over `points`, evaluated at 0.
Scalar lagrange_at_zero(std::uint32_t index, const std::vector<std::uint32_t>& points);

// Top-down polynomial sharing of r0; returns q_n(0) per leaf.
std::vector<Scalar> share_root_secret(const AccessTree& tree, const Scalar& r0, RandomSource& rng);

struct Encapsulation {
  Gt key;
  KeyCiphertext ciphertext;
};

// Fresh K, s and r0.
Encapsulation encapsulate_key(const SystemParams& params, const AccessTree& tree, RandomSource& rng);
// Caller-chosen K, s and r0; rng drives the sharing polynomials only.
KeyCiphertext encapsulate_key(const SystemParams& params, const AccessTree& tree, const Gt& key,
                              const Scalar& s, const Scalar& r0, RandomSource& rng);

// M_n for one leaf. Throws ProtocolError when the key lacks att(n).
Gt leaf_decrypt(const UserKey& key, const KeyCiphertext& ck, std::size_t leaf);

using LeafValues = std::map<std::size_t, Gt>;

// Combines leaf values bottom-up. A node is live when at least `threshold`
// of its children are live; the live children with the smallest indexes are
// used. Returns nullopt when the root is not live.
std::optional<Gt> reconstruct_root(const AccessTree& tree, const LeafValues& values);

// Leaves whose values reconstruct_root would consume for this attribute set,
// or nullopt if the set does not satisfy the tree.
std::optional<std::vector<std::size_t>> select_leaves(const AccessTree& tree, const AttributeSet& attrs);

// Leaf decryption of exactly the selected leaves followed by reconstruction.
std::optional<Gt> recover_root(const KeyCiphertext& ck, const UserKey& key);

// e(C2, S1) * M_r == e(C0, S1).
bool check_root(const KeyCiphertext& ck, const UserKey& key, const Gt& root);

bool verify_authorization(const KeyCiphertext& ck, const UserKey& key);

// Root value if and only if the key passes the authorization check.
std::optional<Gt> authorize(const KeyCiphertext& ck, const UserKey& key);

Gt decapsulate_key(const KeyCiphertext& ck, const UserKey& key, const Gt& root);

}  // namespace esas::cpabe
