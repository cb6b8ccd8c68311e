#include "esas/cpabe.hpp"

#include "esas/errors.hpp"

namespace esas::cpabe {

namespace {

constexpr std::uint32_t kEnvelopeVersion = 1;
constexpr std::string_view kAttributePrefix = "esas/attribute/";

void put_g1(ByteWriter& w, const G1& v) { w.bytes(v.to_bytes()); }
G1 get_g1(ByteReader& r) { return G1::from_bytes(r.bytes()); }
void put_gt(ByteWriter& w, const Gt& v) { w.raw(v.to_bytes()); }
Gt get_gt(ByteReader& r) { return Gt::from_bytes(r.raw(Gt::kEncodedSize)); }
void put_scalar(ByteWriter& w, const Scalar& v) { w.raw(v.to_bytes()); }
Scalar get_scalar(ByteReader& r) { return Scalar::from_bytes(r.raw(Scalar::kEncodedSize)); }

template <typename T>
T decode_envelope(std::string_view text, std::string_view tag) {
  const Bytes payload = unwrap_envelope(text, tag, kEnvelopeVersion);
  ByteReader r(payload);
  T v = T::read(r);
  r.expect_end();
  return v;
}

template <typename T>
std::string encode_envelope(const T& v, std::string_view tag) {
  ByteWriter w;
  v.write(w);
  return wrap_envelope(tag, kEnvelopeVersion, w.data());
}

void validate_attributes(const AttributeSet& attrs) {
  if (attrs.empty()) throw InvalidArgument("attribute set must not be empty");
  for (const auto& a : attrs) {
    if (!is_valid_attribute(a)) throw InvalidArgument("invalid attribute name '" + a + "'");
  }
}

// Evaluates a polynomial given by coefficients (constant term first) at x.
Scalar eval_poly(const std::vector<Scalar>& coeffs, std::uint32_t x) {
  const Scalar sx = Scalar::from_u64(x);
  Scalar acc;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * sx + *it;
  return acc;
}

void share_node(const PolicyNode& node, const Scalar& secret, RandomSource& rng, std::vector<Scalar>& out) {
  if (node.is_leaf()) {
    out.push_back(secret);
    return;
  }
  std::vector<Scalar> coeffs{secret};
  for (std::uint32_t i = 1; i < node.threshold; ++i) coeffs.push_back(Scalar::random_nonzero(rng));
  for (std::uint32_t i = 0; i < node.children.size(); ++i) {
    share_node(node.children[i], eval_poly(coeffs, i + 1), rng, out);
  }
}

std::optional<Gt> combine_node(const PolicyNode& node, const LeafValues& values, std::size_t& next_leaf) {
  if (node.is_leaf()) {
    const auto it = values.find(next_leaf++);
    if (it == values.end()) return std::nullopt;
    return it->second;
  }
  std::vector<std::uint32_t> points;
  std::vector<Gt> live;
  for (std::uint32_t i = 0; i < node.children.size(); ++i) {
    auto v = combine_node(node.children[i], values, next_leaf);
    if (v && points.size() < node.threshold) {
      points.push_back(i + 1);
      live.push_back(std::move(*v));
    }
  }
  if (points.size() < node.threshold) return std::nullopt;
  if (points.size() == 1) {
    // Single point: Lagrange coefficient is 1.
    return live.front();
  }
  Gt acc;
  for (std::size_t j = 0; j < points.size(); ++j) {
    acc = acc * live[j].pow(lagrange_at_zero(points[j], points));
  }
  return acc;
}

bool select_node(const PolicyNode& node, const AttributeSet& attrs, std::size_t& next_leaf,
                 std::vector<std::size_t>& chosen) {
  if (node.is_leaf()) {
    const std::size_t id = next_leaf++;
    if (!attrs.contains(node.attribute)) return false;
    chosen.push_back(id);
    return true;
  }
  std::uint32_t live = 0;
  for (const auto& child : node.children) {
    if (live < node.threshold) {
      std::vector<std::size_t> sub;
      if (select_node(child, attrs, next_leaf, sub)) {
        ++live;
        chosen.insert(chosen.end(), sub.begin(), sub.end());
      }
    } else {
      // Threshold met; skip the rest of the subtree's leaves.
      std::vector<std::size_t> ignored;
      select_node(child, AttributeSet{}, next_leaf, ignored);
    }
  }
  return live >= node.threshold;
}

}  // namespace

// ---------------------------------------------------------------------------

std::string SystemParams::to_envelope() const {
  ByteWriter w;
  w.raw(context.to_bytes());
  put_g1(w, g);
  put_g1(w, g_a);
  put_g1(w, g_b);
  put_g1(w, h);
  put_gt(w, x);
  return wrap_envelope("SYSTEM-PARAMS", kEnvelopeVersion, w.data());
}

SystemParams SystemParams::from_envelope(std::string_view text) {
  const Bytes payload = unwrap_envelope(text, "SYSTEM-PARAMS", kEnvelopeVersion);
  ByteReader r(payload);
  SystemParams p;
  p.context = group::GroupContext::from_bytes(r);
  p.g = get_g1(r);
  p.g_a = get_g1(r);
  p.g_b = get_g1(r);
  p.h = get_g1(r);
  p.x = get_gt(r);
  r.expect_end();
  return p;
}

std::string MasterSecret::to_envelope() const {
  ByteWriter w;
  put_scalar(w, alpha);
  put_scalar(w, beta);
  put_scalar(w, a);
  put_scalar(w, b);
  return wrap_envelope("MASTER-SECRET", kEnvelopeVersion, w.data());
}

MasterSecret MasterSecret::from_envelope(std::string_view text) {
  const Bytes payload = unwrap_envelope(text, "MASTER-SECRET", kEnvelopeVersion);
  ByteReader r(payload);
  MasterSecret m;
  m.alpha = get_scalar(r);
  m.beta = get_scalar(r);
  m.a = get_scalar(r);
  m.b = get_scalar(r);
  r.expect_end();
  return m;
}

SetupResult system_setup(const group::GroupContext& ctx, RandomSource& rng) {
  SetupResult out;
  auto& msk = out.master;
  msk.alpha = Scalar::random_nonzero(rng);
  msk.beta = Scalar::random_nonzero(rng);
  msk.a = Scalar::random_nonzero(rng);
  msk.b = Scalar::random_nonzero(rng);

  auto& pp = out.params;
  pp.context = ctx;
  pp.g = ctx.generator();
  pp.g_a = pp.g.pow(msk.a);
  pp.g_b = pp.g.pow(msk.b);
  pp.h = pp.g.pow(msk.beta);
  pp.x = group::pair(pp.g, pp.g).pow(msk.alpha);
  return out;
}

// ---------------------------------------------------------------------------

AttributeSet UserKey::attribute_set() const {
  AttributeSet out;
  for (const auto& [name, _] : attributes) out.insert(name);
  return out;
}

UserKey UserKey::restricted_to(const AttributeSet& attrs) const {
  UserKey k{s, s1, {}};
  for (const auto& a : attrs) {
    if (auto it = attributes.find(a); it != attributes.end()) k.attributes.emplace(a, it->second);
  }
  return k;
}

void UserKey::write(ByteWriter& w) const {
  put_g1(w, s);
  put_g1(w, s1);
  w.u32(static_cast<std::uint32_t>(attributes.size()));
  for (const auto& [name, comp] : attributes) {
    w.str(name);
    put_g1(w, comp.s_m);
    put_g1(w, comp.s_m_prime);
  }
}

UserKey UserKey::read(ByteReader& r) {
  UserKey k;
  k.s = get_g1(r);
  k.s1 = get_g1(r);
  const auto n = r.count(12);
  for (std::uint32_t i = 0; i < n; ++i) {
    auto name = r.str();
    if (!is_valid_attribute(name)) throw FormatError("invalid attribute name in key");
    AttributeKey comp{get_g1(r), get_g1(r)};
    if (!k.attributes.emplace(std::move(name), comp).second) throw FormatError("duplicate attribute in key");
  }
  return k;
}

std::string UserKey::to_envelope() const { return encode_envelope(*this, "USER-KEY"); }

UserKey UserKey::from_envelope(std::string_view text) { return decode_envelope<UserKey>(text, "USER-KEY"); }

G1 hash_attribute(std::string_view attribute) {
  std::string label(kAttributePrefix);
  label.append(attribute);
  return group::hash_to_g1(label);
}

UserKey user_keygen(const SystemParams& params, const MasterSecret& msk, const AttributeSet& attrs,
                    RandomSource& rng) {
  return user_keygen(params, msk, attrs, Scalar::random_nonzero(rng), rng);
}

UserKey user_keygen(const SystemParams& params, const MasterSecret& msk, const AttributeSet& attrs,
                    const Scalar& u, RandomSource& rng) {
  validate_attributes(attrs);
  if (u.is_zero()) throw InvalidArgument("user secret u must be nonzero");
  UserKey key;
  key.s = params.g.pow((msk.alpha + u) * msk.beta.inverse());
  key.s1 = params.g.pow(u);
  for (const auto& attr : attrs) {
    const Scalar r_m = Scalar::random_nonzero(rng);
    key.attributes.emplace(attr, AttributeKey{key.s1 * hash_attribute(attr).pow(r_m), params.g.pow(r_m)});
  }
  return key;
}

// ---------------------------------------------------------------------------

void KeyCiphertext::write(ByteWriter& w) const {
  tree.write(w);
  put_gt(w, c);
  put_g1(w, c0);
  put_g1(w, c1);
  put_g1(w, c2);
  w.u32(static_cast<std::uint32_t>(leaves.size()));
  for (const auto& leaf : leaves) {
    put_g1(w, leaf.c);
    put_g1(w, leaf.c_prime);
  }
}

KeyCiphertext KeyCiphertext::read(ByteReader& r) {
  KeyCiphertext ck{AccessTree::read(r), {}, {}, {}, {}, {}};
  ck.c = get_gt(r);
  ck.c0 = get_g1(r);
  ck.c1 = get_g1(r);
  ck.c2 = get_g1(r);
  const auto n = r.count(8);
  if (n != ck.tree.leaf_count()) throw FormatError("leaf components do not match the access tree");
  ck.leaves.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) ck.leaves.push_back(LeafComponent{get_g1(r), get_g1(r)});
  return ck;
}

std::string KeyCiphertext::to_envelope() const { return encode_envelope(*this, "KEY-CIPHERTEXT"); }

KeyCiphertext KeyCiphertext::from_envelope(std::string_view text) {
  return decode_envelope<KeyCiphertext>(text, "KEY-CIPHERTEXT");
}

Scalar lagrange_at_zero(std::uint32_t index, const std::vector<std::uint32_t>& points) {
  Scalar num = Scalar::from_u64(1);
  Scalar den = Scalar::from_u64(1);
  const Scalar i = Scalar::from_u64(index);
  for (auto j : points) {
    if (j == index) continue;
    const Scalar sj = Scalar::from_u64(j);
    num = num * (-sj);
    den = den * (i - sj);
  }
  return num * den.inverse();
}

std::vector<Scalar> share_root_secret(const AccessTree& tree, const Scalar& r0, RandomSource& rng) {
  std::vector<Scalar> out;
  out.reserve(tree.leaf_count());
  share_node(tree.root(), r0, rng, out);
  return out;
}

Encapsulation encapsulate_key(const SystemParams& params, const AccessTree& tree, RandomSource& rng) {
  Gt key = Gt::random(rng);
  const Scalar s = Scalar::random_nonzero(rng);
  const Scalar r0 = Scalar::random_nonzero(rng);
  KeyCiphertext ck = encapsulate_key(params, tree, key, s, r0, rng);
  return {std::move(key), std::move(ck)};
}

KeyCiphertext encapsulate_key(const SystemParams& params, const AccessTree& tree, const Gt& key,
                              const Scalar& s, const Scalar& r0, RandomSource& rng) {
  KeyCiphertext ck{tree, key * params.x.pow(r0), params.g.pow(s), params.h.pow(r0), params.g.pow(s - r0), {}};
  const auto shares = share_root_secret(tree, r0, rng);
  ck.leaves.reserve(shares.size());
  for (std::size_t n = 0; n < shares.size(); ++n) {
    ck.leaves.push_back(
        LeafComponent{params.g.pow(shares[n]), hash_attribute(tree.leaves()[n]).pow(shares[n])});
  }
  return ck;
}

Gt leaf_decrypt(const UserKey& key, const KeyCiphertext& ck, std::size_t leaf) {
  if (leaf >= ck.leaves.size() || leaf >= ck.tree.leaf_count()) {
    throw InvalidArgument("leaf index out of range");
  }
  const auto& attr = ck.tree.leaves()[leaf];
  const auto it = key.attributes.find(attr);
  if (it == key.attributes.end()) throw ProtocolError("attribute '" + attr + "' not held by key");
  const auto& comp = ck.leaves[leaf];
  return group::pair_ratio(it->second.s_m, comp.c, it->second.s_m_prime, comp.c_prime);
}

std::optional<Gt> reconstruct_root(const AccessTree& tree, const LeafValues& values) {
  std::size_t next_leaf = 0;
  return combine_node(tree.root(), values, next_leaf);
}

std::optional<std::vector<std::size_t>> select_leaves(const AccessTree& tree, const AttributeSet& attrs) {
  std::vector<std::size_t> chosen;
  std::size_t next_leaf = 0;
  if (!select_node(tree.root(), attrs, next_leaf, chosen)) return std::nullopt;
  return chosen;
}

std::optional<Gt> recover_root(const KeyCiphertext& ck, const UserKey& key) {
  const auto chosen = select_leaves(ck.tree, key.attribute_set());
  if (!chosen) return std::nullopt;
  LeafValues values;
  for (auto leaf : *chosen) values.emplace(leaf, leaf_decrypt(key, ck, leaf));
  return reconstruct_root(ck.tree, values);
}

bool check_root(const KeyCiphertext& ck, const UserKey& key, const Gt& root) {
  // e(C2, S1) * M_r == e(C0, S1), evaluated as e(C0, S1) / e(C2, S1) == M_r.
  return group::pair_ratio(ck.c0, key.s1, ck.c2, key.s1) == root;
}

std::optional<Gt> authorize(const KeyCiphertext& ck, const UserKey& key) {
  auto root = recover_root(ck, key);
  if (!root || !check_root(ck, key, *root)) return std::nullopt;
  return root;
}

bool verify_authorization(const KeyCiphertext& ck, const UserKey& key) { return authorize(ck, key).has_value(); }

Gt decapsulate_key(const KeyCiphertext& ck, const UserKey& key, const Gt& root) {
  return ck.c / (group::pair(ck.c1, key.s) / root);
}

}  // namespace esas::cpabe
