#include "esas/group.hpp"

#include <openssl/evp.h>
#include <openssl/kdf.h>

#include <array>
#include <cstring>
#include <memory>
#include <vector>

#include "esas/errors.hpp"

namespace esas::group {

namespace {

constexpr std::string_view kHashDst = "ESAS-V01-CS01-with-BLS12381G1_XMD:SHA-256_SSWU_RO_ATTRIBUTE_";
constexpr std::string_view kKdfSalt = "esas/kdf/v1";
constexpr std::string_view kKdfInfo = "esas document key";
constexpr std::size_t kNonceSize = 12;
constexpr std::size_t kTagSize = 16;

constexpr std::uint8_t kSingleFlag = 1;
constexpr std::uint8_t kDualFlag = 2;

const mpz_class& group_order() {
  static const mpz_class p("73eda753299d7d483339d80809a1d80553bda402fffe5bfeffffffff00000001", 16);
  return p;
}

// Little-endian 32-byte export for blst scalar multiplication.
std::array<std::uint8_t, 32> scalar_le(const Scalar& s) {
  std::array<std::uint8_t, 32> out{};
  std::size_t count = 0;
  mpz_export(out.data(), &count, -1, 1, -1, 0, s.value().get_mpz_t());
  return out;
}

blst_p1_affine affine(const blst_p1& p) {
  blst_p1_affine a;
  blst_p1_to_affine(&a, &p);
  return a;
}

blst_p2_affine affine(const blst_p2& p) {
  blst_p2_affine a;
  blst_p2_to_affine(&a, &p);
  return a;
}

blst_fp12 fp12_one() { return *blst_fp12_one(); }

// Oriented (second-group, first-group) operands for one Miller loop.
struct LoopInput {
  blst_p2_affine q;
  blst_p1_affine p;
  bool trivial;
};

LoopInput orient(const G1& a, const G1& b) {
  LoopInput in{};
  const blst_p1* p1 = nullptr;
  const blst_p2* p2 = nullptr;
  if (b.second()) {
    p1 = &a.first();
    p2 = &*b.second();
  } else if (a.second()) {
    p1 = &b.first();
    p2 = &*a.second();
  } else {
    throw InvalidArgument("pairing undefined: neither operand has a dual representation");
  }
  in.trivial = blst_p1_is_inf(p1) || blst_p2_is_inf(p2);
  if (!in.trivial) {
    in.p = affine(*p1);
    in.q = affine(*p2);
  }
  return in;
}

}  // namespace

// ---------------------------------------------------------------------------
// Scalar

const mpz_class& Scalar::modulus() { return group_order(); }

Scalar Scalar::from_u64(std::uint64_t v) {
  mpz_class z;
  mpz_import(z.get_mpz_t(), 1, 1, sizeof(v), 0, 0, &v);
  return from_mpz(z);
}

Scalar Scalar::from_int(std::int64_t v) {
  if (v >= 0) return from_u64(static_cast<std::uint64_t>(v));
  return -from_u64(static_cast<std::uint64_t>(-(v + 1)) + 1);
}

Scalar Scalar::from_mpz(const mpz_class& v) {
  Scalar s;
  mpz_mod(s.v_.get_mpz_t(), v.get_mpz_t(), group_order().get_mpz_t());
  return s;
}

Scalar Scalar::random_nonzero(RandomSource& rng) {
  // 48 bytes reduced mod (p - 1) has statistical distance < 2^-128 from
  // uniform; adding 1 lands in [1, p-1].
  std::array<std::uint8_t, 48> buf{};
  rng.fill(buf);
  mpz_class z;
  mpz_import(z.get_mpz_t(), buf.size(), 1, 1, 0, 0, buf.data());
  const mpz_class pm1 = group_order() - 1;
  mpz_mod(z.get_mpz_t(), z.get_mpz_t(), pm1.get_mpz_t());
  Scalar s;
  s.v_ = z + 1;
  return s;
}

Scalar Scalar::from_bytes(std::span<const std::uint8_t> b) {
  if (b.size() != kEncodedSize) throw FormatError("scalar encoding must be 32 bytes");
  Scalar s;
  mpz_import(s.v_.get_mpz_t(), b.size(), 1, 1, 0, 0, b.data());
  if (s.v_ >= group_order()) throw FormatError("scalar not reduced mod p");
  return s;
}

Bytes Scalar::to_bytes() const {
  Bytes out(kEncodedSize, 0);
  std::size_t count = 0;
  std::array<std::uint8_t, kEncodedSize> tmp{};
  mpz_export(tmp.data(), &count, 1, 1, 0, 0, v_.get_mpz_t());
  std::memcpy(out.data() + (kEncodedSize - count), tmp.data(), count);
  return out;
}

Scalar Scalar::inverse() const {
  if (is_zero()) throw InvalidArgument("zero has no inverse mod p");
  Scalar s;
  mpz_invert(s.v_.get_mpz_t(), v_.get_mpz_t(), group_order().get_mpz_t());
  return s;
}

Scalar Scalar::operator-() const {
  Scalar s;
  if (!is_zero()) s.v_ = group_order() - v_;
  return s;
}

Scalar operator+(const Scalar& a, const Scalar& b) {
  Scalar s;
  s.v_ = a.v_ + b.v_;
  if (s.v_ >= group_order()) s.v_ -= group_order();
  return s;
}

Scalar operator-(const Scalar& a, const Scalar& b) { return a + (-b); }

Scalar operator*(const Scalar& a, const Scalar& b) {
  return Scalar::from_mpz(a.v_ * b.v_);
}

// ---------------------------------------------------------------------------
// G1 facade

G1::G1() : p1_{}, p2_(blst_p2{}) {}

G1 G1::generator() { return G1(*blst_p1_generator(), *blst_p2_generator()); }

bool G1::is_identity() const { return blst_p1_is_inf(&p1_); }

G1 G1::pow(const Scalar& e) const {
  const auto le = scalar_le(e);
  blst_p1 r1;
  blst_p1_mult(&r1, &p1_, le.data(), 255);
  std::optional<blst_p2> r2;
  if (p2_) {
    blst_p2 t;
    blst_p2_mult(&t, &*p2_, le.data(), 255);
    r2 = t;
  }
  return G1(r1, r2);
}

G1 G1::inverse() const {
  G1 r = *this;
  blst_p1_cneg(&r.p1_, true);
  if (r.p2_) blst_p2_cneg(&*r.p2_, true);
  return r;
}

G1 operator*(const G1& a, const G1& b) {
  blst_p1 r1;
  blst_p1_add_or_double(&r1, &a.p1_, &b.p1_);
  std::optional<blst_p2> r2;
  if (a.p2_ && b.p2_) {
    blst_p2 t;
    blst_p2_add_or_double(&t, &*a.p2_, &*b.p2_);
    r2 = t;
  }
  return G1(r1, r2);
}

bool operator==(const G1& a, const G1& b) {
  if (!blst_p1_is_equal(&a.p1_, &b.p1_)) return false;
  if (a.p2_ && b.p2_) return blst_p2_is_equal(&*a.p2_, &*b.p2_);
  return true;
}

Bytes G1::to_bytes() const {
  Bytes out;
  out.reserve(1 + 48 + 96);
  out.push_back(p2_ ? kDualFlag : kSingleFlag);
  std::array<std::uint8_t, 48> c1{};
  blst_p1_compress(c1.data(), &p1_);
  out.insert(out.end(), c1.begin(), c1.end());
  if (p2_) {
    std::array<std::uint8_t, 96> c2{};
    blst_p2_compress(c2.data(), &*p2_);
    out.insert(out.end(), c2.begin(), c2.end());
  }
  return out;
}

namespace {

// e(a1, h) == e(g, a2), i.e. a1 and a2 share one discrete log.
bool same_exponent(const blst_p1_affine& a1, const blst_p2_affine& a2) {
  const bool inf1 = blst_p1_affine_is_inf(&a1);
  const bool inf2 = blst_p2_affine_is_inf(&a2);
  if (inf1 || inf2) return inf1 == inf2;
  static const blst_p1_affine neg_g = [] {
    blst_p1 g = *blst_p1_generator();
    blst_p1_cneg(&g, true);
    blst_p1_affine out;
    blst_p1_to_affine(&out, &g);
    return out;
  }();
  const blst_p2_affine* qs[2] = {blst_p2_affine_generator(), &a2};
  const blst_p1_affine* ps[2] = {&a1, &neg_g};
  blst_fp12 ml, r;
  blst_miller_loop_n(&ml, qs, ps, 2);
  blst_final_exp(&r, &ml);
  return blst_fp12_is_one(&r);
}

}  // namespace

G1 G1::from_bytes(std::span<const std::uint8_t> b) {
  if (b.empty()) throw FormatError("empty group element encoding");
  const std::uint8_t flag = b[0];
  const std::size_t expected = flag == kDualFlag ? 1 + 48 + 96 : flag == kSingleFlag ? 1 + 48 : 0;
  if (expected == 0 || b.size() != expected) throw FormatError("bad group element encoding");

  blst_p1_affine a1;
  if (blst_p1_uncompress(&a1, b.data() + 1) != BLST_SUCCESS || !blst_p1_affine_in_g1(&a1)) {
    throw FormatError("invalid first-group point");
  }
  blst_p1 p1;
  blst_p1_from_affine(&p1, &a1);
  std::optional<blst_p2> p2;
  if (flag == kDualFlag) {
    blst_p2_affine a2;
    if (blst_p2_uncompress(&a2, b.data() + 49) != BLST_SUCCESS || !blst_p2_affine_in_g2(&a2)) {
      throw FormatError("invalid second-group point");
    }
    if (!same_exponent(a1, a2)) throw FormatError("dual halves encode different elements");
    blst_p2 t;
    blst_p2_from_affine(&t, &a2);
    p2 = t;
  }
  G1 g(p1, p2);
  if (g.to_bytes() != Bytes(b.begin(), b.end())) throw FormatError("non-canonical point encoding");
  return g;
}

G1 hash_to_g1(std::span<const std::uint8_t> label) {
  blst_p1 out;
  blst_hash_to_g1(&out, label.data(), label.size(),
                  reinterpret_cast<const std::uint8_t*>(kHashDst.data()), kHashDst.size(), nullptr, 0);
  return G1(out, std::nullopt);
}

G1 hash_to_g1(std::string_view label) {
  return hash_to_g1(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(label.data()),
                                                  label.size()));
}

// ---------------------------------------------------------------------------
// Gt

Gt::Gt() : v_(fp12_one()) {}

const Gt& Gt::generator() {
  static const Gt g = pair(G1::generator(), G1::generator());
  return g;
}

Gt Gt::random(RandomSource& rng) { return generator().pow(Scalar::random_nonzero(rng)); }

bool Gt::is_one() const { return blst_fp12_is_one(&v_); }

Gt Gt::pow(const Scalar& e) const {
  // Fixed 4-bit window; GT elements lie in the cyclotomic subgroup so
  // cyclotomic squaring applies.
  std::array<blst_fp12, 16> table;
  table[0] = fp12_one();
  table[1] = v_;
  for (std::size_t i = 2; i < table.size(); ++i) blst_fp12_mul(&table[i], &table[i - 1], &v_);

  const auto le = scalar_le(e);
  blst_fp12 acc = fp12_one();
  bool started = false;
  for (int byte = 31; byte >= 0; --byte) {
    for (int half = 1; half >= 0; --half) {
      const unsigned nib = (le[static_cast<std::size_t>(byte)] >> (4 * half)) & 0xf;
      if (started) {
        for (int s = 0; s < 4; ++s) blst_fp12_cyclotomic_sqr(&acc, &acc);
      }
      if (nib != 0) {
        if (started) {
          blst_fp12_mul(&acc, &acc, &table[nib]);
        } else {
          acc = table[nib];
          started = true;
        }
      }
    }
  }
  return Gt(acc);
}

Gt Gt::inverse() const {
  blst_fp12 r = v_;
  blst_fp12_conjugate(&r);
  return Gt(r);
}

Gt operator*(const Gt& a, const Gt& b) {
  blst_fp12 r;
  blst_fp12_mul(&r, &a.v_, &b.v_);
  return Gt(r);
}

bool operator==(const Gt& a, const Gt& b) { return blst_fp12_is_equal(&a.v_, &b.v_); }

Bytes Gt::to_bytes() const {
  Bytes out(kEncodedSize);
  blst_bendian_from_fp12(out.data(), &v_);
  return out;
}

Gt Gt::from_bytes(std::span<const std::uint8_t> b) {
  if (b.size() != kEncodedSize) throw FormatError("GT encoding must be 576 bytes");
  blst_fp12 v;
  const std::uint8_t* p = b.data();
  // Inverse of blst_bendian_from_fp12's coefficient order.
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 2; ++j) {
      blst_fp_from_bendian(&v.fp6[j].fp2[i].fp[0], p);
      p += 48;
      blst_fp_from_bendian(&v.fp6[j].fp2[i].fp[1], p);
      p += 48;
    }
  }
  Gt g(v);
  if (g.to_bytes() != Bytes(b.begin(), b.end())) throw FormatError("non-canonical GT encoding");
  if (!blst_fp12_in_group(&v)) throw FormatError("GT element outside the prime-order subgroup");
  return g;
}

// ---------------------------------------------------------------------------
// Pairing

Gt pair(const G1& a, const G1& b) {
  const LoopInput in = orient(a, b);
  if (in.trivial) return Gt();
  blst_fp12 ml, r;
  blst_miller_loop(&ml, &in.q, &in.p);
  blst_final_exp(&r, &ml);
  return Gt(r);
}

Gt pair_ratio(const G1& a, const G1& b, const G1& c, const G1& d) {
  const LoopInput num = orient(a, b);
  const LoopInput den = orient(c.inverse(), d);
  std::vector<const blst_p2_affine*> qs;
  std::vector<const blst_p1_affine*> ps;
  if (!num.trivial) {
    qs.push_back(&num.q);
    ps.push_back(&num.p);
  }
  if (!den.trivial) {
    qs.push_back(&den.q);
    ps.push_back(&den.p);
  }
  if (qs.empty()) return Gt();
  blst_fp12 ml, r;
  blst_miller_loop_n(&ml, qs.data(), ps.data(), qs.size());
  blst_final_exp(&r, &ml);
  return Gt(r);
}

// ---------------------------------------------------------------------------
// Context

Bytes GroupContext::to_bytes() const {
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(security_level));
  w.str(curve);
  return std::move(w).take();
}

GroupContext GroupContext::from_bytes(ByteReader& r) {
  GroupContext ctx;
  ctx.security_level = static_cast<int>(r.u32());
  ctx.curve = r.str();
  if (ctx.security_level != kSecurityLevel || ctx.curve != kCurveName) {
    throw FormatError("unsupported group context " + ctx.curve);
  }
  return ctx;
}

GroupContext setup_group(int security_level) {
  if (security_level != kSecurityLevel) {
    throw InvalidArgument("unsupported security level " + std::to_string(security_level));
  }
  return GroupContext{};
}

// ---------------------------------------------------------------------------
// Symmetric layer

namespace {

SymmetricKey hkdf(std::span<const std::uint8_t> ikm) {
  std::unique_ptr<EVP_PKEY_CTX, decltype(&EVP_PKEY_CTX_free)> ctx(
      EVP_PKEY_CTX_new_id(EVP_PKEY_HKDF, nullptr), &EVP_PKEY_CTX_free);
  SymmetricKey key;
  std::size_t len = key.bytes.size();
  if (!ctx || EVP_PKEY_derive_init(ctx.get()) <= 0 ||
      EVP_PKEY_CTX_set_hkdf_md(ctx.get(), EVP_sha256()) <= 0 ||
      EVP_PKEY_CTX_set1_hkdf_salt(ctx.get(), reinterpret_cast<const unsigned char*>(kKdfSalt.data()),
                                  static_cast<int>(kKdfSalt.size())) <= 0 ||
      EVP_PKEY_CTX_set1_hkdf_key(ctx.get(), ikm.data(), static_cast<int>(ikm.size())) <= 0 ||
      EVP_PKEY_CTX_add1_hkdf_info(ctx.get(), reinterpret_cast<const unsigned char*>(kKdfInfo.data()),
                                  static_cast<int>(kKdfInfo.size())) <= 0 ||
      EVP_PKEY_derive(ctx.get(), key.bytes.data(), &len) <= 0 || len != key.bytes.size()) {
    throw Error("HKDF derivation failed");
  }
  return key;
}

using CipherCtx = std::unique_ptr<EVP_CIPHER_CTX, decltype(&EVP_CIPHER_CTX_free)>;

}  // namespace

SymmetricKey kdf_key(const Gt& element) { return hkdf(element.to_bytes()); }

SymmetricKey kdf_key(const G1& element) { return hkdf(element.to_bytes()); }

Bytes sym_encrypt(const SymmetricKey& key, std::span<const std::uint8_t> plaintext,
                  RandomSource& rng) {
  Bytes out(kNonceSize + plaintext.size() + kTagSize);
  rng.fill(std::span(out.data(), kNonceSize));
  CipherCtx ctx(EVP_CIPHER_CTX_new(), &EVP_CIPHER_CTX_free);
  int len = 0;
  if (!ctx || EVP_EncryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, key.bytes.data(), out.data()) != 1 ||
      EVP_EncryptUpdate(ctx.get(), out.data() + kNonceSize, &len, plaintext.data(),
                        static_cast<int>(plaintext.size())) != 1 ||
      EVP_EncryptFinal_ex(ctx.get(), out.data() + kNonceSize + len, &len) != 1 ||
      EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_GET_TAG, static_cast<int>(kTagSize),
                          out.data() + kNonceSize + plaintext.size()) != 1) {
    throw Error("AES-GCM encryption failed");
  }
  return out;
}

Bytes sym_decrypt(const SymmetricKey& key, std::span<const std::uint8_t> ciphertext) {
  if (ciphertext.size() < kNonceSize + kTagSize) throw AuthenticationError("ciphertext too short");
  const std::size_t body = ciphertext.size() - kNonceSize - kTagSize;
  Bytes out(body);
  std::array<std::uint8_t, kTagSize> tag{};
  std::memcpy(tag.data(), ciphertext.data() + kNonceSize + body, kTagSize);
  CipherCtx ctx(EVP_CIPHER_CTX_new(), &EVP_CIPHER_CTX_free);
  int len = 0;
  if (!ctx ||
      EVP_DecryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, key.bytes.data(), ciphertext.data()) != 1 ||
      EVP_DecryptUpdate(ctx.get(), out.data(), &len, ciphertext.data() + kNonceSize,
                        static_cast<int>(body)) != 1 ||
      EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_TAG, static_cast<int>(kTagSize), tag.data()) != 1) {
    throw Error("AES-GCM initialisation failed");
  }
  if (EVP_DecryptFinal_ex(ctx.get(), out.data() + len, &len) != 1) {
    throw AuthenticationError("authenticated decryption failed");
  }
  return out;
}

}  // namespace esas::group
