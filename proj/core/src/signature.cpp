#include "esas/signature.hpp"

#include <openssl/evp.h>

#include <memory>

#include "esas/errors.hpp"

namespace esas::signature {

namespace {

struct PkeyFree {
  void operator()(EVP_PKEY* p) const { EVP_PKEY_free(p); }
};
struct MdCtxFree {
  void operator()(EVP_MD_CTX* c) const { EVP_MD_CTX_free(c); }
};
using Pkey = std::unique_ptr<EVP_PKEY, PkeyFree>;
using MdCtx = std::unique_ptr<EVP_MD_CTX, MdCtxFree>;

Pkey private_pkey(const SigningKey& sk) {
  Pkey p(EVP_PKEY_new_raw_private_key(EVP_PKEY_ED25519, nullptr, sk.data(), sk.size()));
  if (!p) throw Error("Ed25519 private key rejected by OpenSSL");
  return p;
}

}  // namespace

SigningKey generate(RandomSource& rng) {
  SigningKey sk{};
  rng.fill(sk);
  return sk;
}

VerifyKey public_key(const SigningKey& sk) {
  auto p = private_pkey(sk);
  VerifyKey vk{};
  std::size_t len = vk.size();
  if (EVP_PKEY_get_raw_public_key(p.get(), vk.data(), &len) != 1 || len != vk.size()) {
    throw Error("cannot derive Ed25519 public key");
  }
  return vk;
}

Bytes sign(const SigningKey& sk, std::span<const std::uint8_t> message) {
  auto p = private_pkey(sk);
  MdCtx ctx(EVP_MD_CTX_new());
  Bytes sig(kSignatureSize);
  std::size_t len = sig.size();
  if (!ctx || EVP_DigestSignInit(ctx.get(), nullptr, nullptr, nullptr, p.get()) != 1 ||
      EVP_DigestSign(ctx.get(), sig.data(), &len, message.data(), message.size()) != 1 || len != sig.size()) {
    throw Error("Ed25519 signing failed");
  }
  return sig;
}

bool verify(const VerifyKey& vk, std::span<const std::uint8_t> message, std::span<const std::uint8_t> sig) {
  if (sig.size() != kSignatureSize) return false;
  Pkey p(EVP_PKEY_new_raw_public_key(EVP_PKEY_ED25519, nullptr, vk.data(), vk.size()));
  if (!p) return false;
  MdCtx ctx(EVP_MD_CTX_new());
  if (!ctx || EVP_DigestVerifyInit(ctx.get(), nullptr, nullptr, nullptr, p.get()) != 1) return false;
  return EVP_DigestVerify(ctx.get(), sig.data(), sig.size(), message.data(), message.size()) == 1;
}

}  // namespace esas::signature
