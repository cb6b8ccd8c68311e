#include "esas/random.hpp"

#include <openssl/evp.h>
#include <openssl/rand.h>
#include <openssl/sha.h>

#include <array>
#include <climits>
#include <cstring>
#include <limits>

#include "esas/errors.hpp"

namespace esas {

std::vector<std::uint8_t> RandomSource::bytes(std::size_t n) {
  std::vector<std::uint8_t> out(n);
  fill(out);
  return out;
}

std::uint64_t RandomSource::next_u64() {
  std::array<std::uint8_t, 8> buf{};
  fill(buf);
  std::uint64_t v = 0;
  for (auto b : buf) v = (v << 8) | b;
  return v;
}

std::int64_t RandomSource::uniform_int(std::int64_t lo, std::int64_t hi) {
  if (lo > hi) throw InvalidArgument("uniform_int: empty range");
  const auto span = static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo);
  if (span == std::numeric_limits<std::uint64_t>::max()) {
    return static_cast<std::int64_t>(next_u64());
  }
  const std::uint64_t range = span + 1;
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % range;
  std::uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(lo) + x % range);
}

bool RandomSource::coin() {
  std::array<std::uint8_t, 1> b{};
  fill(b);
  return (b[0] & 1u) != 0;
}

void SystemRandom::fill(std::span<std::uint8_t> out) {
  if (out.empty()) return;
  if (RAND_bytes(out.data(), static_cast<int>(out.size())) != 1) {
    throw Error("RAND_bytes failed");
  }
}

struct SeededRandom::Impl {
  EVP_CIPHER_CTX* ctx = nullptr;
  ~Impl() { EVP_CIPHER_CTX_free(ctx); }
};

namespace {

void init_chacha(EVP_CIPHER_CTX*& ctx, std::string_view seed) {
  std::array<std::uint8_t, SHA256_DIGEST_LENGTH> key{};
  SHA256(reinterpret_cast<const unsigned char*>(seed.data()), seed.size(), key.data());
  std::array<std::uint8_t, 16> iv{};
  ctx = EVP_CIPHER_CTX_new();
  if (ctx == nullptr ||
      EVP_EncryptInit_ex(ctx, EVP_chacha20(), nullptr, key.data(), iv.data()) != 1) {
    throw Error("cannot initialise ChaCha20 stream");
  }
}

}  // namespace

SeededRandom::SeededRandom(std::uint64_t seed) : impl_(std::make_unique<Impl>()) {
  std::string s = "esas-seed:" + std::to_string(seed);
  init_chacha(impl_->ctx, s);
}

SeededRandom::SeededRandom(std::string_view seed) : impl_(std::make_unique<Impl>()) {
  std::string s = "esas-seed-str:";
  s.append(seed);
  init_chacha(impl_->ctx, s);
}

SeededRandom::~SeededRandom() = default;

void SeededRandom::fill(std::span<std::uint8_t> out) {
  if (out.empty()) return;
  std::memset(out.data(), 0, out.size());
  std::size_t done = 0;
  while (done < out.size()) {
    const int chunk = static_cast<int>(std::min<std::size_t>(out.size() - done, INT_MAX / 2));
    int produced = 0;
    if (EVP_EncryptUpdate(impl_->ctx, out.data() + done, &produced, out.data() + done, chunk) != 1) {
      throw Error("ChaCha20 keystream failure");
    }
    done += static_cast<std::size_t>(produced);
  }
}

}  // namespace esas
