#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

namespace esas {

// Source of random bytes injected into every randomized operation.
class RandomSource {
 public:
  virtual ~RandomSource() = default;

  virtual void fill(std::span<std::uint8_t> out) = 0;

  std::vector<std::uint8_t> bytes(std::size_t n);
  std::uint64_t next_u64();

  // Uniform integer in [lo, hi] (inclusive) by rejection sampling.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  bool coin();
};

// Operating system entropy via OpenSSL's DRBG.
class SystemRandom final : public RandomSource {
 public:
  void fill(std::span<std::uint8_t> out) override;
};

// Deterministic ChaCha20 keystream keyed by SHA-256 of a seed. Used for
// reproducible transcripts and tests, never for production keys.
class SeededRandom final : public RandomSource {
 public:
  explicit SeededRandom(std::uint64_t seed);
  explicit SeededRandom(std::string_view seed);
  ~SeededRandom() override;

  SeededRandom(const SeededRandom&) = delete;
  SeededRandom& operator=(const SeededRandom&) = delete;

  void fill(std::span<std::uint8_t> out) override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace esas
