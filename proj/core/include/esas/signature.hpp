#pragma once

// Ed25519 query authentication.

#include <array>
#include <cstdint>
#include <span>

#include "esas/random.hpp"
#include "esas/serialization.hpp"

namespace esas::signature {

inline constexpr std::size_t kKeySize = 32;
inline constexpr std::size_t kSignatureSize = 64;

using SigningKey = std::array<std::uint8_t, kKeySize>;
using VerifyKey = std::array<std::uint8_t, kKeySize>;

SigningKey generate(RandomSource& rng);
VerifyKey public_key(const SigningKey& sk);

Bytes sign(const SigningKey& sk, std::span<const std::uint8_t> message);
// False for any malformed key or signature.
bool verify(const VerifyKey& vk, std::span<const std::uint8_t> message, std::span<const std::uint8_t> sig);

}  // namespace esas::signature
