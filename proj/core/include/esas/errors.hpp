#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace esas {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller-supplied value violates a documented precondition
// (zero dimension, k = 0, empty attribute set, bad policy text...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Policy text that does not match the grammar. `position` is the 0-based
// byte offset where parsing failed.
class PolicySyntaxError : public InvalidArgument {
 public:
  PolicySyntaxError(const std::string& what, std::size_t position)
      : InvalidArgument(what + " at position " + std::to_string(position)),
        position_(position) {}

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

// A protocol step cannot proceed: unknown or duplicate identities, access
// tree not satisfied, vocabulary capacity exhausted, and similar.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

// Authenticated decryption or signature verification failed.
class AuthenticationError : public ProtocolError {
 public:
  using ProtocolError::ProtocolError;
};

// Malformed serialized data (bad envelope, truncated payload, point not on
// the curve, non-canonical encoding).
class FormatError : public Error {
 public:
  using Error::Error;
};

// Filesystem failures.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace esas
