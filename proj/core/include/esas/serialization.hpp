#pragma once

// Length-prefixed binary encoding and the versioned text envelope shared by
// every on-disk artifact.
//
// Envelope layout:
//
//   -----BEGIN ESAS <TAG> v<VERSION>-----
//   <base64 of payload, padded, 64 columns>
//   -----END ESAS <TAG>-----

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace esas {

using Bytes = std::vector<std::uint8_t>;

class ByteWriter {
 public:
  void u8(std::uint8_t v);
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  // Fixed-width bytes, no prefix.
  void raw(std::span<const std::uint8_t> b);
  // u32 length prefix followed by the bytes.
  void bytes(std::span<const std::uint8_t> b);
  void str(std::string_view s);

  const Bytes& data() const& { return buf_; }
  Bytes take() && { return std::move(buf_); }

 private:
  Bytes buf_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> data) : data_(data) {}

  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  std::span<const std::uint8_t> raw(std::size_t n);
  Bytes bytes();
  std::string str();

  // Length prefix used as an element count; rejects counts that cannot
  // possibly fit in the remaining input.
  std::uint32_t count(std::size_t min_element_size = 1);

  bool at_end() const noexcept { return pos_ == data_.size(); }
  void expect_end() const;

 private:
  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

std::string base64_encode(std::span<const std::uint8_t> data);
Bytes base64_decode(std::string_view text);

std::string wrap_envelope(std::string_view tag, std::uint32_t version,
                          std::span<const std::uint8_t> payload);

// Throws FormatError when the tag or version differ or the body is not
// canonical base64.
Bytes unwrap_envelope(std::string_view text, std::string_view tag, std::uint32_t version);

// Returns the tag of an envelope without decoding it.
std::string envelope_tag(std::string_view text);

std::string to_hex(std::span<const std::uint8_t> data);

}  // namespace esas
