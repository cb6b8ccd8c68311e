#include "esas/serialization.hpp"

#include <openssl/evp.h>

#include <sstream>

#include "esas/errors.hpp"

namespace esas {

void ByteWriter::u8(std::uint8_t v) { buf_.push_back(v); }

void ByteWriter::u32(std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) buf_.push_back(static_cast<std::uint8_t>(v >> shift));
}

void ByteWriter::u64(std::uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8) buf_.push_back(static_cast<std::uint8_t>(v >> shift));
}

void ByteWriter::raw(std::span<const std::uint8_t> b) { buf_.insert(buf_.end(), b.begin(), b.end()); }

void ByteWriter::bytes(std::span<const std::uint8_t> b) {
  if (b.size() > UINT32_MAX) throw InvalidArgument("field too large to encode");
  u32(static_cast<std::uint32_t>(b.size()));
  raw(b);
}

void ByteWriter::str(std::string_view s) {
  bytes({reinterpret_cast<const std::uint8_t*>(s.data()), s.size()});
}

std::span<const std::uint8_t> ByteReader::raw(std::size_t n) {
  if (data_.size() - pos_ < n) throw FormatError("truncated payload");
  auto out = data_.subspan(pos_, n);
  pos_ += n;
  return out;
}

std::uint8_t ByteReader::u8() { return raw(1)[0]; }

std::uint32_t ByteReader::u32() {
  std::uint32_t v = 0;
  for (auto b : raw(4)) v = (v << 8) | b;
  return v;
}

std::uint64_t ByteReader::u64() {
  std::uint64_t v = 0;
  for (auto b : raw(8)) v = (v << 8) | b;
  return v;
}

Bytes ByteReader::bytes() {
  auto n = u32();
  auto s = raw(n);
  return {s.begin(), s.end()};
}

std::string ByteReader::str() {
  auto n = u32();
  auto s = raw(n);
  return {s.begin(), s.end()};
}

std::uint32_t ByteReader::count(std::size_t min_element_size) {
  auto n = u32();
  if (min_element_size > 0 && static_cast<std::size_t>(n) > (data_.size() - pos_) / min_element_size) {
    throw FormatError("element count exceeds payload size");
  }
  return n;
}

void ByteReader::expect_end() const {
  if (!at_end()) throw FormatError("trailing bytes after payload");
}

std::string base64_encode(std::span<const std::uint8_t> data) {
  std::string out(4 * ((data.size() + 2) / 3), '\0');
  if (data.empty()) return out;
  int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), data.data(),
                          static_cast<int>(data.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

Bytes base64_decode(std::string_view text) {
  if (text.size() % 4 != 0) throw FormatError("base64 length not a multiple of 4");
  if (text.empty()) return {};
  Bytes out(3 * text.size() / 4);
  int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(text.data()),
                          static_cast<int>(text.size()));
  if (n < 0) throw FormatError("invalid base64");
  std::size_t pad = 0;
  if (text.back() == '=') ++pad;
  if (text.size() >= 2 && text[text.size() - 2] == '=') ++pad;
  out.resize(static_cast<std::size_t>(n) - pad);
  if (base64_encode(out) != text) throw FormatError("non-canonical base64");
  return out;
}

namespace {

constexpr std::string_view kBegin = "-----BEGIN ESAS ";
constexpr std::string_view kEnd = "-----END ESAS ";
constexpr std::string_view kDashes = "-----";
constexpr std::size_t kColumns = 64;

std::string header_line(std::string_view tag, std::uint32_t version) {
  std::string s(kBegin);
  s.append(tag).append(" v").append(std::to_string(version)).append(kDashes);
  return s;
}

std::string footer_line(std::string_view tag) {
  std::string s(kEnd);
  s.append(tag).append(kDashes);
  return s;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    auto nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    auto line = text.substr(start, nl - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = nl + 1;
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

}  // namespace

std::string wrap_envelope(std::string_view tag, std::uint32_t version,
                          std::span<const std::uint8_t> payload) {
  const std::string body = base64_encode(payload);
  std::string out = header_line(tag, version);
  out.push_back('\n');
  for (std::size_t i = 0; i < body.size(); i += kColumns) {
    out.append(body, i, kColumns);
    out.push_back('\n');
  }
  out.append(footer_line(tag));
  out.push_back('\n');
  return out;
}

std::string envelope_tag(std::string_view text) {
  auto lines = split_lines(text);
  if (lines.empty() || !lines.front().starts_with(kBegin) || !lines.front().ends_with(kDashes)) {
    throw FormatError("missing envelope header");
  }
  auto inner = lines.front().substr(kBegin.size(), lines.front().size() - kBegin.size() - kDashes.size());
  auto sp = inner.rfind(" v");
  if (sp == std::string_view::npos) throw FormatError("missing envelope version");
  return std::string(inner.substr(0, sp));
}

Bytes unwrap_envelope(std::string_view text, std::string_view tag, std::uint32_t version) {
  auto lines = split_lines(text);
  if (lines.size() < 2) throw FormatError("truncated envelope");
  const auto found_tag = envelope_tag(text);
  if (found_tag != tag) {
    throw FormatError("envelope tag mismatch: expected " + std::string(tag) + ", found " + found_tag);
  }
  if (lines.front() != header_line(tag, version)) {
    throw FormatError("unsupported envelope version for " + std::string(tag));
  }
  if (lines.back() != footer_line(tag)) throw FormatError("missing envelope footer");
  std::string body;
  for (std::size_t i = 1; i + 1 < lines.size(); ++i) body.append(lines[i]);
  return base64_decode(body);
}

std::string to_hex(std::span<const std::uint8_t> data) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2);
  for (auto b : data) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xf]);
  }
  return out;
}

}  // namespace esas
