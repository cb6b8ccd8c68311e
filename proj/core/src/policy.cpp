#include "esas/policy.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

#include "esas/errors.hpp"

namespace esas::cpabe {

namespace {

constexpr std::uint32_t kMaxDepth = 64;

bool is_attr_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_' || c == ':' || c == '-';
}

void validate(const PolicyNode& n, std::uint32_t depth) {
  if (depth > kMaxDepth) throw InvalidArgument("policy nested too deeply");
  if (n.is_leaf()) {
    if (!is_valid_attribute(n.attribute)) {
      throw InvalidArgument("invalid attribute name '" + n.attribute + "'");
    }
    return;
  }
  if (n.threshold < 1 || n.threshold > n.children.size()) {
    throw InvalidArgument("threshold " + std::to_string(n.threshold) + " out of bounds for " +
                          std::to_string(n.children.size()) + " children");
  }
  for (const auto& c : n.children) validate(c, depth + 1);
}

void collect_leaves(const PolicyNode& n, std::vector<std::string>& out) {
  if (n.is_leaf()) {
    out.push_back(n.attribute);
    return;
  }
  for (const auto& c : n.children) collect_leaves(c, out);
}

std::size_t node_depth(const PolicyNode& n) {
  std::size_t d = 0;
  for (const auto& c : n.children) d = std::max(d, node_depth(c));
  return d + 1;
}

void render(const PolicyNode& n, std::string& out) {
  if (n.is_leaf()) {
    out += n.attribute;
    return;
  }
  if (n.threshold == n.children.size()) {
    out += "and(";
  } else if (n.threshold == 1) {
    out += "or(";
  } else {
    out += std::to_string(n.threshold) + "-of(";
  }
  for (std::size_t i = 0; i < n.children.size(); ++i) {
    if (i > 0) out += ", ";
    render(n.children[i], out);
  }
  out += ')';
}

void write_node(const PolicyNode& n, ByteWriter& w) {
  if (n.is_leaf()) {
    w.u8(0);
    w.str(n.attribute);
    return;
  }
  w.u8(1);
  w.u32(n.threshold);
  w.u32(static_cast<std::uint32_t>(n.children.size()));
  for (const auto& c : n.children) write_node(c, w);
}

PolicyNode read_node(ByteReader& r, std::uint32_t depth) {
  if (depth > kMaxDepth) throw FormatError("access tree nested too deeply");
  const auto kind = r.u8();
  if (kind == 0) return PolicyNode::leaf(r.str());
  if (kind != 1) throw FormatError("bad access tree node kind");
  PolicyNode n;
  n.threshold = r.u32();
  const auto count = r.count(5);
  n.children.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) n.children.push_back(read_node(r, depth + 1));
  return n;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  PolicyNode parse() {
    auto node = policy(0);
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return node;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const { throw PolicySyntaxError(what, pos_); }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])) != 0) ++pos_;
  }

  PolicyNode policy(std::uint32_t depth) {
    if (depth > kMaxDepth) fail("policy nested too deeply");
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < text_.size() && is_attr_char(text_[pos_])) ++pos_;
    if (pos_ == start) fail("expected attribute or gate");
    const std::string_view word = text_.substr(start, pos_ - start);
    skip_ws();
    if (pos_ >= text_.size() || text_[pos_] != '(') return PolicyNode::leaf(std::string(word));

    const std::size_t gate_pos = start;
    ++pos_;  // '('
    std::vector<PolicyNode> children;
    children.push_back(policy(depth + 1));
    skip_ws();
    while (pos_ < text_.size() && text_[pos_] == ',') {
      ++pos_;
      children.push_back(policy(depth + 1));
      skip_ws();
    }
    if (pos_ >= text_.size() || text_[pos_] != ')') fail("expected ',' or ')'");
    ++pos_;

    std::uint32_t threshold = 0;
    if (word == "and") {
      threshold = static_cast<std::uint32_t>(children.size());
    } else if (word == "or") {
      threshold = 1;
    } else if (word.ends_with("-of") && word.size() > 3) {
      const auto digits = word.substr(0, word.size() - 3);
      auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), threshold);
      if (ec != std::errc() || ptr != digits.data() + digits.size()) {
        throw PolicySyntaxError("bad threshold '" + std::string(digits) + "'", gate_pos);
      }
    } else {
      throw PolicySyntaxError("unknown gate '" + std::string(word) + "'", gate_pos);
    }
    if (threshold < 1 || threshold > children.size()) {
      throw InvalidArgument("threshold " + std::to_string(threshold) + " exceeds " +
                            std::to_string(children.size()) + " children at position " +
                            std::to_string(gate_pos));
    }
    return PolicyNode::gate(threshold, std::move(children));
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

PolicyNode PolicyNode::leaf(std::string attribute) {
  PolicyNode n;
  n.attribute = std::move(attribute);
  return n;
}

PolicyNode PolicyNode::gate(std::uint32_t threshold, std::vector<PolicyNode> children) {
  PolicyNode n;
  n.threshold = threshold;
  n.children = std::move(children);
  return n;
}

bool is_valid_attribute(std::string_view name) {
  return !name.empty() && std::all_of(name.begin(), name.end(), is_attr_char);
}

AccessTree::AccessTree(PolicyNode root) : root_(std::move(root)) {
  validate(root_, 0);
  collect_leaves(root_, leaves_);
}

std::size_t AccessTree::depth() const { return node_depth(root_); }

std::string AccessTree::to_string() const {
  std::string out;
  render(root_, out);
  return out;
}

void AccessTree::write(ByteWriter& w) const { write_node(root_, w); }

AccessTree AccessTree::read(ByteReader& r) {
  try {
    return AccessTree(read_node(r, 0));
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string("invalid access tree: ") + e.what());
  }
}

AccessTree parse_policy(std::string_view text) { return AccessTree(Parser(text).parse()); }

}  // namespace esas::cpabe
