#pragma once

// Access trees and the policy text grammar:
//
//   policy := attr | "and(" list ")" | "or(" list ")" | INT "-of(" list ")"
//   list   := policy ("," policy)*
//   attr   := [A-Za-z0-9_:-]+
//
// Whitespace is allowed between tokens. Attribute names are case-sensitive.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "esas/serialization.hpp"

namespace esas::cpabe {

struct PolicyNode {
  // Leaf when `children` is empty. Internal nodes require
  // 1 <= threshold <= children.size(); children are indexed 1..size().
  std::uint32_t threshold = 0;
  std::string attribute;
  std::vector<PolicyNode> children;

  bool is_leaf() const noexcept { return children.empty(); }

  static PolicyNode leaf(std::string attribute);
  static PolicyNode gate(std::uint32_t threshold, std::vector<PolicyNode> children);

  friend bool operator==(const PolicyNode&, const PolicyNode&) = default;
};

class AccessTree {
 public:
  // Throws InvalidArgument on bad thresholds or attribute names.
  explicit AccessTree(PolicyNode root);

  const PolicyNode& root() const noexcept { return root_; }

  // Leaf attributes in depth-first, left-to-right order. Leaf components of
  // a key ciphertext use the same numbering.
  const std::vector<std::string>& leaves() const noexcept { return leaves_; }
  std::size_t leaf_count() const noexcept { return leaves_.size(); }
  std::size_t depth() const;

  // Canonical policy text; parse_policy(to_string()) == *this.
  std::string to_string() const;

  void write(ByteWriter& w) const;
  static AccessTree read(ByteReader& r);

  friend bool operator==(const AccessTree& a, const AccessTree& b) { return a.root_ == b.root_; }

 private:
  PolicyNode root_;
  std::vector<std::string> leaves_;
};

bool is_valid_attribute(std::string_view name);

// Throws PolicySyntaxError (with byte position) or InvalidArgument for
// thresholds out of bounds.
AccessTree parse_policy(std::string_view text);

}  // namespace esas::cpabe
