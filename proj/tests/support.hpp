#pragma once

// Oracles and generators shared by the unit and acceptance tests. The
// oracles deliberately avoid the library's own helpers: threshold trees are
// evaluated by counting, dot products with a plain loop.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <unistd.h>

#include "esas/cpabe.hpp"
#include "esas/knnse.hpp"
#include "esas/random.hpp"

namespace esas::testkit {

inline bool oracle_satisfies(const cpabe::PolicyNode& n, const cpabe::AttributeSet& attrs) {
  if (n.is_leaf()) return attrs.count(n.attribute) > 0;
  std::uint32_t live = 0;
  for (const auto& c : n.children) live += oracle_satisfies(c, attrs) ? 1 : 0;
  return live >= n.threshold;
}

inline knnse::Rational oracle_dot(const knnse::Vector& x, const knnse::Vector& y) {
  mpq_class acc = 0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * y[i];
  return acc;
}

inline std::vector<std::string> attribute_universe(std::size_t n) {
  std::vector<std::string> u;
  for (std::size_t i = 0; i < n; ++i) u.push_back("attr" + std::to_string(i));
  return u;
}

inline cpabe::AttributeSet subset_from_mask(const std::vector<std::string>& universe, std::uint32_t mask) {
  cpabe::AttributeSet s;
  for (std::size_t i = 0; i < universe.size(); ++i) {
    if (mask & (1u << i)) s.insert(universe[i]);
  }
  return s;
}

// Splits `total` into `parts` positive summands.
inline std::vector<std::size_t> random_partition(RandomSource& rng, std::size_t total, std::size_t parts) {
  std::vector<std::size_t> out(parts, 1);
  for (std::size_t left = total - parts; left > 0; --left) {
    out[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(parts) - 1))] += 1;
  }
  return out;
}

// Tree with exactly `leaves` leaves and depth <= max_depth (a lone leaf has
// depth 1). Leaf attributes are drawn from `universe` with repetition.
inline cpabe::PolicyNode random_policy_node(RandomSource& rng, std::size_t leaves, std::size_t max_depth,
                                            const std::vector<std::string>& universe) {
  auto pick = [&] {
    return universe[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(universe.size()) - 1))];
  };
  if (leaves == 1 || max_depth == 1) return cpabe::PolicyNode::leaf(pick());
  std::size_t fanout = leaves;
  if (max_depth > 2) fanout = static_cast<std::size_t>(rng.uniform_int(2, static_cast<std::int64_t>(leaves)));
  std::vector<cpabe::PolicyNode> kids;
  for (auto part : random_partition(rng, leaves, fanout)) {
    kids.push_back(random_policy_node(rng, part, max_depth - 1, universe));
  }
  const auto k = static_cast<std::uint32_t>(rng.uniform_int(1, static_cast<std::int64_t>(kids.size())));
  return cpabe::PolicyNode::gate(k, std::move(kids));
}

inline cpabe::AccessTree random_tree(RandomSource& rng, std::size_t max_leaves, std::size_t max_depth,
                                     const std::vector<std::string>& universe) {
  const auto leaves = static_cast<std::size_t>(rng.uniform_int(1, static_cast<std::int64_t>(max_leaves)));
  return cpabe::AccessTree(random_policy_node(rng, leaves, max_depth, universe));
}

inline knnse::Vector random_vector(RandomSource& rng, std::size_t n, std::int64_t bound) {
  knnse::Vector v(n);
  for (auto& x : v) x = rng.uniform_int(-bound, bound);
  return v;
}

// Plaintext ranking: dot(v, q) descending, ties by ascending id, at most k.
inline std::vector<std::string> oracle_ranking(const std::map<std::string, knnse::Vector>& vectors,
                                               const knnse::Vector& q, const std::set<std::string>& allowed,
                                               std::size_t k) {
  std::vector<std::pair<mpq_class, std::string>> rows;
  for (const auto& id : allowed) rows.emplace_back(oracle_dot(vectors.at(id), q), id);
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < rows.size() && i < k; ++i) ids.push_back(rows[i].second);
  return ids;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("esas-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string str(const std::string& child = "") const { return child.empty() ? path_.string() : (path_ / child).string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace esas::testkit
