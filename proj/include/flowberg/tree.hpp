#pragma once

#include "flowberg/scalar.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace flowberg {

/// Tree mode. In section3 mode every internal vertex has at least two
/// successors, which is what the Toeplitz-operator estimates require.
enum class TreeMode { general, section3 };

struct Vertex {
  int id = -1;
  int level = 0;
  int parent = -1;  // -1 only for the apex
  std::vector<int> children;
};

/// Finite window [L_bot, L_top] onto an infinite tree with root at
/// infinity. The apex is the unique maximal-level vertex; every leaf sits
/// at L_bot. Everything below the leaves and above the apex is modeled
/// analytically (see AmbientChain), never enumerated.
///
/// Immutable after construction; safe to share across threads.
class TruncatedTree {
 public:
  TruncatedTree(std::vector<Vertex> vertices, int l_top, int l_bot,
                TreeMode mode);

  int size() const { return static_cast<int>(vertices_.size()); }
  const Vertex& vertex(int id) const { return vertices_.at(id); }
  const std::vector<Vertex>& vertices() const { return vertices_; }
  int apex() const { return apex_; }
  int l_top() const { return l_top_; }
  int l_bot() const { return l_bot_; }
  int depth() const { return l_top_ - l_bot_; }
  TreeMode mode() const { return mode_; }

  int level(int x) const { return vertices_[x].level; }
  int parent(int x) const { return vertices_[x].parent; }
  const std::vector<int>& children(int x) const {
    return vertices_[x].children;
  }
  bool is_leaf(int x) const { return vertices_[x].children.empty(); }
  bool is_internal(int x) const { return !vertices_[x].children.empty(); }

  /// p^n(x) within the window; n must not pass the apex.
  int nth_ancestor(int x, int n) const;

  /// x∧y: the minimum-level vertex above both.
  int confluent(int x, int y) const;

  /// True iff a = p^n(x) for some n >= 0 (includes a == x).
  bool is_above(int a, int x) const;

  /// [x, p(x), ..., apex].
  std::vector<int> ancestors(int x) const;

  /// All vertices at or below x, ascending id.
  std::vector<int> sector(int x) const;

  std::vector<int> leaves() const;
  const std::vector<int>& level_members(int lvl) const;

 private:
  std::vector<Vertex> vertices_;
  int apex_;
  int l_top_, l_bot_;
  TreeMode mode_;
  std::vector<std::vector<int>> by_level_;  // index: level - l_bot
};

struct TreeGenSpec {
  enum class Kind { homogeneous, radial, random };
  Kind kind = Kind::homogeneous;
  int q = 2;                       // homogeneous branching
  std::vector<int> radial_q;       // branching per level, top-down
  int min_deg = 2, max_deg = 3;    // random kind
  std::uint64_t seed = 0;
  int l_top = 0;
  int l_bot = -1;
  TreeMode mode = TreeMode::section3;
};

/// Deterministic construction; random kind draws child counts from a
/// SplitMix64 stream seeded by spec.seed, BFS order from the apex.
TruncatedTree build_tree(const TreeGenSpec& spec);

std::string tree_mode_name(TreeMode m);
TreeMode tree_mode_from_name(const std::string& s);

}  // namespace flowberg
