#include "flowberg/tree.hpp"

#include "flowberg/rng.hpp"

#include <algorithm>
#include <deque>

namespace flowberg {

TruncatedTree::TruncatedTree(std::vector<Vertex> vertices, int l_top,
                             int l_bot, TreeMode mode)
    : vertices_(std::move(vertices)),
      apex_(-1),
      l_top_(l_top),
      l_bot_(l_bot),
      mode_(mode) {
  if (l_top_ <= l_bot_ && !(l_top_ == l_bot_ && vertices_.size() == 1))
    throw config_error("level window must satisfy L_top >= L_bot");
  by_level_.assign(l_top_ - l_bot_ + 1, {});
  int edges = 0;
  for (int i = 0; i < size(); ++i) {
    const Vertex& v = vertices_[i];
    if (v.id != i) throw config_error("vertex ids must be dense 0..N-1");
    if (v.level < l_bot_ || v.level > l_top_)
      throw config_error("vertex level outside window");
    by_level_[v.level - l_bot_].push_back(i);
    if (v.parent < 0) {
      if (apex_ >= 0) throw config_error("more than one parentless vertex");
      apex_ = i;
      if (v.level != l_top_) throw config_error("apex must sit at L_top");
    } else {
      ++edges;
      if (vertices_[v.parent].level != v.level + 1)
        throw config_error("parent level must be child level + 1");
    }
    if (v.level > l_bot_ && v.children.empty())
      throw config_error("non-bottom vertex without children");
    if (v.level == l_bot_ && !v.children.empty())
      throw config_error("bottom-level vertex with children");
    if (mode_ == TreeMode::section3 && !v.children.empty() &&
        v.children.size() < 2)
      throw config_error("section3 mode requires >= 2 successors");
  }
  if (apex_ < 0) throw config_error("no apex");
  if (edges != size() - 1) throw config_error("not a tree");
  for (auto& lvl : by_level_) {
    if (lvl.empty()) throw config_error("unpopulated level in window");
    std::sort(lvl.begin(), lvl.end());
  }
}

int TruncatedTree::nth_ancestor(int x, int n) const {
  for (int i = 0; i < n; ++i) {
    x = parent(x);
    if (x < 0) throw std::out_of_range("nth_ancestor past the apex");
  }
  return x;
}

int TruncatedTree::confluent(int x, int y) const {
  while (x != y) {
    if (level(x) < level(y))
      x = parent(x);
    else
      y = parent(y);
  }
  return x;
}

bool TruncatedTree::is_above(int a, int x) const {
  while (level(x) < level(a)) x = parent(x);
  return x == a;
}

std::vector<int> TruncatedTree::ancestors(int x) const {
  std::vector<int> out;
  for (int v = x; v >= 0; v = parent(v)) out.push_back(v);
  return out;
}

std::vector<int> TruncatedTree::sector(int x) const {
  std::vector<int> out;
  std::deque<int> queue{x};
  while (!queue.empty()) {
    int v = queue.front();
    queue.pop_front();
    out.push_back(v);
    for (int c : children(v)) queue.push_back(c);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<int> TruncatedTree::leaves() const {
  return by_level_.front();  // all leaves sit at L_bot
}

const std::vector<int>& TruncatedTree::level_members(int lvl) const {
  if (lvl < l_bot_ || lvl > l_top_)
    throw std::out_of_range("level outside window");
  return by_level_[lvl - l_bot_];
}

namespace {

int branching_for(const TreeGenSpec& spec, int lvl, SplitMix64& rng) {
  switch (spec.kind) {
    case TreeGenSpec::Kind::homogeneous:
      return spec.q;
    case TreeGenSpec::Kind::radial: {
      // radial_q is listed top-down: entry 0 is the branching at L_top.
      int idx = spec.l_top - lvl;
      if (idx < 0 || idx >= static_cast<int>(spec.radial_q.size()))
        throw config_error("radial branching list does not cover the window");
      return spec.radial_q[idx];
    }
    case TreeGenSpec::Kind::random:
      return static_cast<int>(rng.uniform(spec.min_deg, spec.max_deg));
  }
  throw config_error("unknown tree kind");
}

}  // namespace

TruncatedTree build_tree(const TreeGenSpec& spec) {
  if (spec.l_top < spec.l_bot)
    throw config_error("L_top must be >= L_bot");
  int min_branch = 0;
  switch (spec.kind) {
    case TreeGenSpec::Kind::homogeneous:
      min_branch = spec.q;
      break;
    case TreeGenSpec::Kind::radial:
      for (int b : spec.radial_q) min_branch = std::min(min_branch == 0 ? b : min_branch, b);
      break;
    case TreeGenSpec::Kind::random:
      if (spec.min_deg > spec.max_deg || spec.min_deg < 1)
        throw config_error("random kind requires 1 <= min_deg <= max_deg");
      min_branch = spec.min_deg;
      break;
  }
  if (spec.mode == TreeMode::section3 && min_branch < 2 &&
      spec.l_top > spec.l_bot)
    throw config_error("section3 mode requires branching >= 2");

  SplitMix64 rng(spec.seed);
  std::vector<Vertex> verts;
  verts.push_back({0, spec.l_top, -1, {}});
  // level-synchronous BFS so ids are dense and level-ordered
  std::vector<int> frontier{0};
  for (int lvl = spec.l_top; lvl > spec.l_bot; --lvl) {
    std::vector<int> next;
    for (int pid : frontier) {
      int b = branching_for(spec, lvl, rng);
      for (int c = 0; c < b; ++c) {
        int id = static_cast<int>(verts.size());
        verts.push_back({id, lvl - 1, pid, {}});
        verts[pid].children.push_back(id);
        next.push_back(id);
      }
    }
    frontier = std::move(next);
  }
  return TruncatedTree(std::move(verts), spec.l_top, spec.l_bot, spec.mode);
}

std::string tree_mode_name(TreeMode m) {
  return m == TreeMode::general ? "general" : "section3";
}

TreeMode tree_mode_from_name(const std::string& s) {
  if (s == "general") return TreeMode::general;
  if (s == "section3") return TreeMode::section3;
  throw config_error("unknown tree mode: " + s);
}

}  // namespace flowberg
