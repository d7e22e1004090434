#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "flowberg/io.hpp"
#include "flowberg/tree.hpp"

using namespace flowberg;

namespace {

TreeGenSpec homog(int q, int top, int bot) {
  TreeGenSpec s;
  s.kind = TreeGenSpec::Kind::homogeneous;
  s.q = q;
  s.l_top = top;
  s.l_bot = bot;
  return s;
}

}  // namespace

TEST_CASE("homogeneous vertex counts") {
  TruncatedTree t = build_tree(homog(2, 2, 0));
  CHECK(t.size() == 7);
  TruncatedTree t3 = build_tree(homog(3, 1, 0));
  CHECK(t3.size() == 4);
  CHECK(t3.children(t3.apex()).size() == 3);
}

TEST_CASE("random generation is deterministic") {
  TreeGenSpec s;
  s.kind = TreeGenSpec::Kind::random;
  s.min_deg = 2;
  s.max_deg = 3;
  s.seed = 7;
  s.l_top = 3;
  s.l_bot = 0;
  TruncatedTree a = build_tree(s);
  TruncatedTree b = build_tree(s);
  REQUIRE(a.size() == b.size());
  for (int i = 0; i < a.size(); ++i) {
    CHECK(a.level(i) == b.level(i));
    CHECK(a.parent(i) == b.parent(i));
    CHECK(a.children(i) == b.children(i));
  }
}

TEST_CASE("confluent basics") {
  TruncatedTree t = build_tree(homog(2, 2, 0));
  int apex = t.apex();
  int c0 = t.children(apex)[0], c1 = t.children(apex)[1];
  CHECK(t.confluent(c0, c0) == c0);
  CHECK(t.confluent(c0, c1) == apex);
  int u0 = t.children(c0)[0], u1 = t.children(c0)[1];
  CHECK(t.confluent(u0, u1) == c0);
  // confluent level dominates; equality iff one lies above the other
  for (int x = 0; x < t.size(); ++x)
    for (int y = 0; y < t.size(); ++y) {
      int w = t.confluent(x, y);
      CHECK(t.confluent(y, x) == w);
      CHECK(t.level(w) >= std::max(t.level(x), t.level(y)));
      bool nested = t.is_above(x, y) || t.is_above(y, x);
      CHECK((t.level(w) == std::max(t.level(x), t.level(y))) == nested);
    }
}

TEST_CASE("sectors and ancestors") {
  TruncatedTree t = build_tree(homog(2, 2, 0));
  CHECK(t.sector(t.apex()).size() == static_cast<size_t>(t.size()));
  int mid = t.children(t.apex())[0];
  CHECK(t.sector(mid).size() == 3);
  for (int leaf : t.leaves()) {
    CHECK(t.sector(leaf) == std::vector<int>{leaf});
    CHECK(t.ancestors(leaf).size() == static_cast<size_t>(t.depth() + 1));
  }
  CHECK(t.ancestors(t.apex()) == std::vector<int>{t.apex()});
  // ancestors(p(x)) is the tail of ancestors(x)
  auto ax = t.ancestors(mid);
  auto ap = t.ancestors(t.parent(mid));
  CHECK(std::vector<int>(ax.begin() + 1, ax.end()) == ap);
  // sector-size consistency
  for (int x = 0; x < t.size(); ++x) {
    size_t total = 1;
    for (int c : t.children(x)) total += t.sector(c).size();
    CHECK(t.sector(x).size() == total);
  }
  // level partition
  size_t n = 0;
  for (int lvl = t.l_bot(); lvl <= t.l_top(); ++lvl)
    n += t.level_members(lvl).size();
  CHECK(n == static_cast<size_t>(t.size()));
}

TEST_CASE("json round-trip") {
  TruncatedTree t = build_tree(homog(3, 1, -2));
  Json j = tree_to_json(t);
  TruncatedTree u = tree_from_json(j);
  CHECK(u.size() == t.size());
  CHECK(u.l_top() == t.l_top());
  CHECK(u.l_bot() == t.l_bot());
  CHECK(u.mode() == t.mode());
  for (int i = 0; i < t.size(); ++i) {
    CHECK(u.level(i) == t.level(i));
    CHECK(u.parent(i) == t.parent(i));
    CHECK(u.children(i) == t.children(i));
  }
}

TEST_CASE("invalid structures are rejected") {
  // two vertices on the top level: no unique apex
  std::vector<Vertex> vs(2);
  vs[0] = {0, 0, -1, {}};
  vs[1] = {1, 0, -1, {}};
  CHECK_THROWS_AS(TruncatedTree(std::move(vs), 0, 0, TreeMode::general),
                  config_error);
  // section3 requires at least two children everywhere
  std::vector<Vertex> chain(2);
  chain[0] = {0, 1, -1, {1}};
  chain[1] = {1, 0, 0, {}};
  CHECK_THROWS_AS(TruncatedTree(std::move(chain), 1, 0, TreeMode::section3),
                  config_error);
}
