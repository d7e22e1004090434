#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "flowberg/kernel.hpp"

#include <cmath>

using namespace flowberg;

namespace {

TruncatedTree homog(int q, int top, int bot) {
  TreeGenSpec s;
  s.kind = TreeGenSpec::Kind::homogeneous;
  s.q = q;
  s.l_top = top;
  s.l_bot = bot;
  return build_tree(s);
}

struct Setup {
  TruncatedTree t;
  FlowMeasure m;
  AmbientChain chain;
  LevelWeight sigma;
  KernelEvaluator k;

  Setup(int q, int top, int bot, Rational base)
      : t(homog(q, top, bot)),
        m(canonical_flow(t)),
        chain(canonical_chain(t, m)),
        sigma(LevelWeight::exponential(std::move(base))),
        k(t, m, chain, sigma) {}
};

}  // namespace

TEST_CASE("psi branches") {
  TruncatedTree t = homog(2, 1, -1);
  FlowMeasure m = canonical_flow(t);
  int v = t.apex();  // m(v) = 2
  int z = t.children(v)[0];
  int x_in = t.children(z)[0];
  int sibling = t.children(v)[1];
  CHECK(psi(t, m, v, z, x_in) == Rational(1, 2));
  CHECK(psi(t, m, v, z, sibling) == Rational(-1, 2));
  CHECK(psi(t, m, v, z, v) == 0);  // x outside the strict sector
}

TEST_CASE("kernel closed-form values") {
  Setup s(2, 2, 0, 2);
  int x = s.t.level_members(0).front();
  CHECK(s.k.value(x, x) == Rational(1, 3));
  int p = s.t.parent(x);
  int y = s.t.children(p)[0] == x ? s.t.children(p)[1] : s.t.children(p)[0];
  CHECK(s.k.value(x, y) == Rational(-1, 6));
  CHECK(s.k.value(x, p) == Rational(1, 12));
}

TEST_CASE("symmetry and confluent determinism") {
  Setup s(2, 0, -3, 2);
  for (int x = 0; x < s.t.size(); ++x)
    for (int y = x; y < s.t.size(); ++y) {
      CHECK(s.k.value(x, y) == s.k.value(y, x));
      int w = s.t.confluent(x, y);
      bool above = (w == x) || (w == y);
      CHECK(s.k.value(x, y) == s.k.value_conf(ChainVertex::window(w), above));
    }
}

TEST_CASE("series truncation stays within the certified bound") {
  Setup s(2, 0, -3, 2);
  for (int x : {0, 3, 9}) {
    for (int y : {0, 1, 5}) {
      Rational closed = s.k.value(x, y);
      CertifiedValue cv = s.k.value_certified(x, y, 1e-12);
      CHECK(std::abs(to_double(closed) - cv.value) <= cv.remainder + 1e-15);
      // exact partial sums too
      Rational part = s.k.series_partial(x, y, 40);
      CHECK(abs(closed - part) <= s.k.series_tail_bound(x, 40));
    }
  }
}

TEST_CASE("kernel sections are harmonic") {
  Setup s(2, 0, -3, 2);
  for (int v = 0; v < s.t.size(); ++v) {
    std::vector<Rational> row(s.t.size());
    for (int y = 0; y < s.t.size(); ++y) row[y] = s.k.value(v, y);
    for (int x = 0; x < s.t.size(); ++x)
      if (s.t.is_internal(x)) CHECK(laplacian(s.t, s.m, row, x) == 0);
  }
}

TEST_CASE("pairing against the gradient functional") {
  Setup s(2, 0, -2, 2);
  HarmonicFunction f =
      make_harmonic(s.t, s.m, s.chain, {Rational(1), 0, 0, 0});
  int mid = s.t.level_members(-1).front();  // value 1/2, parent value 1/4
  auto [lhs, rhs] = psi_pairing(s.k, f, mid);
  CHECK(rhs == s.sigma.sum_le(-1) * Rational(1, 4));
  CHECK(lhs == rhs);
  // constants pair to zero away from the apex
  HarmonicFunction ones =
      make_harmonic(s.t, s.m, s.chain, std::vector<Rational>(4, Rational(1)));
  auto [l0, r0] = psi_pairing(s.k, ones, mid);
  CHECK(l0 == 0);
  CHECK(r0 == 0);
  // every window vertex, random data
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    HarmonicFunction g = random_harmonic(s.t, s.m, s.chain, seed);
    for (int x = 0; x < s.t.size(); ++x) {
      auto [a, b] = psi_pairing(s.k, g, x);
      CHECK(a == b);
    }
  }
}

TEST_CASE("psi chain orthogonality") {
  Setup s(2, 0, -2, 2);
  int v = s.t.level_members(s.t.l_bot()).front();
  for (long j = 0; j < 12; ++j) {
    for (long jk = 0; jk < j; ++jk)
      CHECK(psi_orthogonality(s.k, v, j, jk) == 0);
    CHECK(psi_orthogonality(s.k, v, j, j) > 0);
  }
}

TEST_CASE("reproducing identity") {
  Setup s(2, 0, -2, 2);
  HarmonicFunction ones =
      make_harmonic(s.t, s.m, s.chain, std::vector<Rational>(4, Rational(1)));
  for (int v = 0; v < s.t.size(); ++v) {
    auto [lhs, rhs] = reproduce(s.k, ones, v);
    CHECK(lhs == 1);
    CHECK(rhs == 1);
  }
  for (std::uint64_t seed : {10u, 11u, 12u}) {
    HarmonicFunction f = random_harmonic(s.t, s.m, s.chain, seed);
    for (int v = 0; v < s.t.size(); ++v) {
      auto [lhs, rhs] = reproduce(s.k, f, v);
      CHECK(lhs == rhs);
    }
  }
}

TEST_CASE("kernel is constant outside a sector") {
  Setup s(2, 0, -3, 2);
  for (int lvl = s.t.l_top() - 1; lvl >= s.t.l_bot(); --lvl)
    for (int u : s.t.level_members(lvl)) {
      auto sect = s.t.sector(u);
      CHECK(hormander_check(s.k, u, sect.front(), sect.back()));
    }
  CHECK_THROWS_AS(hormander_check(s.k, s.t.leaves().front(),
                                  s.t.apex(), s.t.apex()),
                  config_error);
}

TEST_CASE("size condition bounded by 3") {
  for (int q : {2, 3})
    for (int kc : {2, 3}) {
      Setup s(q, 0, -3, kc);
      for (int u = 0; u < s.t.size(); ++u) {
        auto sect = s.t.sector(u);
        for (int x : {sect.front(), sect.back()})
          CHECK(size_condition(s.k, u, x) <= 3);
      }
    }
}

TEST_CASE("projection basics and self-adjointness") {
  Setup s(2, 2, 0, 2);
  int x = s.t.level_members(0).front();
  std::map<int, Rational> dx{{x, 1}};
  CHECK(project(s.k, dx, x) == Rational(1, 3));
  CHECK(project(s.k, {}, x) == 0);
  int y = s.t.level_members(1).front();
  std::map<int, Rational> dy{{y, 1}};
  auto [lhs, rhs] = selfadjoint_check(s.k, dx, dy);
  CHECK(lhs == rhs);
  Rational expect = s.k.value(x, y) * s.m.at(x) * s.sigma.sigma(0) *
                    s.m.at(y) * s.sigma.sigma(1);
  CHECK(lhs == expect);
}

TEST_CASE("pointwise kernel estimate ratios") {
  Setup s(2, 2, 0, 2);
  int x = s.t.level_members(0).front();
  int p = s.t.parent(x);
  int y = s.t.children(p)[0] == x ? s.t.children(p)[1] : s.t.children(p)[0];
  CHECK(sharp_estimate_ratio(s.k, x, x) == Rational(1, 3));
  CHECK(sharp_estimate_ratio(s.k, x, y) == Rational(2, 3));
}

TEST_CASE("rooted-tree kernel") {
  TruncatedTree t = homog(2, 0, -3);
  FlowMeasure m = canonical_flow(t);
  LevelWeight depth_weight = LevelWeight::exponential(Rational(1, 4));
  RootedKernel rk(t, m, depth_weight);
  CHECK(rk.normalizer() == Rational(3, 4));
  for (int y = 0; y < t.size(); ++y) CHECK(rk.value(t.apex(), y) == Rational(3, 4));
  for (int x = 0; x < t.size(); ++x)
    for (int y = x; y < t.size(); ++y) CHECK(rk.value(x, y) == rk.value(y, x));
  CHECK_THROWS_AS(RootedKernel(t, m, LevelWeight::exponential(2)),
                  assumption_error);
}
