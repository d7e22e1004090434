#include "flowberg/harmonic.hpp"

#include "flowberg/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace flowberg {

Rational laplacian(const TruncatedTree& t, const FlowMeasure& m,
                   const std::vector<Rational>& f, int x) {
  if (t.is_leaf(x))
    throw unsupported_error("laplacian undefined at a leaf without a sector model");
  Rational avg = 0;
  for (int c : t.children(x)) avg += f.at(c) * m.at(c);
  return f.at(x) - avg / m.at(x);
}

Rational laplacian(const TruncatedTree& t, const FlowMeasure& m,
                   const HarmonicFunction& f, int x) {
  if (t.is_leaf(x)) return 0;  // constant on the sector below
  return laplacian(t, m, f.values, x);
}

HarmonicFunction make_harmonic(const TruncatedTree& t, const FlowMeasure& m,
                               const AmbientChain& chain,
                               const std::vector<Rational>& leaf_values) {
  auto leaves = t.leaves();
  if (leaf_values.size() != leaves.size())
    throw config_error("one value per leaf required");
  HarmonicFunction f;
  f.values.assign(t.size(), Rational(0));
  for (size_t i = 0; i < leaves.size(); ++i) f.values[leaves[i]] = leaf_values[i];
  for (int lvl = t.l_bot() + 1; lvl <= t.l_top(); ++lvl) {
    for (int x : t.level_members(lvl)) {
      Rational acc = 0;
      for (int c : t.children(x)) acc += f.values[c] * m.at(c);
      f.values[x] = acc / m.at(x);
    }
  }
  const Rational& m0 = chain.m_at(0);
  const Rational& m1c = chain.m_at(1);
  if (m0 != m.at(t.apex()))
    throw config_error("ambient chain m0 must equal m(apex)");
  if (m1c == m0)
    throw config_error("upward extension infeasible: m1 == m0");
  f.c0 = -f.values[t.apex()] * m0 / (m1c - m0);
  return f;
}

HarmonicFunction random_harmonic(const TruncatedTree& t, const FlowMeasure& m,
                                 const AmbientChain& chain,
                                 std::uint64_t seed) {
  SplitMix64 rng(seed);
  std::vector<Rational> leaf_values;
  leaf_values.reserve(t.leaves().size());
  for (size_t i = 0; i < t.leaves().size(); ++i) {
    long num = static_cast<long>(rng.uniform(0, 64)) - 32;
    leaf_values.emplace_back(num, 16);
  }
  return make_harmonic(t, m, chain, leaf_values);
}

Rational gradient(const TruncatedTree& t, const HarmonicFunction& f, int x) {
  if (x == t.apex()) return f.at(x);  // f(p(apex)) = 0 by the extension
  return f.at(x) - f.at(t.parent(x));
}

std::pair<Rational, Rational> flow_invariance_check(const TruncatedTree& t,
                                                    const FlowMeasure& m,
                                                    const HarmonicFunction& f,
                                                    int x, int n) {
  if (n < 0 || t.level(x) - n < t.l_bot())
    throw std::out_of_range("s_n(x) leaves the window");
  std::vector<int> frontier{x};
  for (int i = 0; i < n; ++i) {
    std::vector<int> next;
    for (int v : frontier)
      for (int c : t.children(v)) next.push_back(c);
    frontier = std::move(next);
  }
  Rational lhs = 0;
  for (int v : frontier) lhs += f.at(v) * m.at(v);
  return {lhs, f.at(x) * m.at(x)};
}

std::vector<Rational> triviality_lowerbound(const TruncatedTree& t,
                                            const FlowMeasure& m,
                                            const HarmonicFunction& f, int x,
                                            long p,
                                            const LevelWeight& sigma_tilde,
                                            long n_max) {
  if (f.at(x) == 0) throw config_error("vacuous input: f(x) = 0");
  if (sigma_tilde.summable_below())
    throw config_error("sigma~ must have divergent lower sums");
  Rational factor = pow_int(abs(f.at(x)), p) * m.at(x);
  std::vector<Rational> out;
  out.reserve(n_max + 1);
  Rational acc = 0;
  for (long n = 0; n <= n_max; ++n) {
    acc += sigma_tilde.sigma(t.level(x) - n);
    out.push_back(factor * acc);
  }
  return out;
}

Rational inner_product(const TruncatedTree& t, const FlowMeasure& m,
                       const AmbientChain& chain, const LevelWeight& sigma,
                       const HarmonicFunction& f, const HarmonicFunction& g) {
  Rational acc = 0;
  for (int x = 0; x < t.size(); ++x) {
    // leaves absorb their whole sector: sigma(l) becomes S_{0,x}
    Rational w = t.is_leaf(x) ? sigma.sum_le(t.level(x))
                              : sigma.sigma(t.level(x));
    acc += f.at(x) * g.at(x) * m.at(x) * w;
  }
  acc += f.c0 * g.c0 * (chain.m_at(1) - chain.m_at(0)) *
         sigma.sum_le(t.l_top());
  return acc;
}

double lp_norm(const TruncatedTree& t, const FlowMeasure& m,
               const AmbientChain& chain, const LevelWeight& sigma,
               const HarmonicFunction& f, double p) {
  if (p < 1) throw config_error("p must be >= 1");
  double acc = 0;
  for (int x = 0; x < t.size(); ++x) {
    Rational w = t.is_leaf(x) ? sigma.sum_le(t.level(x))
                              : sigma.sigma(t.level(x));
    acc += std::pow(std::abs(to_double(f.at(x))), p) * to_double(m.at(x) * w);
  }
  acc += std::pow(std::abs(to_double(f.c0)), p) *
         to_double((chain.m_at(1) - chain.m_at(0)) * sigma.sum_le(t.l_top()));
  return std::pow(acc, 1.0 / p);
}

}  // namespace flowberg
