#pragma once

#include "flowberg/measure.hpp"
#include "flowberg/tree.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace flowberg {

/// A genuine global harmonic function described by finitely many numbers:
/// values on the window, the constant continuation below each leaf
/// (f == f(w) on T_w), and the upward extension f(p^n(apex)) = 0 for
/// n >= 1 with the constant c0 on the aggregate of the apex's sibling
/// sectors under p(apex). Harmonicity at p(apex) forces
/// c0 = -f(apex) m0 / (m1 - m0).
struct HarmonicFunction {
  std::vector<Rational> values;  // indexed by vertex id
  Rational c0;

  const Rational& at(int id) const { return values.at(id); }
};

/// Delta f(x) = f(x) - sum_{y in s(x)} f(y) m(y)/m(x). Throws for leaves
/// when called on a bare vertex function (no sector model).
Rational laplacian(const TruncatedTree& t, const FlowMeasure& m,
                   const std::vector<Rational>& f, int x);

/// Same, but leaves evaluate to 0 by sector constancy.
Rational laplacian(const TruncatedTree& t, const FlowMeasure& m,
                   const HarmonicFunction& f, int x);

/// Unique harmonic extension of leaf data: bottom-up averaging on the
/// window, constants below leaves, vanishing chain above the apex.
/// leaf_values are keyed by the order of t.leaves().
HarmonicFunction make_harmonic(const TruncatedTree& t, const FlowMeasure& m,
                               const AmbientChain& chain,
                               const std::vector<Rational>& leaf_values);

/// Seeded random harmonic function (leaf data in [-2, 2] with denominator
/// 16, drawn from SplitMix64(seed)).
HarmonicFunction random_harmonic(const TruncatedTree& t, const FlowMeasure& m,
                                 const AmbientChain& chain,
                                 std::uint64_t seed);

Rational gradient(const TruncatedTree& t, const HarmonicFunction& f, int x);

/// (sum_{y in s_n(x)} f(y) m(y), f(x) m(x)); equal for harmonic f.
std::pair<Rational, Rational> flow_invariance_check(const TruncatedTree& t,
                                                    const FlowMeasure& m,
                                                    const HarmonicFunction& f,
                                                    int x, int n);

/// Partial lower bounds |f(x)|^p m(x) sum_{n=0}^{N} sigma~(l(x)-n) for
/// N = 0..n_max; diverges as N grows whenever sigma~ has divergent lower
/// sums, witnessing that f is not in L^p(m * sigma~) on T_x.
std::vector<Rational> triviality_lowerbound(const TruncatedTree& t,
                                            const FlowMeasure& m,
                                            const HarmonicFunction& f, int x,
                                            long p,
                                            const LevelWeight& sigma_tilde,
                                            long n_max);

/// Exact L^2(m*sigma) inner product over the whole infinite tree, all
/// tails in closed form.
Rational inner_product(const TruncatedTree& t, const FlowMeasure& m,
                       const AmbientChain& chain, const LevelWeight& sigma,
                       const HarmonicFunction& f, const HarmonicFunction& g);

/// L^p(m*sigma) norm over the whole infinite tree (double; exact-support
/// reductions are used internally).
double lp_norm(const TruncatedTree& t, const FlowMeasure& m,
               const AmbientChain& chain, const LevelWeight& sigma,
               const HarmonicFunction& f, double p);

}  // namespace flowberg
