#pragma once

#include "flowberg/harmonic.hpp"
#include "flowberg/measure.hpp"
#include "flowberg/tree.hpp"

#include <map>
#include <unordered_map>
#include <utility>
#include <vector>

namespace flowberg {

/// Psi(v, z, x) of the kernel construction, restricted to window vertices.
Rational psi(const TruncatedTree& t, const FlowMeasure& m, int v, int z,
             int x);

/// A point of the ambient tree: either a window vertex or the chain
/// vertex p^chain_index(apex) above it.
struct ChainVertex {
  int vertex = -1;       // window vertex id, or -1
  long chain_index = 0;  // >= 1 when vertex < 0

  static ChainVertex window(int id) { return {id, 0}; }
  static ChainVertex above_apex(long j) { return {-1, j}; }
};

struct CertifiedValue {
  double value = 0;
  double remainder = 0;  // certified bound on the truncation error
  long terms = 0;
};

/// Bergman kernel K of B^2(m*sigma), evaluated from the confluent closed
/// form: K depends only on x^y (the confluent) and on whether one
/// argument lies above the other. Exact rational values require an
/// exponential sigma; otherwise only certified float evaluation is
/// offered. Values are memoized by confluent class; warm the cache
/// single-threaded before sharing across readers.
class KernelEvaluator {
 public:
  KernelEvaluator(const TruncatedTree& t, FlowMeasure m, AmbientChain chain,
                  LevelWeight sigma);

  const TruncatedTree& tree() const { return *t_; }
  const FlowMeasure& flow() const { return m_; }
  const AmbientChain& chain() const { return chain_; }
  const LevelWeight& sigma() const { return sigma_; }

  long level_of(ChainVertex w) const;
  /// Measure of p^n(w), continuing into the ambient chain.
  Rational measure_at(ChainVertex w, long n) const;

  /// Exact K(x, y) for window vertices.
  Rational value(int x, int y) const;

  /// Exact kernel value for any pair whose confluent is w, with `above`
  /// telling whether one argument lies above the other.
  Rational value_conf(ChainVertex w, bool above) const;

  /// Termwise truncation of the defining series with a certified
  /// remainder bound <= 1/(S_{N,w} m_N); float mode entry point and the
  /// brute-force oracle behind the closed form.
  CertifiedValue value_certified(int x, int y, double tol,
                                 long max_terms = 1 << 20) const;

  /// Partial sum of the defining series (first n_terms terms), exact.
  Rational series_partial(int x, int y, long n_terms) const;

  /// Upper bound on the tail after n_terms: 1/(S_{n,x} m(p^n(x))).
  Rational series_tail_bound(int x, long n_terms) const;

 private:
  Rational k_above(ChainVertex w) const;
  long memo_key(ChainVertex w, bool above) const;

  const TruncatedTree* t_;
  FlowMeasure m_;
  AmbientChain chain_;
  LevelWeight sigma_;
  bool level_homogeneous_ = false;
  mutable std::unordered_map<long, Rational> memo_;
};

/// Pf(x) for finitely-supported f.
Rational project(const KernelEvaluator& k, const std::map<int, Rational>& f,
                 int x);

/// (<f, Psi(p(x), x, .)>, S_x(sigma) grad f(x)); equal for harmonic f.
std::pair<Rational, Rational> psi_pairing(const KernelEvaluator& k,
                                          const HarmonicFunction& f, int x);

/// <Psi(p^{k+1}(v), p^k(v), .), Psi(p^{j+1}(v), p^j(v), .)> in
/// L^2(m*sigma), via closed-form sector masses. Zero for j != k; the
/// squared norm for j == k.
Rational psi_orthogonality(const KernelEvaluator& k, int v, long j, long jk);

/// (<f, K(v, .)>, f(v)); equal in exact mode.
std::pair<Rational, Rational> reproduce(const KernelEvaluator& k,
                                        const HarmonicFunction& f, int v);

/// K(z, x) == K(z, y) for every window z outside T_u; x, y in T_u.
bool hormander_check(const KernelEvaluator& k, int u, int x, int y);

/// sum_{z in T_{p(u)} \ T_u} |K(x, z)| m(z) sigma(z), sibling sectors in
/// closed form; x in T_u. The boundedness proof caps this by 3.
Rational size_condition(const KernelEvaluator& k, int u, int x);

/// (<Pf, g>, <f, Pg>) over L^2(m*sigma); equal by symmetry of K.
std::pair<Rational, Rational> selfadjoint_check(
    const KernelEvaluator& k, const std::map<int, Rational>& f,
    const std::map<int, Rational>& g);

/// |K(x,z)| * sigma(l(x^z)) * m(x^z): the sharp-estimate ratio.
Rational sharp_estimate_ratio(const KernelEvaluator& k, int x, int z);

/// Bergman kernel of the rooted-tree variant: the window apex is read as
/// the root o, sigma_depth is a weight over the depth |x| with summable
/// upper tail, and
/// K_o(x,y) = 1/(m*sigma(T_o)) + finite Psi sum.
class RootedKernel {
 public:
  RootedKernel(const TruncatedTree& t, FlowMeasure m, LevelWeight sigma_depth);

  Rational normalizer() const { return k_o_; }  // 1 / (m*sigma)(T_o)
  Rational value(int x, int y) const;

 private:
  /// sum_{s >= j} sigma_depth(s).
  Rational tail_sum(long j) const;

  const TruncatedTree* t_;
  FlowMeasure m_;
  LevelWeight sigma_;
  Rational k_o_;
};

}  // namespace flowberg
