#pragma once

#include "flowberg/scalar.hpp"
#include "flowberg/tree.hpp"

#include <cstdint>
#include <limits>
#include <map>
#include <vector>

namespace flowberg {

/// Level weight sigma on the integers. Either a pure exponential k^n or a
/// tabulated window with explicit geometric tail rules (a geometric lower
/// tail is mandatory so the downward sums stay machine-checkable).
class LevelWeight {
 public:
  static LevelWeight exponential(Rational base);
  static LevelWeight tabulated(int first_level, std::vector<Rational> values,
                               Rational lower_ratio, Rational upper_ratio);

  bool is_exponential() const { return exponential_; }
  const Rational& base() const { return base_; }

  Rational sigma(long level) const;

  /// True iff sum_{n<=k} sigma(n) is finite for every k.
  bool summable_below() const;

  /// S restricted by level: sum_{n<=l} sigma(n). Throws assumption_error
  /// when the lower tail diverges.
  Rational sum_le(long l) const;

  /// sum over all of Z; requires carleson() == true.
  Rational sum_total() const;

  /// True iff sum_{n>=k} sigma(n) is finite (rooted-tree weights).
  bool summable_above() const;

  /// sum_{n>=l} sigma(n). Throws assumption_error when the upper tail
  /// diverges.
  Rational sum_ge(long l) const;

  /// sigma in l^1(Z), i.e. m*sigma is a Carleson measure.
  bool carleson() const;

  /// Ratio sigma(n+1)/sigma(n), valid for n >= geometric_above_level().
  Rational upper_growth_ratio() const {
    return exponential_ ? base_ : upper_ratio_;
  }
  /// Level from which sigma is exactly geometric upward.
  long geometric_above_level() const {
    return exponential_
               ? std::numeric_limits<long>::min()
               : first_level_ + static_cast<long>(values_.size()) - 1;
  }

  // tabulated-representation accessors (serialization)
  int table_first_level() const { return first_level_; }
  const std::vector<Rational>& table_values() const { return values_; }
  const Rational& lower_tail_ratio() const { return lower_ratio_; }

 private:
  LevelWeight() = default;
  bool exponential_ = true;
  Rational base_ = 2;
  // tabulated representation
  int first_level_ = 0;
  std::vector<Rational> values_;
  Rational lower_ratio_ = Rational(1, 2);  // sigma(n-1)/sigma(n) below table
  Rational upper_ratio_ = 2;               // sigma(n+1)/sigma(n) above table
};

/// S_{n,x}(sigma): cumulative weight of all levels <= level(x)+n.
Rational weight_sum(const TruncatedTree& t, int x, long n,
                    const LevelWeight& sigma);

/// Ancestor-chain model above the apex: m(p^n(apex)) for n >= 0, with
/// m(apex) duplicated as entry 0 so consistency is checkable.
class AmbientChain {
 public:
  static AmbientChain geometric(Rational m0, Rational ratio);
  static AmbientChain tabulated(std::vector<Rational> values,
                                Rational tail_ratio);

  Rational m_at(long n) const;
  const Rational& m0() const { return values_.front(); }
  const Rational& tail_ratio() const { return ratio_; }
  /// Index from which the chain is exactly geometric with tail_ratio().
  long geometric_from() const {
    return static_cast<long>(values_.size()) - 1;
  }
  bool is_geometric_kind() const { return values_.size() == 1; }

  void validate(TreeMode mode) const;

 private:
  std::vector<Rational> values_;  // m_0 .. m_J
  Rational ratio_ = 2;
};

struct FlowMeasure {
  std::vector<Rational> values;  // indexed by vertex id
  ScalarMode mode = ScalarMode::exact_rational;

  const Rational& at(int id) const { return values.at(id); }
};

/// Checks positivity and mass preservation at every internal vertex
/// (exact in rational mode, relative 1e-12 in float mode). Throws
/// config_error on violation.
void validate_flow(const TruncatedTree& t, const FlowMeasure& m);

/// Canonical flow on level-homogeneous trees: m(x) = prod of branchings,
/// normalized so level-0 vertices carry mass 1 (q^level on the
/// q-homogeneous tree). Throws unsupported_error when branching is not a
/// function of the level.
FlowMeasure canonical_flow(const TruncatedTree& t);

/// The matching geometric ambient chain (ratio = branching at the top).
AmbientChain canonical_chain(const TruncatedTree& t, const FlowMeasure& m);

/// Random flow: each internal vertex splits its mass among children with
/// every share in [lo, hi], drawn from SplitMix64(seed). Exact rationals.
FlowMeasure random_flow(const TruncatedTree& t, std::uint64_t seed,
                        const Rational& lo, const Rational& hi);

struct DoublingConstants {
  Rational c_m;  // sup m(p(x))/m(x)
  Rational d_m;  // sup m(x)/m(p(x))
};

/// Exact suprema over all window edges and the ambient chain.
DoublingConstants doubling_constants(const TruncatedTree& t,
                                     const FlowMeasure& m,
                                     const AmbientChain& chain);

/// m*sigma(T_x) (or of the strict sector when strict), infinite tails in
/// closed form.
Rational sector_mass(const TruncatedTree& t, const FlowMeasure& m,
                     const LevelWeight& sigma, int x, bool strict = false);

struct AssumptionIIResult {
  bool converges = false;
  Rational sum;  // exact value when converges
};

/// Evaluates sum_{n>=0} 1/(sigma(l_top+n) * m_n) along the apex chain.
/// Both sigma and the chain are eventually geometric by construction, so
/// the verdict and the value are exact.
AssumptionIIResult assumption_ii_check(const LevelWeight& sigma,
                                       const AmbientChain& chain,
                                       int apex_level);

struct SectorWeightRatio {
  double ratio = 0;
  bool truncated = false;   // no analytic lower tail was available
  bool divergent = false;   // k <= D_m^{p-1} style divergence flagged
};

/// sum_{x in T_y} k^{l(x)} m(x)^p / (k^{l(y)} m(y)^p). Window summed
/// vertex by vertex; the part below the window is added in closed form
/// when a constant below-window branching is supplied (equal splits),
/// otherwise the result is flagged truncated.
SectorWeightRatio sector_weight_ratio(const TruncatedTree& t,
                                      const FlowMeasure& m, int y,
                                      const Rational& k, double p,
                                      int below_branching = 0);

/// Exact p = 1 specialization; equals k/(k-1) for any flow when k > 1.
Rational sector_weight_ratio_exact_p1(const TruncatedTree& t,
                                      const FlowMeasure& m, int y,
                                      const Rational& k);

bool carleson_check(const LevelWeight& sigma);

/// L^p(m*sigma) norm of a finitely-supported function (exact support sum,
/// double result for real p).
double lp_norm_supported(const TruncatedTree& t, const FlowMeasure& m,
                         const LevelWeight& sigma,
                         const std::map<int, Rational>& f, double p);

}  // namespace flowberg
