#pragma once

#include "flowberg/kernel.hpp"
#include "flowberg/measure.hpp"

#include <map>
#include <optional>
#include <utility>
#include <vector>

namespace flowberg {

/// Weight bases of the Toeplitz-type operators U_{a,b,c} / V_{a,b,c}
/// acting on L^p(m * k_d^l).
struct ToeplitzParams {
  Rational k_a = 1, k_b = 1, k_c = 2, k_d = 1;
  Rational p = 2;

  /// Homogeneous-tree convention k_j = q^(j-1) for exponents (a,b,c,d).
  static ToeplitzParams from_exponents(long q, long a, long b, long c, long d,
                                       Rational p);

  /// 1/p' = 1 - 1/p as an exact rational.
  Rational one_over_p_conj() const { return (p - 1) / p; }

  void validate() const;  // k_a..k_d > 0, k_c > 1, p >= 1
};

/// One factor base^exp of a positive power product; exponents rational.
struct PowerFactor {
  Rational base;
  Rational exp;
};

/// Exact sign of log(prod base_i^exp_i): -1 (< 1), 0 (= 1), +1 (> 1).
/// Rational exponents are cleared by raising to the lcm of denominators.
int compare_product_to_one(const std::vector<PowerFactor>& factors);
double product_value(const std::vector<PowerFactor>& factors);

/// One (in)equality of a condition report: `mid` is the tested quantity,
/// `lhs`/`rhs` the bounds (lhs = NaN for one-sided checks). The boolean
/// is decided exactly; the doubles are for display only.
struct CondItem {
  bool holds = false;
  double lhs = 0, mid = 0, rhs = 0;
};

enum class Verdict { bounded_certified, unbounded_certified, indeterminate };

struct SchurInterval {
  bool nonempty = false;
  double lo = 0, hi = 0;  // meaningful when nonempty
};

struct ConditionReport {
  CondItem necessary_i, necessary_ii;
  CondItem sufficient_1, sufficient_2;  // p = 1: sufficient_2 is the
                                        // D_m < k_a k_d < k_c/C_m form
  std::optional<SchurInterval> schur;   // absent when p = 1
  Verdict verdict = Verdict::indeterminate;
};

/// Condition checkers for level-homogeneous flows whose mass grows by
/// `m_base` per level (canonical homogeneous tree: m_base = q). The
/// growth-comparison conditions i)/1) hold, with a uniform constant over
/// levels unbounded in both directions, exactly when
/// m_base = k_c/(k_a k_b).
CondItem necessary_i(const ToeplitzParams& prm, const Rational& m_base);
CondItem necessary_ii(const ToeplitzParams& prm, const Rational& c_m);
CondItem sufficient_2(const ToeplitzParams& prm, const Rational& c_m,
                      const Rational& d_m);

ConditionReport condition_report(const ToeplitzParams& prm,
                                 const Rational& c_m, const Rational& d_m,
                                 const Rational& m_base);

/// Open interval of admissible Schur weights k_gamma, or empty. Requires
/// p > 1 (unsupported_error otherwise). Emptiness is decided exactly.
SchurInterval schur_interval(const ToeplitzParams& prm, const Rational& c_m,
                             const Rational& d_m);

/// U f(x) = m(x) k_a^l(x) sum_y K_c(x,y) f(y) m(y) k_b^l(y); V with |K_c|.
/// The evaluator must carry sigma_c.
Rational apply_U(const KernelEvaluator& kc, const ToeplitzParams& prm,
                 const std::map<int, Rational>& f, int x);
Rational apply_V(const KernelEvaluator& kc, const ToeplitzParams& prm,
                 const std::map<int, Rational>& f, int x);

struct SchurVerifyReport {
  // Smallest constants against the level envelope
  // (k_a k_b k_gamma^s / k_c)^l m^{s+1} with s = p' (rows) or p (columns);
  // the envelope equals h^s exactly when the mass-growth condition holds
  // with equality, and is the level-uniform row/column bound in general.
  double row_max = 0;
  double col_max = 0;
  bool tails_converge = true;  // all four closed-form tail ratios < 1
};

/// Evaluates both Schur sums for h(x) = k_gamma^l(x) m(x) over the window
/// plus closed-form geometric tails (below the leaves and above the
/// apex). Requires a canonical homogeneous evaluator. k_gamma strictly
/// outside the admissible interval is a config_error; at an endpoint the
/// divergent tail is flagged instead of summed.
SchurVerifyReport schur_verify(const KernelEvaluator& kc,
                               const ToeplitzParams& prm, double k_gamma);

struct CorollaryVerdict {
  bool ratio_condition = false;  // k_c = q * k_a k_b, i.e. c = a + b
  bool inequality = false;       // -a < (d-1)/p < b-1
  bool bounded = false;          // ratio_condition && inequality
  bool stated_equality = false;  // the c + 1 = a + b reading
  bool discrepancy = false;      // the two readings disagree
};

/// Homogeneous-tree equivalence with exponent weights k_j = q^(j-1).
/// Requires c > 1.
CorollaryVerdict corollary_check(long q, long a, long b, long c, long d,
                                 const Rational& p);

enum class ProbeOp { U, V, P };
enum class ProbeClass { stable, growing, indeterminate };

struct ProbeDepthResult {
  int depth = 0;
  double direct_ratio = 0;  // ||Op delta_z||_p / ||delta_z||_p, bottom z
  double dual_ratio = 0;    // adjoint tested at exponent p'
};

struct ProbeReport {
  std::vector<ProbeDepthResult> per_depth;
  double slope = 0;          // least-squares fit of log max-ratio vs depth
  double max_min_ratio = 0;  // spread of the max-ratio across depths
  ProbeClass cls = ProbeClass::indeterminate;
};

/// Delta-test operator-norm lower bounds on homogeneous windows of the
/// given depths (level 0 down to -depth). Growth certifies
/// unboundedness; stability is evidence only. For ProbeOp::P the
/// projection itself is tested in L^p(m * sigma_c) and k_a, k_b, k_d are
/// ignored.
ProbeReport norm_probe(long q, const ToeplitzParams& prm, ProbeOp op,
                       const std::vector<int>& depths, double tau = 2.0,
                       double eps_factor = 0.05);

/// Extremes of |K(x,z)| sigma(l(x^z)) m(x^z) over the sampled pairs.
std::pair<Rational, Rational> sharp_estimate_extremes(
    const KernelEvaluator& kc,
    const std::vector<std::pair<int, int>>& pairs);

/// sup_lambda lambda * (m sigma){|P delta_z| > lambda} / ||delta_z||_1
/// over the window.
double weak11_probe(const KernelEvaluator& kc, int z);

}  // namespace flowberg
