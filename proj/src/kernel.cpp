#include "flowberg/kernel.hpp"

#include <algorithm>
#include <cmath>

namespace flowberg {

Rational psi(const TruncatedTree& t, const FlowMeasure& m, int v, int z,
             int x) {
  auto strictly_below = [&](int a) { return a != v && t.is_above(v, a); };
  if (!strictly_below(x) || !strictly_below(z)) return 0;
  // child of v on the way to each argument
  auto child_toward = [&](int a) {
    while (t.parent(a) != v) a = t.parent(a);
    return a;
  };
  int cx = child_toward(x), cz = child_toward(z);
  if (cx == cz) return Rational(1) / m.at(cx) - Rational(1) / m.at(v);
  return -Rational(1) / m.at(v);
}

KernelEvaluator::KernelEvaluator(const TruncatedTree& t, FlowMeasure m,
                                 AmbientChain chain, LevelWeight sigma)
    : t_(&t),
      m_(std::move(m)),
      chain_(std::move(chain)),
      sigma_(std::move(sigma)) {
  if (static_cast<int>(m_.values.size()) != t.size())
    throw config_error("flow measure size mismatch");
  if (chain_.m0() != m_.at(t.apex()))
    throw config_error("ambient chain m0 must equal m(apex)");
  level_homogeneous_ = true;
  for (int lvl = t.l_bot(); lvl <= t.l_top() && level_homogeneous_; ++lvl) {
    const auto& members = t.level_members(lvl);
    for (int x : members)
      if (m_.at(x) != m_.at(members.front())) {
        level_homogeneous_ = false;
        break;
      }
  }
}

long KernelEvaluator::level_of(ChainVertex w) const {
  if (w.vertex >= 0) return t_->level(w.vertex);
  return t_->l_top() + w.chain_index;
}

Rational KernelEvaluator::measure_at(ChainVertex w, long n) const {
  if (w.vertex >= 0) {
    long steps = t_->l_top() - t_->level(w.vertex);
    if (n <= steps) return m_.at(t_->nth_ancestor(w.vertex, n));
    return chain_.m_at(n - steps);
  }
  return chain_.m_at(w.chain_index + n);
}

Rational KernelEvaluator::k_above(ChainVertex w) const {
  if (!sigma_.is_exponential())
    throw cannot_certify_error(
        "exact kernel values need an exponential sigma; use value_certified");
  const Rational& k = sigma_.base();
  long L = level_of(w);
  long n_geo = w.vertex >= 0
                   ? (t_->l_top() - t_->level(w.vertex)) + chain_.geometric_from()
                   : std::max(0L, chain_.geometric_from() - w.chain_index);
  Rational acc = 0;
  for (long n = 0; n < n_geo; ++n) {
    acc += (Rational(1) / measure_at(w, n) - Rational(1) / measure_at(w, n + 1)) /
           sigma_.sum_le(L + n);
  }
  const Rational& r = chain_.tail_ratio();
  if (r != 1) {
    Rational big_m = measure_at(w, n_geo);
    acc += (k - 1) * (1 - Rational(1) / r) /
           (pow_int(k, L + n_geo + 1) * big_m) * (k * r) / (k * r - 1);
  }
  return acc;
}

long KernelEvaluator::memo_key(ChainVertex w, bool above) const {
  long idx;
  if (level_homogeneous_) {
    idx = level_of(w) - t_->l_bot();
  } else {
    idx = w.vertex >= 0 ? w.vertex : t_->size() - 1 + w.chain_index;
  }
  return (idx << 1) | (above ? 1 : 0);
}

Rational KernelEvaluator::value_conf(ChainVertex w, bool above) const {
  long key = memo_key(w, above);
  auto it = memo_.find(key);
  if (it != memo_.end()) return it->second;
  Rational v = k_above(w);
  if (!above)
    v -= Rational(1) / (sigma_.sum_le(level_of(w) - 1) * measure_at(w, 0));
  memo_.emplace(key, v);
  return v;
}

Rational KernelEvaluator::value(int x, int y) const {
  int w = t_->confluent(x, y);
  bool above = (w == x) || (w == y);
  return value_conf(ChainVertex::window(w), above);
}

namespace {

/// Psi(p^{n+1}(x), p^n(x), y) continued through the ambient chain: chain
/// vertices lie above every window vertex, and the child of a chain
/// vertex toward any window vertex is the next chain step (or the apex).
Rational psi_along_chain(const KernelEvaluator& k, int x, int y, long n) {
  const TruncatedTree& t = k.tree();
  long steps = t.l_top() - t.level(x);
  // is y strictly below p^{n+1}(x)?
  bool below;
  if (n + 1 <= steps) {
    int v = t.nth_ancestor(x, n + 1);
    below = (y != v) && t.is_above(v, y);
  } else {
    below = true;
  }
  if (!below) return 0;
  // does y share with p^n(x) the same child-sector of p^{n+1}(x)?
  bool same;
  if (n <= steps) {
    int z = t.nth_ancestor(x, n);
    same = t.is_above(z, y);
  } else {
    same = true;  // both under the chain
  }
  auto wx = ChainVertex::window(x);
  if (same)
    return Rational(1) / k.measure_at(wx, n) -
           Rational(1) / k.measure_at(wx, n + 1);
  return -Rational(1) / k.measure_at(wx, n + 1);
}

}  // namespace

Rational KernelEvaluator::series_partial(int x, int y, long n_terms) const {
  Rational acc = 0;
  long lx = t_->level(x);
  for (long n = 0; n < n_terms; ++n) {
    Rational p = psi_along_chain(*this, x, y, n);
    if (p != 0) acc += p / sigma_.sum_le(lx + n);
  }
  return acc;
}

Rational KernelEvaluator::series_tail_bound(int x, long n_terms) const {
  return Rational(1) /
         (sigma_.sum_le(t_->level(x) + n_terms) *
          measure_at(ChainVertex::window(x), n_terms));
}

CertifiedValue KernelEvaluator::value_certified(int x, int y, double tol,
                                                long max_terms) const {
  long lx = t_->level(x);
  long lw = t_->level(t_->confluent(x, y));
  double acc = 0;
  for (long n = 0; n < max_terms; ++n) {
    // once past the confluent the remaining terms telescope
    if (n >= lw - lx + 1) {
      double bound = to_double(series_tail_bound(x, n));
      if (bound <= tol) return {acc, bound, n};
    }
    Rational p = psi_along_chain(*this, x, y, n);
    if (p != 0) acc += to_double(p / sigma_.sum_le(lx + n));
  }
  throw cannot_certify_error("kernel series did not certify within max_terms");
}

Rational project(const KernelEvaluator& k, const std::map<int, Rational>& f,
                 int x) {
  const TruncatedTree& t = k.tree();
  Rational acc = 0;
  for (const auto& [y, v] : f) {
    if (v == 0) continue;
    acc += k.value(x, y) * v * k.flow().at(y) * k.sigma().sigma(t.level(y));
  }
  return acc;
}

namespace {

/// integral of a harmonic f over T_u (window part vertex by vertex,
/// leaf sectors folded in closed form).
Rational sector_integral(const KernelEvaluator& k, const HarmonicFunction& f,
                         int u) {
  const TruncatedTree& t = k.tree();
  Rational acc = 0;
  for (int z : t.sector(u)) {
    Rational w = t.is_leaf(z) ? k.sigma().sum_le(t.level(z))
                              : k.sigma().sigma(t.level(z));
    acc += f.at(z) * k.flow().at(z) * w;
  }
  return acc;
}

}  // namespace

std::pair<Rational, Rational> psi_pairing(const KernelEvaluator& k,
                                          const HarmonicFunction& f, int x) {
  const TruncatedTree& t = k.tree();
  Rational s_x = k.sigma().sum_le(t.level(x));
  Rational rhs = s_x * gradient(t, f, x);
  Rational lhs = 0;
  if (x == t.apex()) {
    Rational m0 = k.chain().m_at(0), m1 = k.chain().m_at(1);
    lhs = (Rational(1) / m0 - Rational(1) / m1) * sector_integral(k, f, x) -
          f.c0 * (m1 - m0) * k.sigma().sum_le(t.l_top()) / m1;
  } else {
    int p = t.parent(x);
    lhs = (Rational(1) / k.flow().at(x) - Rational(1) / k.flow().at(p)) *
          sector_integral(k, f, x);
    for (int sib : t.children(p))
      if (sib != x)
        lhs -= sector_integral(k, f, sib) / k.flow().at(p);
  }
  return {lhs, rhs};
}

Rational psi_orthogonality(const KernelEvaluator& k, int v, long j, long jk) {
  if (j < jk) std::swap(j, jk);
  auto wv = ChainVertex::window(v);
  Rational m_lo = k.measure_at(wv, jk), m_hi = k.measure_at(wv, jk + 1);
  Rational s_lo = k.sigma().sum_le(k.level_of(wv) + jk);
  if (j == jk) {
    Rational diff = Rational(1) / m_lo - Rational(1) / m_hi;
    return s_lo * (diff * diff * m_lo + (m_hi - m_lo) / (m_hi * m_hi));
  }
  Rational m_j = k.measure_at(wv, j), m_j1 = k.measure_at(wv, j + 1);
  Rational big_m = Rational(1) / m_j - Rational(1) / m_j1;
  // masses: m*sigma(T_{p^k(v)}) and of the sibling part of the strict sector
  Rational inner_mass = m_lo * s_lo;
  Rational sibling_mass = (m_hi - m_lo) * s_lo;
  return big_m * ((Rational(1) / m_lo - Rational(1) / m_hi) * inner_mass -
                  sibling_mass / m_hi);
}

std::pair<Rational, Rational> reproduce(const KernelEvaluator& k,
                                        const HarmonicFunction& f, int v) {
  const TruncatedTree& t = k.tree();
  Rational lhs = 0;
  for (int z = 0; z < t.size(); ++z) {
    if (f.at(z) == 0) continue;
    Rational w = t.is_leaf(z) ? k.sigma().sum_le(t.level(z))
                              : k.sigma().sigma(t.level(z));
    lhs += k.value(v, z) * f.at(z) * k.flow().at(z) * w;
  }
  if (f.c0 != 0) {
    Rational m0 = k.chain().m_at(0), m1 = k.chain().m_at(1);
    lhs += f.c0 * k.value_conf(ChainVertex::above_apex(1), false) *
           (m1 - m0) * k.sigma().sum_le(t.l_top());
  }
  return {lhs, f.at(v)};
}

bool hormander_check(const KernelEvaluator& k, int u, int x, int y) {
  const TruncatedTree& t = k.tree();
  if (!t.is_above(u, x) || !t.is_above(u, y))
    throw config_error("hormander_check requires x, y in T_u");
  for (int z = 0; z < t.size(); ++z) {
    if (t.is_above(u, z)) continue;
    if (k.value(z, x) != k.value(z, y)) return false;
  }
  return true;
}

Rational size_condition(const KernelEvaluator& k, int u, int x) {
  const TruncatedTree& t = k.tree();
  if (!t.is_above(u, x))
    throw config_error("size_condition requires x in T_u");
  if (u == t.apex()) {
    Rational m0 = k.chain().m_at(0), m1 = k.chain().m_at(1);
    Rational total = abs(k.value_conf(ChainVertex::above_apex(1), true)) * m1 *
                     k.sigma().sigma(t.l_top() + 1);
    total += abs(k.value_conf(ChainVertex::above_apex(1), false)) * (m1 - m0) *
             k.sigma().sum_le(t.l_top());
    return total;
  }
  int p = t.parent(u);
  Rational total = abs(k.value(x, p)) * k.flow().at(p) *
                   k.sigma().sigma(t.level(p));
  Rational sib_kernel = abs(k.value_conf(ChainVertex::window(p), false));
  for (int sib : t.children(p))
    if (sib != u)
      total += sib_kernel * k.flow().at(sib) * k.sigma().sum_le(t.level(sib));
  return total;
}

std::pair<Rational, Rational> selfadjoint_check(
    const KernelEvaluator& k, const std::map<int, Rational>& f,
    const std::map<int, Rational>& g) {
  const TruncatedTree& t = k.tree();
  auto weighted = [&](int x) {
    return k.flow().at(x) * k.sigma().sigma(t.level(x));
  };
  Rational lhs = 0, rhs = 0;
  for (const auto& [x, gv] : g) lhs += project(k, f, x) * gv * weighted(x);
  for (const auto& [y, fv] : f) rhs += fv * project(k, g, y) * weighted(y);
  return {lhs, rhs};
}

Rational sharp_estimate_ratio(const KernelEvaluator& k, int x, int z) {
  const TruncatedTree& t = k.tree();
  int w = t.confluent(x, z);
  return abs(k.value(x, z)) * k.sigma().sigma(t.level(w)) * k.flow().at(w);
}

RootedKernel::RootedKernel(const TruncatedTree& t, FlowMeasure m,
                           LevelWeight sigma_depth)
    : t_(&t), m_(std::move(m)), sigma_(std::move(sigma_depth)) {
  if (!sigma_.summable_above())
    throw assumption_error("rooted kernel needs sigma in l1 over depth");
  k_o_ = Rational(1) / (m_.at(t.apex()) * sigma_.sum_ge(0));
}

Rational RootedKernel::tail_sum(long j) const { return sigma_.sum_ge(j); }

Rational RootedKernel::value(int x, int y) const {
  Rational acc = k_o_;
  long depth_x = t_->l_top() - t_->level(x);
  for (long n = 0; n < depth_x; ++n) {
    int v = t_->nth_ancestor(x, static_cast<int>(n) + 1);
    int z = t_->nth_ancestor(x, static_cast<int>(n));
    Rational p = psi(*t_, m_, v, z, y);
    if (p != 0) acc += p / tail_sum(depth_x - n);
  }
  return acc;
}

}  // namespace flowberg
