#include "flowberg/measure.hpp"

#include "flowberg/rng.hpp"

#include <algorithm>
#include <cmath>

namespace flowberg {

// ---------------------------------------------------------------- LevelWeight

LevelWeight LevelWeight::exponential(Rational base) {
  if (base <= 0) throw config_error("exponential weight needs base > 0");
  LevelWeight w;
  w.exponential_ = true;
  w.base_ = std::move(base);
  return w;
}

LevelWeight LevelWeight::tabulated(int first_level,
                                   std::vector<Rational> values,
                                   Rational lower_ratio,
                                   Rational upper_ratio) {
  if (values.empty()) throw config_error("tabulated weight needs values");
  for (const auto& v : values)
    if (v <= 0) throw config_error("weight values must be positive");
  if (lower_ratio <= 0 || upper_ratio <= 0)
    throw config_error("tail ratios must be positive");
  LevelWeight w;
  w.exponential_ = false;
  w.first_level_ = first_level;
  w.values_ = std::move(values);
  w.lower_ratio_ = std::move(lower_ratio);
  w.upper_ratio_ = std::move(upper_ratio);
  return w;
}

Rational LevelWeight::sigma(long level) const {
  if (exponential_) return pow_int(base_, level);
  long n0 = first_level_;
  long n1 = n0 + static_cast<long>(values_.size()) - 1;
  if (level < n0) return values_.front() * pow_int(lower_ratio_, n0 - level);
  if (level > n1) return values_.back() * pow_int(upper_ratio_, level - n1);
  return values_[level - n0];
}

bool LevelWeight::summable_below() const {
  return exponential_ ? base_ > 1 : lower_ratio_ < 1;
}

Rational LevelWeight::sum_le(long l) const {
  if (!summable_below())
    throw assumption_error("lower tail of sigma is not summable");
  if (exponential_) return pow_int(base_, l + 1) / (base_ - 1);
  long n0 = first_level_;
  long n1 = n0 + static_cast<long>(values_.size()) - 1;
  if (l < n0)
    return values_.front() * pow_int(lower_ratio_, n0 - l) / (1 - lower_ratio_);
  Rational acc = values_.front() * lower_ratio_ / (1 - lower_ratio_);
  for (long j = n0; j <= std::min(l, n1); ++j) acc += values_[j - n0];
  if (l > n1) {
    // finite geometric block above the table
    Rational u = upper_ratio_;
    if (u == 1) {
      acc += values_.back() * Rational(l - n1);
    } else {
      acc += values_.back() * u * (pow_int(u, l - n1) - 1) / (u - 1);
    }
  }
  return acc;
}

bool LevelWeight::summable_above() const {
  return exponential_ ? base_ < 1 : upper_ratio_ < 1;
}

Rational LevelWeight::sum_ge(long l) const {
  if (!summable_above())
    throw assumption_error("upper tail of sigma is not summable");
  if (exponential_) return pow_int(base_, l) / (1 - base_);
  long n0 = first_level_;
  long n1 = n0 + static_cast<long>(values_.size()) - 1;
  if (l > n1)
    return values_.back() * pow_int(upper_ratio_, l - n1) / (1 - upper_ratio_);
  Rational acc = values_.back() * upper_ratio_ / (1 - upper_ratio_);
  for (long j = std::max(l, n0); j <= n1; ++j) acc += values_[j - n0];
  if (l < n0) {
    Rational rho = lower_ratio_;
    if (rho == 1) {
      acc += values_.front() * Rational(n0 - l);
    } else {
      acc += values_.front() * rho * (pow_int(rho, n0 - l) - 1) / (rho - 1);
    }
  }
  return acc;
}

bool LevelWeight::carleson() const {
  if (exponential_) return false;  // one of the two tails always diverges
  return lower_ratio_ < 1 && upper_ratio_ < 1;
}

Rational LevelWeight::sum_total() const {
  if (!carleson()) throw assumption_error("sigma is not in l1(Z)");
  long n1 = first_level_ + static_cast<long>(values_.size()) - 1;
  return sum_le(n1) + values_.back() * upper_ratio_ / (1 - upper_ratio_);
}

Rational weight_sum(const TruncatedTree& t, int x, long n,
                    const LevelWeight& sigma) {
  return sigma.sum_le(t.level(x) + n);
}

// --------------------------------------------------------------- AmbientChain

AmbientChain AmbientChain::geometric(Rational m0, Rational ratio) {
  if (m0 <= 0) throw config_error("chain needs m0 > 0");
  if (ratio < 1) throw config_error("chain must be nondecreasing (ratio >= 1)");
  AmbientChain c;
  c.values_ = {std::move(m0)};
  c.ratio_ = std::move(ratio);
  return c;
}

AmbientChain AmbientChain::tabulated(std::vector<Rational> values,
                                     Rational tail_ratio) {
  if (values.empty()) throw config_error("chain needs at least m0");
  for (size_t i = 0; i < values.size(); ++i) {
    if (values[i] <= 0) throw config_error("chain values must be positive");
    if (i > 0 && values[i] < values[i - 1])
      throw config_error("chain must be nondecreasing");
  }
  if (tail_ratio < 1) throw config_error("chain tail ratio must be >= 1");
  AmbientChain c;
  c.values_ = std::move(values);
  c.ratio_ = std::move(tail_ratio);
  return c;
}

Rational AmbientChain::m_at(long n) const {
  long last = static_cast<long>(values_.size()) - 1;
  if (n <= last) return values_[n];
  return values_.back() * pow_int(ratio_, n - last);
}

void AmbientChain::validate(TreeMode mode) const {
  if (mode == TreeMode::section3) {
    if (ratio_ <= 1)
      throw config_error("section3 mode needs strictly increasing chain");
    for (size_t i = 1; i < values_.size(); ++i)
      if (values_[i] <= values_[i - 1])
        throw config_error("section3 mode needs strictly increasing chain");
  }
}

// ---------------------------------------------------------------- FlowMeasure

void validate_flow(const TruncatedTree& t, const FlowMeasure& m) {
  if (static_cast<int>(m.values.size()) != t.size())
    throw config_error("flow measure size mismatch");
  const Rational tol(1, BigInt("1000000000000"));
  for (const auto& v : m.values)
    if (v <= 0) throw config_error("flow measure must be positive");
  for (int x = 0; x < t.size(); ++x) {
    if (t.is_leaf(x)) continue;
    Rational sum = 0;
    for (int c : t.children(x)) sum += m.at(c);
    Rational diff = abs(sum - m.at(x));
    if (m.mode == ScalarMode::exact_rational ? diff != 0
                                             : diff > tol * m.at(x))
      throw config_error("mass preservation violated at vertex " +
                         std::to_string(x));
  }
}

FlowMeasure canonical_flow(const TruncatedTree& t) {
  // branching must be a function of the level
  std::vector<long> branch(t.depth() + 1, -1);  // index: level - l_bot
  for (int x = 0; x < t.size(); ++x) {
    if (t.is_leaf(x)) continue;
    long b = static_cast<long>(t.children(x).size());
    long& slot = branch[t.level(x) - t.l_bot()];
    if (slot < 0)
      slot = b;
    else if (slot != b)
      throw unsupported_error("canonical flow needs a level-radial tree");
  }
  // m is constant on levels; build top-down from the apex
  std::vector<Rational> mlevel(t.depth() + 1);
  long apex_branch = branch.back() < 0 ? 1 : branch.back();
  mlevel.back() = pow_int(Rational(apex_branch), t.l_top());
  for (int l = t.l_top(); l > t.l_bot(); --l) {
    long b = branch[l - t.l_bot()];
    mlevel[l - 1 - t.l_bot()] = mlevel[l - t.l_bot()] / b;
  }
  if (t.l_bot() <= 0 && 0 <= t.l_top()) {
    Rational scale = mlevel[0 - t.l_bot()];
    for (auto& v : mlevel) v /= scale;
  }
  FlowMeasure m;
  m.values.resize(t.size());
  for (int x = 0; x < t.size(); ++x)
    m.values[x] = mlevel[t.level(x) - t.l_bot()];
  return m;
}

AmbientChain canonical_chain(const TruncatedTree& t, const FlowMeasure& m) {
  if (t.is_leaf(t.apex()))
    throw unsupported_error("single-vertex window has no canonical chain");
  return AmbientChain::geometric(
      m.at(t.apex()), Rational(static_cast<long>(t.children(t.apex()).size())));
}

FlowMeasure random_flow(const TruncatedTree& t, std::uint64_t seed,
                        const Rational& lo, const Rational& hi) {
  if (!(lo > 0 && lo <= hi && hi < 1))
    throw config_error("ratio bounds must satisfy 0 < lo <= hi < 1");
  SplitMix64 rng(seed);
  const long R = 1 << 20;
  FlowMeasure m;
  m.values.assign(t.size(), Rational(0));
  m.values[t.apex()] = 1;
  // ids are BFS-ordered, so parents come before children
  for (int x = 0; x < t.size(); ++x) {
    if (t.is_leaf(x)) continue;
    long c = static_cast<long>(t.children(x).size());
    if (Rational(c) * lo > 1 || Rational(c) * hi < 1)
      throw config_error("ratio bounds infeasible for branching " +
                         std::to_string(c));
    Rational remaining = 1;
    for (long i = 0; i < c; ++i) {
      long slots_left = c - i - 1;
      Rational share;
      if (slots_left == 0) {
        share = remaining;
      } else {
        Rational lob = std::max(lo, Rational(remaining - Rational(slots_left) * hi));
        Rational hib = std::min(hi, Rational(remaining - Rational(slots_left) * lo));
        Rational u(static_cast<long>(rng.uniform(0, R)), R);
        share = lob + (hib - lob) * u;
      }
      m.values[t.children(x)[i]] = m.values[x] * share;
      remaining -= share;
    }
  }
  return m;
}

DoublingConstants doubling_constants(const TruncatedTree& t,
                                     const FlowMeasure& m,
                                     const AmbientChain& chain) {
  DoublingConstants d{Rational(0), Rational(0)};
  auto feed = [&](const Rational& child, const Rational& parent) {
    d.c_m = std::max(d.c_m, Rational(parent / child));
    d.d_m = std::max(d.d_m, Rational(child / parent));
  };
  for (int x = 0; x < t.size(); ++x)
    if (t.parent(x) >= 0) feed(m.at(x), m.at(t.parent(x)));
  long g = chain.geometric_from();
  for (long n = 0; n <= g; ++n) feed(chain.m_at(n), chain.m_at(n + 1));
  feed(Rational(1), chain.tail_ratio());
  return d;
}

Rational sector_mass(const TruncatedTree& t, const FlowMeasure& m,
                     const LevelWeight& sigma, int x, bool strict) {
  return m.at(x) * sigma.sum_le(t.level(x) - (strict ? 1 : 0));
}

AssumptionIIResult assumption_ii_check(const LevelWeight& sigma,
                                       const AmbientChain& chain,
                                       int apex_level) {
  if (!sigma.summable_below())
    throw assumption_error("Assumption i fails: sigma lower tail diverges");
  Rational u = sigma.upper_growth_ratio();
  long sig_geo =
      sigma.is_exponential()
          ? 0
          : std::max(0L, sigma.geometric_above_level() - apex_level);
  long start = std::max(chain.geometric_from(), sig_geo);
  Rational step = u * chain.tail_ratio();
  AssumptionIIResult res;
  if (step <= 1) {
    res.converges = false;
    return res;
  }
  Rational acc = 0;
  for (long n = 0; n < start; ++n)
    acc += Rational(1) / (sigma.sigma(apex_level + n) * chain.m_at(n));
  Rational a0 =
      Rational(1) / (sigma.sigma(apex_level + start) * chain.m_at(start));
  acc += a0 / (1 - Rational(1) / step);
  res.converges = true;
  res.sum = acc;
  return res;
}

Rational sector_weight_ratio_exact_p1(const TruncatedTree& t,
                                      const FlowMeasure& m, int y,
                                      const Rational& k) {
  if (k <= 1) throw assumption_error("p=1 tail needs k > 1");
  Rational num = 0;
  Rational bottom_mass = 0;
  for (int x : t.sector(y)) {
    num += pow_int(k, t.level(x)) * m.at(x);
    if (t.level(x) == t.l_bot()) bottom_mass += m.at(x);
  }
  // below the window every level of T_y still carries bottom_mass
  num += bottom_mass * pow_int(k, t.l_bot()) / (k - 1);
  return num / (pow_int(k, t.level(y)) * m.at(y));
}

SectorWeightRatio sector_weight_ratio(const TruncatedTree& t,
                                      const FlowMeasure& m, int y,
                                      const Rational& k, double p,
                                      int below_branching) {
  SectorWeightRatio res;
  double kd = to_double(k);
  double num = 0;
  std::vector<int> bottom;
  for (int x : t.sector(y)) {
    num += std::pow(kd, t.level(x)) * std::pow(to_double(m.at(x)), p);
    if (t.level(x) == t.l_bot()) bottom.push_back(x);
  }
  if (below_branching >= 1) {
    // equal splits below the window: each level multiplies by b^(1-p)/k
    double rho = std::pow(double(below_branching), 1.0 - p) / kd;
    if (rho >= 1) {
      res.divergent = true;
    } else {
      for (int x : bottom)
        num += std::pow(kd, t.level(x)) * std::pow(to_double(m.at(x)), p) *
               rho / (1 - rho);
    }
  } else {
    res.truncated = true;
  }
  res.ratio =
      num / (std::pow(kd, t.level(y)) * std::pow(to_double(m.at(y)), p));
  return res;
}

bool carleson_check(const LevelWeight& sigma) { return sigma.carleson(); }

double lp_norm_supported(const TruncatedTree& t, const FlowMeasure& m,
                         const LevelWeight& sigma,
                         const std::map<int, Rational>& f, double p) {
  if (p < 1) throw config_error("p must be >= 1");
  double acc = 0;
  for (const auto& [x, v] : f) {
    if (v == 0) continue;
    acc += std::pow(std::abs(to_double(v)), p) *
           to_double(m.at(x) * sigma.sigma(t.level(x)));
  }
  return std::pow(acc, 1.0 / p);
}

}  // namespace flowberg
