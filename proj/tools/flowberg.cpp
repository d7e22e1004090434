#include "flowberg/io.hpp"
#include "flowberg/kernel.hpp"
#include "flowberg/rng.hpp"
#include "flowberg/toeplitz.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace flowberg;

namespace {

ScalarMode global_mode() {
  const char* env = std::getenv("FLOWBERG_MODE");
  if (!env || std::string(env) == "exact") return ScalarMode::exact_rational;
  if (std::string(env) == "float") return ScalarMode::float64;
  throw config_error("FLOWBERG_MODE must be 'exact' or 'float'");
}

struct GenOpts {
  std::string kind = "homogeneous";
  int q = 2;
  std::string radial;
  int min_deg = 2, max_deg = 3;
  std::uint64_t seed = 0;
  int top = 0, depth = 1;
  std::string mode = "section3";
  std::string out;
};

TreeGenSpec to_spec(const GenOpts& o) {
  TreeGenSpec s;
  if (o.kind == "homogeneous")
    s.kind = TreeGenSpec::Kind::homogeneous;
  else if (o.kind == "radial")
    s.kind = TreeGenSpec::Kind::radial;
  else if (o.kind == "random")
    s.kind = TreeGenSpec::Kind::random;
  else
    throw config_error("unknown kind: " + o.kind);
  s.q = o.q;
  if (!o.radial.empty()) {
    std::stringstream ss(o.radial);
    std::string tok;
    while (std::getline(ss, tok, ',')) s.radial_q.push_back(std::stoi(tok));
  }
  s.min_deg = o.min_deg;
  s.max_deg = o.max_deg;
  s.seed = o.seed;
  s.l_top = o.top;
  s.l_bot = o.top - o.depth;
  s.mode = tree_mode_from_name(o.mode);
  return s;
}

struct SuiteResult {
  long cases = 0;
  long failures = 0;
  double max_abs_error = 0;
};

void record(SuiteResult& r, const Rational& deviation, double tol) {
  ++r.cases;
  double d = std::abs(to_double(deviation));
  r.max_abs_error = std::max(r.max_abs_error, d);
  if (d > tol) ++r.failures;
}

void record_bool(SuiteResult& r, bool ok) {
  ++r.cases;
  if (!ok) ++r.failures;
}

/// Per-level sample of vertex ids; exhaustive when the window is small.
std::vector<int> level_sample(const TruncatedTree& t, size_t cap,
                              std::uint64_t seed) {
  std::vector<int> out;
  if (static_cast<size_t>(t.size()) <= cap) {
    out.resize(t.size());
    for (int i = 0; i < t.size(); ++i) out[i] = i;
    return out;
  }
  SplitMix64 rng(seed);
  size_t per = std::max<size_t>(1, cap / (t.depth() + 1));
  for (int lvl = t.l_bot(); lvl <= t.l_top(); ++lvl) {
    const auto& members = t.level_members(lvl);
    for (size_t i = 0; i < std::min(per, members.size()); ++i)
      out.push_back(members[rng.uniform(0, members.size() - 1)]);
  }
  return out;
}

SuiteResult run_suite(const std::string& suite, const TruncatedTree& t,
                      const MeasureBundle& b, std::uint64_t seed, int count,
                      double tol) {
  SuiteResult r;
  auto harmonics = [&](int n) {
    std::vector<HarmonicFunction> fs;
    for (int i = 0; i < n; ++i)
      fs.push_back(random_harmonic(t, b.m, b.chain, seed + i));
    return fs;
  };
  if (suite == "laplacian") {
    for (const auto& f : harmonics(count))
      for (int x = 0; x < t.size(); ++x)
        if (t.is_internal(x)) record(r, laplacian(t, b.m, f, x), tol);
  } else if (suite == "flow") {
    for (int x = 0; x < t.size(); ++x)
      for (int n = 0; t.level(x) - n >= t.l_bot(); ++n) {
        HarmonicFunction f = random_harmonic(t, b.m, b.chain, seed);
        auto [lhs, rhs] = flow_invariance_check(t, b.m, f, x, n);
        record(r, lhs - rhs, tol);
      }
  } else if (suite == "pairing") {
    KernelEvaluator k(t, b.m, b.chain, b.sigma);
    for (const auto& f : harmonics(count))
      for (int x : level_sample(t, 200, seed)) {
        auto [lhs, rhs] = psi_pairing(k, f, x);
        record(r, lhs - rhs, tol);
      }
  } else if (suite == "orthogonality") {
    KernelEvaluator k(t, b.m, b.chain, b.sigma);
    int v = t.level_members(t.l_bot()).front();
    for (long j = 0; j < 12; ++j)
      for (long jk = 0; jk < j; ++jk)
        record(r, psi_orthogonality(k, v, j, jk), tol);
  } else if (suite == "symmetry") {
    KernelEvaluator k(t, b.m, b.chain, b.sigma);
    auto sample = level_sample(t, 100, seed);
    for (int x : sample)
      for (int y : sample) record(r, k.value(x, y) - k.value(y, x), tol);
  } else if (suite == "reproducing") {
    KernelEvaluator k(t, b.m, b.chain, b.sigma);
    for (const auto& f : harmonics(count))
      for (int v : level_sample(t, 200, seed)) {
        auto [lhs, rhs] = reproduce(k, f, v);
        record(r, lhs - rhs, tol);
      }
  } else if (suite == "hormander") {
    KernelEvaluator k(t, b.m, b.chain, b.sigma);
    for (int lvl = t.l_top() - 1; lvl >= std::max(t.l_bot(), t.l_top() - 4);
         --lvl)
      for (int u : t.level_members(lvl)) {
        auto sect = t.sector(u);
        SplitMix64 rng(seed ^ static_cast<std::uint64_t>(u));
        for (int i = 0; i < 4; ++i) {
          int x = sect[rng.uniform(0, sect.size() - 1)];
          int y = sect[rng.uniform(0, sect.size() - 1)];
          record_bool(r, hormander_check(k, u, x, y));
        }
      }
  } else if (suite == "size") {
    KernelEvaluator k(t, b.m, b.chain, b.sigma);
    for (int u : level_sample(t, 100, seed)) {
      auto sect = t.sector(u);
      SplitMix64 rng(seed ^ static_cast<std::uint64_t>(u));
      int x = sect[rng.uniform(0, sect.size() - 1)];
      record_bool(r, size_condition(k, u, x) <= 3);
    }
  } else if (suite == "sharp-estimate") {
    KernelEvaluator k(t, b.m, b.chain, b.sigma);
    auto sample = level_sample(t, 60, seed);
    for (int x : sample)
      for (int z : sample) {
        Rational ratio = sharp_estimate_ratio(k, x, z);
        record_bool(r, ratio >= Rational(1, 10) && ratio <= 10);
      }
  } else if (suite == "sector-ratio") {
    if (!b.sigma.is_exponential() || b.sigma.base() <= 1)
      throw config_error("sector-ratio suite needs exponential sigma with base > 1");
    const Rational& k = b.sigma.base();
    Rational expected = k / (k - 1);
    for (int y : level_sample(t, 200, seed))
      record(r, sector_weight_ratio_exact_p1(t, b.m, y, k) - expected, tol);
  } else {
    throw config_error("unknown suite: " + suite);
  }
  return r;
}

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::bounded_certified: return "bounded_certified";
    case Verdict::unbounded_certified: return "unbounded_certified";
    default: return "indeterminate";
  }
}

const char* class_name(ProbeClass c) {
  switch (c) {
    case ProbeClass::stable: return "stable";
    case ProbeClass::growing: return "growing";
    default: return "indeterminate";
  }
}

Json cond_item_json(const CondItem& c) {
  return Json{{"holds", c.holds}, {"lhs", c.lhs}, {"mid", c.mid},
              {"rhs", c.rhs}};
}

Json condition_report_json(const ConditionReport& rep) {
  Json j{{"necessary_i", cond_item_json(rep.necessary_i)},
         {"necessary_ii", cond_item_json(rep.necessary_ii)},
         {"sufficient_1", cond_item_json(rep.sufficient_1)},
         {"sufficient_2", cond_item_json(rep.sufficient_2)},
         {"verdict", verdict_name(rep.verdict)}};
  if (rep.schur)
    j["schur_interval"] = Json{{"nonempty", rep.schur->nonempty},
                               {"lo", rep.schur->lo},
                               {"hi", rep.schur->hi}};
  return j;
}

std::vector<int> parse_depths(const std::string& s) {
  std::vector<int> out;
  auto colon = s.find(':');
  if (colon != std::string::npos) {
    int lo = std::stoi(s.substr(0, colon));
    int hi = std::stoi(s.substr(colon + 1));
    for (int d = lo; d <= hi; ++d) out.push_back(d);
  } else {
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stoi(tok));
  }
  if (out.empty()) throw config_error("empty depth list");
  return out;
}

std::map<std::string, long> parse_exponents(const std::string& s) {
  std::map<std::string, long> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    auto eq = tok.find('=');
    if (eq == std::string::npos)
      throw config_error("params must look like a=1,b=2,c=3,d=1");
    out[tok.substr(0, eq)] = std::stol(tok.substr(eq + 1));
  }
  for (const char* k : {"a", "b", "c", "d"})
    if (!out.count(k)) throw config_error(std::string("missing exponent ") + k);
  return out;
}

/// Minimal flat-TOML reader: `key = value` lines with integer, string,
/// or homogeneous list values; comments with '#'.
std::map<std::string, std::vector<std::string>> parse_grid_file(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open " + path);
  std::map<std::string, std::vector<std::string>> out;
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      size_t a = s.find_first_not_of(" \t\r\"[]");
      size_t b = s.find_last_not_of(" \t\r\"[]");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    std::string key = trim(line.substr(0, eq));
    std::string val = line.substr(eq + 1);
    std::vector<std::string> items;
    std::stringstream ss(val);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      std::string v = trim(tok);
      if (!v.empty()) items.push_back(v);
    }
    if (!key.empty() && !items.empty()) out[key] = std::move(items);
  }
  return out;
}

int run(int argc, char** argv) {
  CLI::App app{"harmonic Bergman theory on truncated trees"};
  app.require_subcommand(1);
  ScalarMode mode = global_mode();

  // ---- gen ----
  GenOpts gen;
  auto* cmd_gen = app.add_subcommand("gen", "generate a tree window");
  cmd_gen->add_option("--kind", gen.kind);
  cmd_gen->add_option("--q", gen.q);
  cmd_gen->add_option("--radial", gen.radial);
  cmd_gen->add_option("--min", gen.min_deg);
  cmd_gen->add_option("--max", gen.max_deg);
  cmd_gen->add_option("--seed", gen.seed);
  cmd_gen->add_option("--top", gen.top);
  cmd_gen->add_option("--depth", gen.depth);
  cmd_gen->add_option("--mode", gen.mode);
  cmd_gen->add_option("-o,--out", gen.out)->required();

  // ---- measure ----
  std::string ms_tree, ms_out, ms_sigma_exp = "2", ms_chain_ratio;
  bool ms_canonical = false;
  std::uint64_t ms_seed = 0;
  bool ms_random = false;
  std::string ms_lo = "1/4", ms_hi = "3/4";
  auto* cmd_measure = app.add_subcommand("measure", "build a flow measure");
  cmd_measure->add_option("--tree", ms_tree)->required();
  cmd_measure->add_flag("--canonical", ms_canonical);
  cmd_measure->add_flag("--random", ms_random);
  cmd_measure->add_option("--seed", ms_seed);
  cmd_measure->add_option("--share-lo", ms_lo);
  cmd_measure->add_option("--share-hi", ms_hi);
  cmd_measure->add_option("--sigma-exp", ms_sigma_exp);
  cmd_measure->add_option("--chain-ratio", ms_chain_ratio);
  cmd_measure->add_option("-o,--out", ms_out)->required();

  // ---- harmonic ----
  std::string h_tree, h_measure, h_leaves, h_out;
  std::uint64_t h_seed = 0;
  bool h_random = false;
  auto* cmd_harm = app.add_subcommand("harmonic", "extend leaf data");
  cmd_harm->add_option("--tree", h_tree)->required();
  cmd_harm->add_option("--measure", h_measure)->required();
  cmd_harm->add_option("--leaves", h_leaves);
  cmd_harm->add_flag("--random", h_random);
  cmd_harm->add_option("--seed", h_seed);
  cmd_harm->add_option("-o,--out", h_out)->required();

  // ---- kernel ----
  std::string k_tree, k_measure, k_pairs, k_out;
  bool k_all = false;
  auto* cmd_kernel = app.add_subcommand("kernel", "dump kernel values");
  cmd_kernel->add_option("--tree", k_tree)->required();
  cmd_kernel->add_option("--measure", k_measure)->required();
  cmd_kernel->add_option("--pairs", k_pairs);
  cmd_kernel->add_flag("--all-pairs", k_all);
  cmd_kernel->add_option("-o,--out", k_out)->required();

  // ---- verify ----
  std::string v_tree, v_measure, v_suite, v_out;
  std::uint64_t v_seed = 1;
  int v_count = 10;
  auto* cmd_verify = app.add_subcommand("verify", "run an identity suite");
  cmd_verify->add_option("--tree", v_tree)->required();
  cmd_verify->add_option("--measure", v_measure)->required();
  cmd_verify->add_option("--suite", v_suite)->required();
  cmd_verify->add_option("--seed", v_seed);
  cmd_verify->add_option("--count", v_count);
  cmd_verify->add_option("-o,--out", v_out);

  // ---- probe ----
  std::string p_family = "homogeneous", p_params, p_p = "2",
              p_depths = "3:10", p_op = "U", p_out;
  long p_q = 2;
  auto* cmd_probe = app.add_subcommand("probe", "operator norm-growth probe");
  cmd_probe->alias("toeplitz");
  cmd_probe->add_option("--tree-family", p_family);
  cmd_probe->add_option("--q", p_q);
  cmd_probe->add_option("--params", p_params)->required();
  cmd_probe->add_option("--p", p_p);
  cmd_probe->add_option("--depths", p_depths);
  cmd_probe->add_option("--probe", p_op);
  cmd_probe->add_option("-o,--out", p_out)->required();

  // ---- sweep ----
  std::string sw_grid, sw_out;
  auto* cmd_sweep = app.add_subcommand("sweep", "parameter-grid sweep");
  cmd_sweep->add_option("--grid", sw_grid)->required();
  cmd_sweep->add_option("-o,--out", sw_out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  if (cmd_gen->parsed()) {
    TruncatedTree t = build_tree(to_spec(gen));
    write_json_file(gen.out, tree_to_json(t));
    return 0;
  }

  if (cmd_measure->parsed()) {
    TruncatedTree t = tree_from_json(read_json_file(ms_tree));
    MeasureBundle b;
    if (ms_canonical == ms_random)
      throw config_error("choose exactly one of --canonical / --random");
    if (ms_canonical)
      b.m = canonical_flow(t);
    else
      b.m = random_flow(t, ms_seed, parse_rational(ms_lo),
                        parse_rational(ms_hi));
    b.m.mode = mode;
    if (ms_chain_ratio.empty())
      b.chain = canonical_chain(t, b.m);
    else
      b.chain = AmbientChain::geometric(b.m.at(t.apex()),
                                        parse_rational(ms_chain_ratio));
    b.sigma = LevelWeight::exponential(parse_rational(ms_sigma_exp));
    write_json_file(ms_out, measure_to_json(b));
    return 0;
  }

  if (cmd_harm->parsed()) {
    TruncatedTree t = tree_from_json(read_json_file(h_tree));
    MeasureBundle b = measure_from_json(t, read_json_file(h_measure));
    HarmonicFunction f;
    if (h_random) {
      f = random_harmonic(t, b.m, b.chain, h_seed);
    } else {
      if (h_leaves.empty())
        throw config_error("either --leaves or --random is required");
      std::vector<Rational> lv;
      for (const Json& v : read_json_file(h_leaves))
        lv.push_back(scalar_from_json(v));
      f = make_harmonic(t, b.m, b.chain, lv);
    }
    write_json_file(h_out, function_to_json(f, mode));
    return 0;
  }

  if (cmd_kernel->parsed()) {
    TruncatedTree t = tree_from_json(read_json_file(k_tree));
    MeasureBundle b = measure_from_json(t, read_json_file(k_measure));
    KernelEvaluator k(t, b.m, b.chain, b.sigma);
    std::vector<std::pair<int, int>> pairs;
    if (k_all) {
      for (int x = 0; x < t.size(); ++x)
        for (int y = 0; y < t.size(); ++y) pairs.emplace_back(x, y);
    } else {
      if (k_pairs.empty())
        throw config_error("either --pairs or --all-pairs is required");
      for (const Json& p : read_json_file(k_pairs))
        pairs.emplace_back(p.at(0).get<int>(), p.at(1).get<int>());
    }
    std::ofstream out(k_out);
    if (!out) throw config_error("cannot write " + k_out);
    if (mode == ScalarMode::exact_rational) {
      out << "x,y,confluent,value_num,value_den,certified_err\n";
      for (auto [x, y] : pairs) {
        Rational v = k.value(x, y);
        out << x << "," << y << "," << t.confluent(x, y) << ","
            << numerator(v) << "," << denominator(v) << ",0\n";
      }
    } else {
      out << "x,y,confluent,value,certified_err\n";
      for (auto [x, y] : pairs) {
        CertifiedValue cv = k.value_certified(x, y, 1e-12);
        out << x << "," << y << "," << t.confluent(x, y) << "," << cv.value
            << "," << cv.remainder << "\n";
      }
    }
    return 0;
  }

  if (cmd_verify->parsed()) {
    TruncatedTree t = tree_from_json(read_json_file(v_tree));
    MeasureBundle b = measure_from_json(t, read_json_file(v_measure));
    double tol = mode == ScalarMode::exact_rational ? 0.0 : 1e-10;
    SuiteResult r = run_suite(v_suite, t, b, v_seed, v_count, tol);
    Json rep{{"suite", v_suite},
             {"cases", r.cases},
             {"failures", r.failures},
             {"max_abs_error", r.max_abs_error},
             {"config", {{"tree", v_tree},
                         {"measure", v_measure},
                         {"seed", v_seed},
                         {"count", v_count},
                         {"mode", mode == ScalarMode::exact_rational
                                      ? "exact"
                                      : "float"}}}};
    if (v_out.empty())
      std::cout << rep.dump(2) << "\n";
    else
      write_json_file(v_out, rep);
    return r.failures == 0 ? 0 : 1;
  }

  if (cmd_probe->parsed()) {
    if (p_family != "homogeneous")
      throw config_error("only the homogeneous tree family is probed");
    auto exps = parse_exponents(p_params);
    Rational p = parse_rational(p_p);
    ToeplitzParams prm = ToeplitzParams::from_exponents(
        p_q, exps["a"], exps["b"], exps["c"], exps["d"], p);
    ProbeOp op = p_op == "U"   ? ProbeOp::U
                 : p_op == "V" ? ProbeOp::V
                 : p_op == "P" ? ProbeOp::P
                               : throw config_error("probe must be U, V, or P");
    std::vector<int> depths = parse_depths(p_depths);
    Rational q(p_q);
    ConditionReport cond =
        condition_report(prm, q, Rational(1) / q, q);
    CorollaryVerdict cor = corollary_check(p_q, exps["a"], exps["b"],
                                           exps["c"], exps["d"], p);
    ProbeReport probe = norm_probe(p_q, prm, op, depths);
    Json per = Json::array();
    for (const auto& d : probe.per_depth)
      per.push_back(Json{{"depth", d.depth},
                         {"direct_ratio", d.direct_ratio},
                         {"dual_ratio", d.dual_ratio}});
    Json rep{{"config", {{"q", p_q},
                         {"params", p_params},
                         {"p", p_p},
                         {"depths", p_depths},
                         {"probe", p_op}}},
             {"conditions", condition_report_json(cond)},
             {"corollary", {{"ratio_condition", cor.ratio_condition},
                            {"inequality", cor.inequality},
                            {"bounded", cor.bounded},
                            {"stated_equality", cor.stated_equality},
                            {"discrepancy", cor.discrepancy}}},
             {"probe", {{"per_depth", std::move(per)},
                        {"slope", probe.slope},
                        {"max_min_ratio", probe.max_min_ratio},
                        {"classification", class_name(probe.cls)}}}};
    write_json_file(p_out, rep);
    return 0;
  }

  if (cmd_sweep->parsed()) {
    auto grid = parse_grid_file(sw_grid);
    auto ints = [&](const char* key, std::vector<long> dflt) {
      if (!grid.count(key)) return dflt;
      std::vector<long> out;
      for (const auto& s : grid[key]) out.push_back(std::stol(s));
      return out;
    };
    long q = grid.count("q") ? std::stol(grid["q"][0]) : 2;
    std::vector<std::string> ps =
        grid.count("p") ? grid["p"] : std::vector<std::string>{"2"};
    std::vector<int> depths =
        grid.count("depths") ? parse_depths(grid["depths"][0])
                             : parse_depths("3:10");
    std::ofstream out(sw_out);
    if (!out) throw config_error("cannot write " + sw_out);
    out << "a,b,c,d,p,nec_i,nec_ii,suf_1,suf_2,interval_lo,interval_hi,"
           "probe_slope,verdict\n";
    for (long a : ints("a", {0, 1, 2}))
      for (long b : ints("b", {0, 1, 2}))
        for (long c : ints("c", {2, 3, 4}))
          for (long d : ints("d", {-1, 0, 1, 2, 3, 4}))
            for (const auto& pstr : ps) {
              Rational p = parse_rational(pstr);
              ToeplitzParams prm =
                  ToeplitzParams::from_exponents(q, a, b, c, d, p);
              Rational qr(q);
              ConditionReport cond =
                  condition_report(prm, qr, Rational(1) / qr, qr);
              ProbeReport probe = norm_probe(q, prm, ProbeOp::U, depths);
              out << a << "," << b << "," << c << "," << d << "," << pstr
                  << "," << cond.necessary_i.holds << ","
                  << cond.necessary_ii.holds << ","
                  << cond.sufficient_1.holds << ","
                  << cond.sufficient_2.holds << ",";
              if (cond.schur && cond.schur->nonempty)
                out << cond.schur->lo << "," << cond.schur->hi;
              else
                out << ",";
              out << "," << probe.slope << ","
                  << verdict_name(cond.verdict) << "\n";
            }
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
