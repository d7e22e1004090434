#include "flowberg/io.hpp"

#include <fstream>

namespace flowberg {

Json scalar_to_json(const Rational& v, ScalarMode mode) {
  if (mode == ScalarMode::exact_rational) return format_rational(v);
  return to_double(v);
}

Rational scalar_from_json(const Json& j) {
  if (j.is_string()) return parse_rational(j.get<std::string>());
  if (j.is_number_integer()) return Rational(j.get<long>());
  if (j.is_number_float()) return parse_rational(std::to_string(j.get<double>()));
  throw config_error("scalar must be a string or number");
}

Json tree_to_json(const TruncatedTree& t) {
  Json verts = Json::array();
  for (const Vertex& v : t.vertices()) {
    Json jv;
    jv["id"] = v.id;
    jv["level"] = v.level;
    if (v.parent < 0)
      jv["parent"] = nullptr;
    else
      jv["parent"] = v.parent;
    jv["children"] = v.children;
    verts.push_back(std::move(jv));
  }
  return Json{{"levels", {{"top", t.l_top()}, {"bot", t.l_bot()}}},
              {"vertices", std::move(verts)},
              {"mode", tree_mode_name(t.mode())}};
}

TruncatedTree tree_from_json(const Json& j) {
  std::vector<Vertex> verts;
  for (const Json& jv : j.at("vertices")) {
    Vertex v;
    v.id = jv.at("id").get<int>();
    v.level = jv.at("level").get<int>();
    v.parent = jv.at("parent").is_null() ? -1 : jv.at("parent").get<int>();
    v.children = jv.at("children").get<std::vector<int>>();
    verts.push_back(std::move(v));
  }
  return TruncatedTree(std::move(verts), j.at("levels").at("top").get<int>(),
                       j.at("levels").at("bot").get<int>(),
                       tree_mode_from_name(j.at("mode").get<std::string>()));
}

Json chain_to_json(const AmbientChain& chain) {
  if (chain.is_geometric_kind())
    return Json{{"kind", "geometric"},
                {"m0", format_rational(chain.m0())},
                {"ratio", format_rational(chain.tail_ratio())}};
  Json vals = Json::array();
  for (long n = 0; n <= chain.geometric_from(); ++n)
    vals.push_back(format_rational(chain.m_at(n)));
  return Json{{"kind", "tabulated"},
              {"values", std::move(vals)},
              {"tail_ratio", format_rational(chain.tail_ratio())}};
}

AmbientChain chain_from_json(const Json& j) {
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "geometric")
    return AmbientChain::geometric(scalar_from_json(j.at("m0")),
                                   scalar_from_json(j.at("ratio")));
  if (kind == "tabulated") {
    std::vector<Rational> vals;
    for (const Json& v : j.at("values")) vals.push_back(scalar_from_json(v));
    return AmbientChain::tabulated(std::move(vals),
                                   scalar_from_json(j.at("tail_ratio")));
  }
  throw config_error("unknown chain kind: " + kind);
}

Json sigma_to_json(const LevelWeight& sigma) {
  if (sigma.is_exponential())
    return Json{{"kind", "exponential"},
                {"base", format_rational(sigma.base())}};
  Json vals = Json::array();
  for (const Rational& v : sigma.table_values())
    vals.push_back(format_rational(v));
  return Json{{"kind", "tabulated"},
              {"first_level", sigma.table_first_level()},
              {"values", std::move(vals)},
              {"lower_ratio", format_rational(sigma.lower_tail_ratio())},
              {"upper_ratio", format_rational(sigma.upper_growth_ratio())}};
}

LevelWeight sigma_from_json(const Json& j) {
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "exponential")
    return LevelWeight::exponential(scalar_from_json(j.at("base")));
  if (kind == "tabulated") {
    std::vector<Rational> vals;
    for (const Json& v : j.at("values")) vals.push_back(scalar_from_json(v));
    return LevelWeight::tabulated(j.at("first_level").get<int>(),
                                  std::move(vals),
                                  scalar_from_json(j.at("lower_ratio")),
                                  scalar_from_json(j.at("upper_ratio")));
  }
  throw config_error("unknown sigma kind: " + kind);
}

Json measure_to_json(const MeasureBundle& b) {
  Json m = Json::object();
  for (size_t id = 0; id < b.m.values.size(); ++id)
    m[std::to_string(id)] = scalar_to_json(b.m.values[id], b.m.mode);
  return Json{{"m", std::move(m)},
              {"chain", chain_to_json(b.chain)},
              {"sigma", sigma_to_json(b.sigma)},
              {"mode", b.m.mode == ScalarMode::exact_rational
                           ? "exact_rational"
                           : "float64"}};
}

MeasureBundle measure_from_json(const TruncatedTree& t, const Json& j) {
  MeasureBundle b;
  std::string mode = j.at("mode").get<std::string>();
  if (mode == "exact_rational")
    b.m.mode = ScalarMode::exact_rational;
  else if (mode == "float64")
    b.m.mode = ScalarMode::float64;
  else
    throw config_error("unknown scalar mode: " + mode);
  b.m.values.assign(t.size(), Rational(0));
  const Json& jm = j.at("m");
  if (static_cast<int>(jm.size()) != t.size())
    throw config_error("measure entry count does not match the tree");
  for (auto it = jm.begin(); it != jm.end(); ++it) {
    int id = std::stoi(it.key());
    if (id < 0 || id >= t.size())
      throw config_error("measure references unknown vertex " + it.key());
    b.m.values[id] = scalar_from_json(it.value());
  }
  b.chain = chain_from_json(j.at("chain"));
  b.sigma = sigma_from_json(j.at("sigma"));
  validate_flow(t, b.m);
  b.chain.validate(t.mode());
  return b;
}

Json function_to_json(const HarmonicFunction& f, ScalarMode mode) {
  Json vals = Json::object();
  for (size_t id = 0; id < f.values.size(); ++id)
    vals[std::to_string(id)] = scalar_to_json(f.values[id], mode);
  return Json{{"values", std::move(vals)},
              {"c0", scalar_to_json(f.c0, mode)}};
}

HarmonicFunction function_from_json(const TruncatedTree& t, const Json& j) {
  HarmonicFunction f;
  f.values.assign(t.size(), Rational(0));
  const Json& jv = j.at("values");
  for (auto it = jv.begin(); it != jv.end(); ++it) {
    int id = std::stoi(it.key());
    if (id < 0 || id >= t.size())
      throw config_error("function references unknown vertex " + it.key());
    f.values[id] = scalar_from_json(it.value());
  }
  f.c0 = scalar_from_json(j.at("c0"));
  return f;
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open " + path);
  Json j;
  in >> j;
  return j;
}

void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw config_error("cannot write " + path);
  out << j.dump(2) << "\n";
}

}  // namespace flowberg
