#pragma once

#include "flowberg/harmonic.hpp"
#include "flowberg/measure.hpp"
#include "flowberg/tree.hpp"

#include <json.hpp>

#include <string>

namespace flowberg {

using Json = nlohmann::json;

/// Scalars serialize as "p/q" strings in exact mode, doubles otherwise.
Json scalar_to_json(const Rational& v, ScalarMode mode);
Rational scalar_from_json(const Json& j);

Json tree_to_json(const TruncatedTree& t);
TruncatedTree tree_from_json(const Json& j);

/// A flow measure with its analytic surroundings; what `measure` files
/// hold.
struct MeasureBundle {
  FlowMeasure m;
  AmbientChain chain = AmbientChain::geometric(1, 2);
  LevelWeight sigma = LevelWeight::exponential(2);
};

Json measure_to_json(const MeasureBundle& b);
MeasureBundle measure_from_json(const TruncatedTree& t, const Json& j);

Json chain_to_json(const AmbientChain& chain);
AmbientChain chain_from_json(const Json& j);
Json sigma_to_json(const LevelWeight& sigma);
LevelWeight sigma_from_json(const Json& j);

Json function_to_json(const HarmonicFunction& f, ScalarMode mode);
HarmonicFunction function_from_json(const TruncatedTree& t, const Json& j);

Json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const Json& j);

}  // namespace flowberg
