#pragma once

// JSON persistence. Output is written with 17 significant digits and sorted
// keys so equal values always produce equal bytes.

#include <nlohmann/json.hpp>

#include <string>

#include "ovf/checks.hpp"
#include "ovf/measure_algebra.hpp"
#include "ovf/ovf_core.hpp"
#include "ovf/refinement.hpp"
#include "ovf/stationarity.hpp"
#include "ovf/synthesis.hpp"

namespace ovf::io {

using json = nlohmann::json;

/// Compact-but-indented deterministic text; doubles as %.17g.
std::string dump(const json& j);
/// FormatError on malformed text.
json parse(const std::string& text);

json to_json(cplx z);
cplx complex_from_json(const json& j, const std::string& where);
json to_json(const Block& b);
Block block_from_json(const json& j, const std::string& where);

json to_json(const MeasureSpace& s);
MeasureSpace space_from_json(const json& j);

json to_json(const CenterElement& a);
CenterElement center_from_json(const json& j, const std::string& where);
json to_json(const BlockElement& x);
BlockElement block_element_from_json(const json& j);
json to_json(const CanonicalProjection& r);
CanonicalProjection projection_from_json(const json& j);

/// {"format": "ovf-instance", "space", "hilbert_dim", "values": [{"11": [[re, im], ...], ...}]}
json to_json(const VectorFieldTable& F);
VectorFieldTable field_from_json(const json& j);

json to_json(const FunctionalDensity& d);
FunctionalDensity density_from_json(const json& j, const MeasureSpace& space,
                                    const std::string& where);
json to_json(const StationaryPair& p);
StationaryPair pair_from_json(const json& j);

json to_json(const Witness& w);
json to_json(const CheckRecord& c);
json to_json(const FactorData& f);
json to_json(const AtomDiagnostic& d);
json to_json(const StationarityReport& r);

json to_json(const FactorCoordinates& c);
FactorCoordinates coordinates_from_json(const json& j);
json to_json(const GeneratorSpec& s);
GeneratorSpec generator_spec_from_json(const json& j);

json to_json(const PiecewisePolynomial& p);
PiecewisePolynomial piecewise_from_json(const json& j, const std::string& where);
json to_json(const ScalarFieldProfile& p);
ScalarFieldProfile profile_from_json(const json& j);
json to_json(const LevelReport& l);
json to_json(const ConvergenceReport& r);

}  // namespace ovf::io
