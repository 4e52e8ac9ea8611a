#include <catch_amalgamated.hpp>

#include <cmath>

#include "ovf/errors.hpp"
#include "ovf/serialization.hpp"
#include "support.hpp"

using namespace ovf;
using ovf::io::json;

namespace {

template <class T, class F>
T through_text(const T& value, F&& back) {
  return back(io::parse(io::dump(io::to_json(value))));
}

}  // namespace

TEST_CASE("doubles survive a text round trip exactly") {
  const std::vector<double> xs = {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 1e-17, 0.0};
  for (double x : xs) {
    const json j = io::parse(io::dump(json{{"x", x}}));
    CHECK(j["x"].get<double>() == x);
  }
  CHECK(io::dump(json{{"x", 0.1}}).find("0.10000000000000001") != std::string::npos);
}

TEST_CASE("dump is deterministic and sorts keys") {
  const json a = {{"b", 1}, {"a", {1.5, 2.5}}};
  const std::string s = io::dump(a);
  CHECK(s == io::dump(io::parse(s)));
  CHECK(s.find("\"a\"") < s.find("\"b\""));
}

TEST_CASE("instances round trip bit for bit") {
  const VectorFieldTable F = test::instance(5, 42, true, true);
  const VectorFieldTable G = through_text(F, io::field_from_json);
  CHECK(G.values() == F.values());
  CHECK(G.space() == F.space());
  CHECK(io::dump(io::to_json(G)) == io::dump(io::to_json(F)));
}

TEST_CASE("stationary pairs round trip") {
  const VectorFieldTable F = test::instance(3, 9);
  const StationaryPair p = stationarize(F).pair;
  const StationaryPair q = through_text(p, io::pair_from_json);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(q.phi[k] == p.phi[k]);
    CHECK(q.psi[k] == p.psi[k]);
  }
}

TEST_CASE("projections, specs and profiles round trip") {
  const CanonicalProjection r = CanonicalProjection::rank_one(0.25, std::polar(1.0, 0.3));
  const CanonicalProjection s = through_text(r, io::projection_from_json);
  CHECK(s.pi3 == r.pi3);
  CHECK(s.a == r.a);
  CHECK(s.v == r.v);

  GeneratorSpec spec = make_spec(4, "mixed", 5, true, true);
  Rng rng(3);
  spec.coordinates.resize(4);
  spec.coordinates[1] = FactorCoordinates::sample(rng);
  spec.cases[1] = AtomCase::rank2;
  const GeneratorSpec back = through_text(spec, io::generator_spec_from_json);
  CHECK(assemble(back).values() == assemble(spec).values());

  const ScalarFieldProfile p = test::profile("profile_tent");
  const ScalarFieldProfile p2 = through_text(p, io::profile_from_json);
  for (int i = 0; i <= 20; ++i) {
    const double w = i / 20.0;
    CHECK(p2.rho11(w) == p.rho11(w));
    CHECK(p2.phi12(w) == p.phi12(w));
  }
}

TEST_CASE("malformed documents raise format errors") {
  CHECK_THROWS_AS(io::parse("{\"space\": "), FormatError);
  const json good = io::to_json(test::instance(2, 1));

  json j = good;
  j.erase("values");
  CHECK_THROWS_AS(io::field_from_json(j), FormatError);

  j = good;
  j["format"] = "something-else";
  CHECK_THROWS_AS(io::field_from_json(j), FormatError);

  j = good;
  j["values"][0]["11"][0] = json::array({1.0});
  CHECK_THROWS_AS(io::field_from_json(j), FormatError);

  j = good;
  j["space"]["weights"][0] = -1.0;
  CHECK_THROWS(io::field_from_json(j));

  j = good;
  j["values"].erase(1);
  CHECK_THROWS_AS(io::field_from_json(j), FormatError);

  json prof = io::to_json(test::profile("profile_linear"));
  prof.erase("r12");
  CHECK_THROWS_AS(io::profile_from_json(prof), FormatError);
}

TEST_CASE("reports serialize their verdicts") {
  const VectorFieldTable F = test::instance(2, 3);
  const StationarizeResult r = stationarize(F);
  const json j = io::to_json(r.report);
  CHECK(j.contains("max_abs_residual"));
  CHECK(j["pass"].get<bool>());
  const json a = io::to_json(r.atoms[0]);
  CHECK(a.contains("case"));
  CHECK(a.contains("phi0"));
  CHECK(a["slacks"].size() == 3);
}
