#include "ovf/serialization.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "ovf/errors.hpp"

namespace ovf::io {

namespace {

void write_number(std::ostringstream& os, double v) {
  if (!std::isfinite(v)) {
    os << "null";
    return;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v == 0.0 ? 0.0 : v);  // no "-0"
  os << buf;
}

bool is_scalar_array(const json& j) {
  for (const auto& e : j) {
    if (e.is_array() || e.is_object()) return false;
  }
  return true;
}

// Arrays of scalars (and arrays of those) stay on one line.
bool is_flat(const json& j) {
  if (!j.is_array()) return !j.is_object();
  for (const auto& e : j) {
    if (e.is_object()) return false;
    if (e.is_array() && !is_scalar_array(e)) return false;
  }
  return true;
}

void write(std::ostringstream& os, const json& j, int indent) {
  const std::string pad(static_cast<std::size_t>(indent), ' ');
  const std::string inner_pad(static_cast<std::size_t>(indent + 2), ' ');
  switch (j.type()) {
    case json::value_t::null: os << "null"; break;
    case json::value_t::boolean: os << (j.get<bool>() ? "true" : "false"); break;
    case json::value_t::number_integer: os << j.get<std::int64_t>(); break;
    case json::value_t::number_unsigned: os << j.get<std::uint64_t>(); break;
    case json::value_t::number_float: write_number(os, j.get<double>()); break;
    case json::value_t::string: os << json(j.get<std::string>()).dump(); break;
    case json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        break;
      }
      if (is_flat(j)) {
        os << "[";
        bool first = true;
        for (const auto& e : j) {
          if (!first) os << ", ";
          first = false;
          write(os, e, indent);
        }
        os << "]";
        break;
      }
      os << "[\n";
      bool first = true;
      for (const auto& e : j) {
        if (!first) os << ",\n";
        first = false;
        os << inner_pad;
        write(os, e, indent + 2);
      }
      os << "\n" << pad << "]";
      break;
    }
    case json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        break;
      }
      os << "{\n";
      bool first = true;
      for (const auto& [k, v] : j.items()) {  // nlohmann objects iterate in key order
        if (!first) os << ",\n";
        first = false;
        os << inner_pad << json(k).dump() << ": ";
        write(os, v, indent + 2);
      }
      os << "\n" << pad << "}";
      break;
    }
    default: throw FormatError("unsupported JSON value");
  }
}

const json& field(const json& j, const char* key, const std::string& where) {
  if (!j.is_object()) throw FormatError(where + ": expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw FormatError(where + ": missing key '" + key + "'");
  return *it;
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) throw FormatError(where + ": expected a number");
  return j.get<double>();
}

const json& array(const json& j, const std::string& where) {
  if (!j.is_array()) throw FormatError(where + ": expected an array");
  return j;
}

std::vector<double> numbers(const json& j, const std::string& where) {
  std::vector<double> out;
  for (std::size_t i = 0; i < array(j, where).size(); ++i) {
    out.push_back(number(j[i], where + "[" + std::to_string(i) + "]"));
  }
  return out;
}

std::vector<Block> blocks_from(const json& j, std::size_t n, const std::string& where) {
  array(j, where);
  if (j.size() != n) {
    throw FormatError(where + ": expected " + std::to_string(n) + " blocks, got " +
                      std::to_string(j.size()));
  }
  std::vector<Block> out;
  for (std::size_t k = 0; k < n; ++k) {
    out.push_back(block_from_json(j[k], where + "[" + std::to_string(k) + "]"));
  }
  return out;
}

template <class F>
auto wrap(const char* what, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const FormatError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string(what) + ": " + e.what());
  } catch (const json::exception& e) {
    throw FormatError(std::string(what) + ": " + e.what());
  }
}

// The tag is optional (hand-written files may omit it) but must match if present.
void check_format(const json& j, const char* expected, const std::string& where) {
  if (!j.is_object()) throw FormatError(where + ": expected an object");
  const auto it = j.find("format");
  if (it != j.end() && (!it->is_string() || it->get<std::string>() != expected)) {
    throw FormatError(where + ".format: expected \"" + std::string(expected) + "\"");
  }
}

}  // namespace

std::string dump(const json& j) {
  std::ostringstream os;
  write(os, j, 0);
  os << "\n";
  return os.str();
}

json parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("malformed JSON: ") + e.what());
  }
}

// --- scalars and blocks ---------------------------------------------------

json to_json(cplx z) { return json::array({z.real(), z.imag()}); }

cplx complex_from_json(const json& j, const std::string& where) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (!j.is_array() || j.size() != 2) throw FormatError(where + ": expected [re, im]");
  return {number(j[0], where + ".re"), number(j[1], where + ".im")};
}

json to_json(const Block& b) {
  return json::array({json::array({to_json(b(0, 0)), to_json(b(0, 1))}),
                      json::array({to_json(b(1, 0)), to_json(b(1, 1))})});
}

Block block_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_array() || !j[1].is_array() ||
      j[0].size() != 2 || j[1].size() != 2) {
    throw FormatError(where + ": expected a 2x2 matrix");
  }
  Block b;
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 2; ++c) {
      b(r, c) = complex_from_json(j[r][c], where + "[" + std::to_string(r) + "][" +
                                               std::to_string(c) + "]");
    }
  }
  return b;
}

json to_json(const MeasureSpace& s) {
  json ids = json::array();
  for (const auto& id : s.ids()) ids.push_back(id);
  json w = json::array();
  for (double x : s.weights()) w.push_back(x);
  return {{"atoms", ids}, {"weights", w}};
}

MeasureSpace space_from_json(const json& j) {
  return wrap("space", [&] {
    const json& atoms = array(field(j, "atoms", "space"), "space.atoms");
    std::vector<std::string> ids;
    for (const auto& a : atoms) {
      if (!a.is_string()) throw FormatError("space.atoms: expected strings");
      ids.push_back(a.get<std::string>());
    }
    return MeasureSpace(std::move(ids), numbers(field(j, "weights", "space"), "space.weights"));
  });
}

json to_json(const CenterElement& a) {
  json out = json::array();
  for (cplx z : a.values()) out.push_back(to_json(z));
  return out;
}

CenterElement center_from_json(const json& j, const std::string& where) {
  std::vector<cplx> v;
  for (std::size_t i = 0; i < array(j, where).size(); ++i) {
    v.push_back(complex_from_json(j[i], where + "[" + std::to_string(i) + "]"));
  }
  return CenterElement(std::move(v));
}

json to_json(const BlockElement& x) {
  json blocks = json::array();
  for (const Block& b : x.blocks()) blocks.push_back(to_json(b));
  return {{"blocks", blocks}};
}

BlockElement block_element_from_json(const json& j) {
  const json& b = array(field(j, "blocks", "element"), "element.blocks");
  return BlockElement(blocks_from(b, b.size(), "element.blocks"));
}

json to_json(const CanonicalProjection& r) {
  json a = json::array();
  for (cplx z : r.a.values()) a.push_back(z.real());
  return {{"pi1", to_json(r.pi1)}, {"pi2", to_json(r.pi2)}, {"pi3", to_json(r.pi3)},
          {"a", a},                {"v", to_json(r.v)}};
}

CanonicalProjection projection_from_json(const json& j) {
  return wrap("projection", [&] {
    CanonicalProjection r;
    r.pi1 = center_from_json(field(j, "pi1", "projection"), "projection.pi1");
    r.pi2 = center_from_json(field(j, "pi2", "projection"), "projection.pi2");
    r.pi3 = center_from_json(field(j, "pi3", "projection"), "projection.pi3");
    r.a = center_from_json(field(j, "a", "projection"), "projection.a");
    r.v = center_from_json(field(j, "v", "projection"), "projection.v");
    return r;
  });
}

// --- fields ---------------------------------------------------------------

json to_json(const VectorFieldTable& F) {
  json values = json::array();
  for (std::size_t k = 0; k < F.atoms(); ++k) {
    json atom = json::object();
    for (Unit u : kUnits) {
      json v = json::array();
      const Vector col = F.entry(k, u);
      for (Eigen::Index i = 0; i < col.size(); ++i) v.push_back(to_json(col(i)));
      atom[unit_name(u)] = v;
    }
    values.push_back(atom);
  }
  return {{"format", "ovf-instance"},
          {"space", to_json(F.space())},
          {"hilbert_dim", F.hilbert_dim()},
          {"values", values}};
}

VectorFieldTable field_from_json(const json& j) {
  return wrap("instance", [&] {
    check_format(j, "ovf-instance", "instance");
    const MeasureSpace space = space_from_json(field(j, "space", "instance"));
    const json& hd = field(j, "hilbert_dim", "instance");
    if (!hd.is_number_integer() || hd.get<long long>() < 0) {
      throw FormatError("instance.hilbert_dim: expected a nonnegative integer");
    }
    const auto dim = static_cast<Eigen::Index>(hd.get<long long>());
    const json& values = array(field(j, "values", "instance"), "instance.values");
    if (values.size() != space.size()) {
      throw FormatError("instance.values: expected one entry per atom");
    }
    Matrix m(dim, static_cast<Eigen::Index>(4 * space.size()));
    for (std::size_t k = 0; k < space.size(); ++k) {
      const std::string where = "instance.values[" + std::to_string(k) + "]";
      for (Unit u : kUnits) {
        const std::string w = where + "." + unit_name(u);
        const json& v = array(field(values[k], unit_name(u).c_str(), where), w);
        if (static_cast<Eigen::Index>(v.size()) != dim) {
          throw FormatError(w + ": expected " + std::to_string(dim) + " components");
        }
        for (Eigen::Index i = 0; i < dim; ++i) {
          m(i, VectorFieldTable::column(k, u)) =
              complex_from_json(v[static_cast<std::size_t>(i)], w);
        }
      }
    }
    return VectorFieldTable(space, std::move(m));
  });
}

json to_json(const FunctionalDensity& d) {
  json blocks = json::array();
  for (const Block& b : d.densities()) blocks.push_back(to_json(b));
  return blocks;
}

FunctionalDensity density_from_json(const json& j, const MeasureSpace& space,
                                    const std::string& where) {
  return FunctionalDensity(space, blocks_from(j, space.size(), where));
}

json to_json(const StationaryPair& p) {
  return {{"format", "ovf-stationary-pair"},
          {"space", to_json(p.phi.space())},
          {"phi", to_json(p.phi)},
          {"psi", to_json(p.psi)}};
}

StationaryPair pair_from_json(const json& j) {
  return wrap("pair", [&] {
    check_format(j, "ovf-stationary-pair", "pair");
    const MeasureSpace space = space_from_json(field(j, "space", "pair"));
    return StationaryPair{density_from_json(field(j, "phi", "pair"), space, "pair.phi"),
                          density_from_json(field(j, "psi", "pair"), space, "pair.psi")};
  });
}

// --- reports --------------------------------------------------------------

json to_json(const Witness& w) {
  json out = {{"identity", w.identity}, {"detail", w.detail}, {"value", w.value}};
  out["atom"] = w.atom ? json(*w.atom) : json(nullptr);
  return out;
}

json to_json(const CheckRecord& c) {
  json out = {{"name", c.name},
              {"tolerance", c.tolerance},
              {"max_residual", c.max_residual},
              {"evaluations", c.evaluations},
              {"failures", c.failures},
              {"pass", c.pass()}};
  out["witness"] = c.worst ? to_json(*c.worst) : json(nullptr);
  return out;
}

json to_json(const FactorData& f) {
  return {{"rho11", f.rho11}, {"rho22", f.rho22}, {"rho12", to_json(f.rho12)},
          {"r12", f.r12},     {"r21", f.r21},     {"phi12", to_json(f.phi12)},
          {"basis_unitary", to_json(f.basis_unitary)}};
}

json to_json(const AtomDiagnostic& d) {
  return {{"atom", d.atom},
          {"case", factor_case_name(d.solution.which)},
          {"diagonalized", d.diagonalized},
          {"phi0", d.solution.phi0},
          {"slacks", json::array({d.solution.feasibility.slack[0],
                                  d.solution.feasibility.slack[1],
                                  d.solution.feasibility.slack[2]})},
          {"data", to_json(d.data)}};
}

json to_json(const StationarityReport& r) {
  json out = {{"max_abs_residual", r.max_abs_residual},
              {"max_scaled_residual", r.max_scaled_residual},
              {"tolerance", r.tolerance},
              {"sum_residual", r.sum_residual},
              {"min_eigenvalue_phi", r.min_eigenvalue_phi},
              {"min_eigenvalue_psi", r.min_eigenvalue_psi},
              {"psd_floor", tol::kPsdFloor},
              {"pairs", r.pairs},
              {"pass", r.pass()}};
  out["witness"] = r.worst ? to_json(*r.worst) : json(nullptr);
  return out;
}

// --- generator specs ------------------------------------------------------

json to_json(const FactorCoordinates& c) {
  return {{"alpha", c.alpha}, {"omega", to_json(c.omega)}, {"xi", to_json(c.xi)},
          {"xi3", to_json(c.xi3)}, {"xi4", to_json(c.xi4)}, {"eta3", to_json(c.eta3)},
          {"eta4", to_json(c.eta4)}};
}

FactorCoordinates coordinates_from_json(const json& j) {
  const std::string w = "coordinates";
  FactorCoordinates c;
  c.alpha = number(field(j, "alpha", w), w + ".alpha");
  c.omega = complex_from_json(field(j, "omega", w), w + ".omega");
  c.xi = complex_from_json(field(j, "xi", w), w + ".xi");
  c.xi3 = complex_from_json(field(j, "xi3", w), w + ".xi3");
  c.xi4 = complex_from_json(field(j, "xi4", w), w + ".xi4");
  c.eta3 = complex_from_json(field(j, "eta3", w), w + ".eta3");
  c.eta4 = complex_from_json(field(j, "eta4", w), w + ".eta4");
  return c;
}

json to_json(const GeneratorSpec& s) {
  json cases = json::array(), twists = json::array(), coords = json::array();
  for (AtomCase c : s.cases) cases.push_back(case_name(c));
  for (const auto& t : s.twists) twists.push_back(t ? to_json(*t) : json(nullptr));
  for (const auto& c : s.coordinates) coords.push_back(c ? to_json(*c) : json(nullptr));
  return {{"atoms", s.atoms},   {"cases", cases},     {"seed", s.seed},
          {"twists", twists},   {"splits", s.splits}, {"weights", s.weights},
          {"coordinates", coords}};
}

GeneratorSpec generator_spec_from_json(const json& j) {
  return wrap("generator spec", [&] {
    const std::string w = "spec";
    GeneratorSpec s;
    const json& atoms = field(j, "atoms", w);
    if (!atoms.is_number_unsigned()) throw FormatError("spec.atoms: expected a count");
    s.atoms = atoms.get<std::size_t>();
    for (const auto& c : array(field(j, "cases", w), "spec.cases")) {
      if (!c.is_string()) throw FormatError("spec.cases: expected strings");
      s.cases.push_back(parse_case(c.get<std::string>()));
    }
    if (j.contains("seed")) {
      if (!j["seed"].is_number_unsigned()) throw FormatError("spec.seed: expected an unsigned integer");
      s.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("twists")) {
      for (const auto& t : array(j["twists"], "spec.twists")) {
        s.twists.push_back(t.is_null() ? std::optional<Block>()
                                       : std::optional<Block>(block_from_json(t, "spec.twists")));
      }
    }
    if (j.contains("splits")) s.splits = numbers(j["splits"], "spec.splits");
    if (j.contains("weights")) s.weights = numbers(j["weights"], "spec.weights");
    if (j.contains("coordinates")) {
      for (const auto& c : array(j["coordinates"], "spec.coordinates")) {
        s.coordinates.push_back(c.is_null() ? std::optional<FactorCoordinates>()
                                            : std::optional(coordinates_from_json(c)));
      }
    }
    return s;
  });
}

// --- profiles -------------------------------------------------------------

json to_json(const PiecewisePolynomial& p) {
  return {{"breakpoints", p.breaks()}, {"coefficients", p.coeffs()}};
}

PiecewisePolynomial piecewise_from_json(const json& j, const std::string& where) {
  std::vector<std::vector<double>> coeffs;
  const json& c = array(field(j, "coefficients", where), where + ".coefficients");
  for (std::size_t i = 0; i < c.size(); ++i) {
    coeffs.push_back(numbers(c[i], where + ".coefficients[" + std::to_string(i) + "]"));
  }
  return PiecewisePolynomial(numbers(field(j, "breakpoints", where), where + ".breakpoints"),
                             std::move(coeffs));
}

json to_json(const ScalarFieldProfile& p) {
  return {{"rho11", to_json(p.rho11)},
          {"rho22", to_json(p.rho22)},
          {"r21", to_json(p.r21)},
          {"r12", to_json(p.r12)},
          {"phi12",
           {{"breakpoints", p.phi12.modulus.breaks()},
            {"modulus", p.phi12.modulus.coeffs()},
            {"phase", p.phi12.phase}}}};
}

ScalarFieldProfile profile_from_json(const json& j) {
  return wrap("profile", [&] {
    ScalarFieldProfile p;
    p.rho11 = piecewise_from_json(field(j, "rho11", "profile"), "profile.rho11");
    p.rho22 = piecewise_from_json(field(j, "rho22", "profile"), "profile.rho22");
    p.r21 = piecewise_from_json(field(j, "r21", "profile"), "profile.r21");
    p.r12 = piecewise_from_json(field(j, "r12", "profile"), "profile.r12");
    const json& f = field(j, "phi12", "profile");
    json mod = {{"breakpoints", field(f, "breakpoints", "profile.phi12")},
                {"coefficients", field(f, "modulus", "profile.phi12")}};
    p.phi12.modulus = piecewise_from_json(mod, "profile.phi12");
    if (f.contains("phase")) {
      p.phi12.phase = numbers(f["phase"], "profile.phi12.phase");
    } else {
      p.phi12.phase.assign(p.phi12.modulus.pieces(), 0.0);
    }
    return p;
  });
}

json to_json(const LevelReport& l) {
  return {{"level", l.level},
          {"cells", l.cells},
          {"sup_error", l.sup_error},
          {"l1_error", l.l1_error},
          {"bound_violations", l.bound_violations},
          {"oscillation_violations", l.oscillation_violations},
          {"domination_violations", l.domination_violations},
          {"measure_defect", l.measure_defect}};
}

json to_json(const ConvergenceReport& r) {
  json levels = json::array();
  for (const auto& l : r.levels) levels.push_back(to_json(l));
  return {{"levels", levels},
          {"limit_infeasible", r.limit_infeasible},
          {"integral_limit", r.integral_limit},
          {"integral_dominant", r.integral_dominant},
          {"monotone", r.monotone},
          {"fitted_constant", r.fitted_constant},
          {"rate_within_factor3", r.rate_within_factor3},
          {"bounds_ok", r.bounds_ok()},
          {"pass", r.pass()}};
}

}  // namespace ovf::io
