#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include <unistd.h>

#include "ovf/errors.hpp"
#include "ovf/serialization.hpp"

namespace ovf::cli {

using io::json;

namespace {

struct RunConfig {
  std::string command;
  std::string subcommand;
  std::vector<std::string> inputs;
  std::string out;
  std::string report;
  std::string csv;
  // gen
  std::size_t atoms = 0;
  std::string case_tag = "mixed";
  std::optional<double> split;
  bool twist = false;
  bool random_weights = false;
  std::string dim_policy = "direct-sum";
  std::string spec_path;
  // checks
  std::uint64_t seed = 0;
  std::size_t samples = 1000;
  std::size_t trials = 100;
  std::optional<double> tol;
  bool skip_verify = false;
  // refine
  std::vector<int> levels = {2, 4, 8, 16, 32, 64};
  // proj
  double a = 0.5;
  std::string v = "1,0";
  std::string kind = "rank1";
  bool timing = false;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json(const std::string& path) { return io::parse(read_file(path)); }

void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
  } else {
    write_atomic(path, text);
  }
}

json config_echo(const RunConfig& c) {
  json j = {{"inputs", c.inputs}, {"seed", c.seed}};
  if (c.command == "gen") {
    j["atoms"] = c.atoms;
    j["case"] = c.case_tag;
    j["split"] = c.split ? json(*c.split) : json(nullptr);
    j["twist"] = c.twist;
    j["random_weights"] = c.random_weights;
    j["dim_policy"] = c.dim_policy;
  }
  if (c.command == "verify" || c.command == "stationarize") {
    j["samples"] = c.samples;
    j["trials"] = c.trials;
  }
  if (c.command == "stationarize") j["skip_verify"] = c.skip_verify;
  if (c.command == "refine") j["levels"] = c.levels;
  return j;
}

json make_report(const RunConfig& c, double tol, const std::vector<CheckRecord>& checks) {
  json recs = json::array();
  for (const auto& r : checks) recs.push_back(io::to_json(r));
  return {{"command", c.subcommand.empty() ? c.command : c.command + " " + c.subcommand},
          {"config", config_echo(c)},
          {"tolerance", tol},
          {"checks", recs},
          {"pass", all_pass(checks)}};
}

void print_checks(const std::vector<CheckRecord>& checks, std::ostream& out, std::ostream& err) {
  for (const auto& c : checks) {
    out << (c.pass() ? "PASS " : "FAIL ") << std::left << std::setw(58) << c.name << " max "
        << std::scientific << std::setprecision(3) << c.max_residual << " tol " << c.tolerance
        << std::defaultfloat << "\n";
    if (!c.pass() && c.worst) {
      err << "  witness: " << c.worst->identity;
      if (c.worst->atom) err << " at atom " << *c.worst->atom;
      err << "; " << c.worst->detail << " (residual " << c.worst->value << ")\n";
    }
  }
}

cplx parse_complex(const std::string& s) {
  std::stringstream ss(s);
  std::string re, im;
  std::getline(ss, re, ',');
  std::getline(ss, im);
  try {
    return {std::stod(re), im.empty() ? 0.0 : std::stod(im)};
  } catch (const std::exception&) {
    throw UsageError("expected a complex number as 're,im', got '" + s + "'");
  }
}

// --- commands ---------------------------------------------------------------

int cmd_gen(const RunConfig& c, std::ostream& out) {
  VectorFieldTable F;
  if (!c.spec_path.empty()) {
    F = assemble(io::generator_spec_from_json(read_json(c.spec_path)));
  } else {
    if (c.atoms == 0) throw UsageError("--atoms must be at least 1");
    if (c.split && !(*c.split >= 0.0 && *c.split <= 1.0)) {
      throw UsageError("--split must lie in [0, 1]");
    }
    if (c.case_tag == "stationary") {
      Rng rng(c.seed);
      Rng weight_rng = rng.split();
      std::vector<double> weights;
      if (c.random_weights) {
        for (std::size_t k = 0; k < c.atoms; ++k) weights.push_back(weight_rng.uniform(0.25, 2.0));
      }
      GeneratorSpec shape;
      shape.atoms = c.atoms;
      shape.weights = weights;
      Rng pair_rng = rng.split();
      auto [phi, psi] = sample_stationary_pair(shape.space(), pair_rng);
      F = generate_from_stationary_pair(phi, psi);
    } else if (c.case_tag == "rank1" || c.case_tag == "rank2" || c.case_tag == "mixed") {
      F = assemble(make_spec(c.atoms, c.case_tag, c.seed, c.twist, c.random_weights, c.split));
    } else {
      throw UsageError("--case must be rank1, rank2, mixed or stationary");
    }
  }
  if (c.dim_policy == "compact") {
    F = compress_range(F);
  } else if (c.dim_policy != "direct-sum") {
    throw UsageError("--dim-policy must be direct-sum or compact");
  }
  emit(c.out, io::dump(io::to_json(F)), out);
  return kOk;
}

VerifyOptions verify_options(const RunConfig& c) {
  VerifyOptions vo;
  vo.samples = c.samples;
  vo.trials = c.trials;
  vo.seed = c.seed;
  vo.tol = c.tol.value_or(tol::kIdentity);
  return vo;
}

int cmd_verify(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const VectorFieldTable F = io::field_from_json(read_json(c.inputs.at(0)));
  const VerifyOptions vo = verify_options(c);
  std::vector<CheckRecord> checks = verify_orthogonality(F, vo).records();
  for (const auto& r : verify_prop1(F, vo).checks) checks.push_back(r);
  print_checks(checks, out, err);
  if (!c.out.empty()) write_atomic(c.out, io::dump(make_report(c, vo.tol, checks)));
  return all_pass(checks) ? kOk : kViolation;
}

void print_stationarity(const StationarityReport& r, std::ostream& out) {
  out << std::scientific << std::setprecision(3) << (r.pass() ? "PASS" : "FAIL")
      << " stationarity: max residual " << r.max_scaled_residual << " (abs "
      << r.max_abs_residual << ") tol " << r.tolerance << "; sum residual " << r.sum_residual
      << "; min eigenvalues phi " << r.min_eigenvalue_phi << ", psi " << r.min_eigenvalue_psi
      << std::defaultfloat << "\n";
  if (!r.pass() && r.worst) out << "  worst pair: " << r.worst->detail << "\n";
}

int cmd_stationarize(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const VectorFieldTable F = io::field_from_json(read_json(c.inputs.at(0)));
  StationarizeOptions so;
  so.verify_input = !c.skip_verify;
  so.verify = verify_options(c);
  so.verify.tol = tol::kIdentity;
  so.tol = c.tol.value_or(tol::kStationarity);
  so.throw_on_failure = false;
  StationarizeResult res;
  try {
    res = stationarize(F, so);
  } catch (const InconsistentFieldError& e) {
    err << "error: " << e.what() << "\n";
    return kViolation;
  }
  out << "atom  case   diag  phi0                     slack(box)  det(phi)    det(psi)\n";
  for (const auto& a : res.atoms) {
    out << std::left << std::setw(6) << a.atom << std::setw(7)
        << factor_case_name(a.solution.which) << std::setw(6) << (a.diagonalized ? "yes" : "no")
        << std::setw(25) << std::setprecision(17) << a.solution.phi0 << std::scientific
        << std::setprecision(3) << std::setw(12) << a.solution.feasibility.slack[0]
        << std::setw(12) << a.solution.feasibility.slack[1] << a.solution.feasibility.slack[2]
        << std::defaultfloat << "\n";
  }
  print_stationarity(res.report, out);
  if (!c.out.empty()) write_atomic(c.out, io::dump(io::to_json(res.pair)));
  if (!c.report.empty()) {
    json atoms = json::array();
    for (const auto& a : res.atoms) atoms.push_back(io::to_json(a));
    json rep = {{"command", "stationarize"},
                {"config", config_echo(c)},
                {"tolerance", so.tol},
                {"atoms", atoms},
                {"stationarity", io::to_json(res.report)},
                {"pass", res.report.pass()}};
    write_atomic(c.report, io::dump(rep));
  }
  return res.report.pass() ? kOk : kViolation;
}

int cmd_check_pair(const RunConfig& c, std::ostream& out) {
  const VectorFieldTable F = io::field_from_json(read_json(c.inputs.at(0)));
  const StationaryPair pair = io::pair_from_json(read_json(c.inputs.at(1)));
  if (!(pair.phi.space() == F.space())) throw DimensionError("pair and instance spaces differ");
  const StationarityReport r = check_stationarity(F, pair, c.tol.value_or(tol::kStationarity));
  print_stationarity(r, out);
  if (!c.out.empty()) {
    json rep = {{"command", "check-pair"},
                {"config", config_echo(c)},
                {"tolerance", r.tolerance},
                {"stationarity", io::to_json(r)},
                {"pass", r.pass()}};
    write_atomic(c.out, io::dump(rep));
  }
  return r.pass() ? kOk : kViolation;
}

int cmd_roundtrip(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const VectorFieldTable F = io::field_from_json(read_json(c.inputs.at(0)));
  SynthesisOptions so;
  so.seed = c.seed;
  so.trials = c.trials;
  so.tol = c.tol.value_or(tol::kIdentity);
  VectorFieldTable G;
  try {
    G = synthesize(reductions(F), so);
  } catch (const InconsistentFieldError& e) {
    err << "error: " << e.what() << "\n";
    return kViolation;
  }
  CheckRecord exact("synthesize(reductions(F)) = F bit-exactly", 0.0);
  for (std::size_t k = 0; k < F.atoms(); ++k) {
    for (Unit u : kUnits) {
      const double diff = (F.entry(k, u) - G.entry(k, u)).cwiseAbs().maxCoeff();
      const bool same = F.entry(k, u) == G.entry(k, u);
      exact.observe(same ? 0.0 : std::max(diff, 1e-300), [&] {
        return Witness{exact.name, k, "entry " + unit_name(u), 0.0};
      });
    }
  }
  print_checks({exact}, out, err);
  if (!c.out.empty()) write_atomic(c.out, io::dump(io::to_json(G)));
  return exact.pass() ? kOk : kViolation;
}

CanonicalProjection read_projection(const std::string& path) {
  const json j = read_json(path);
  if (j.is_object() && j.contains("pi3")) return io::projection_from_json(j);
  return decompose_projection(io::block_element_from_json(j));
}

int cmd_proj(const RunConfig& c, std::ostream& out) {
  if (c.subcommand == "build") {
    CanonicalProjection r;
    if (!c.inputs.empty()) {
      r = io::projection_from_json(read_json(c.inputs.at(0)));
    } else if (c.kind == "rank1") {
      r = CanonicalProjection::rank_one(c.a, parse_complex(c.v));
    } else if (c.kind == "e11" || c.kind == "e22" || c.kind == "zero" || c.kind == "identity") {
      r = CanonicalProjection::diagonal(c.kind == "e11" || c.kind == "identity",
                                        c.kind == "e22" || c.kind == "identity");
    } else {
      throw UsageError("--kind must be rank1, e11, e22, zero or identity");
    }
    const BlockElement x = materialize(r);
    json j = io::to_json(x);
    j["canonical"] = io::to_json(r);
    j["projection_residual"] = x.projection_residual();
    emit(c.out, io::dump(j), out);
    return kOk;
  }
  if (c.subcommand == "parse") {
    const BlockElement x = io::block_element_from_json(read_json(c.inputs.at(0)));
    const CanonicalProjection r = decompose_projection(x);
    json j = io::to_json(r);
    emit(c.out, io::dump(j), out);
    return kOk;
  }
  if (c.subcommand == "orth") {
    const CanonicalProjection p = read_projection(c.inputs.at(0));
    const CanonicalProjection q = read_projection(c.inputs.at(1));
    const OrthogonalityVerdict v = orthogonality_conditions(p, q);
    const double product = (materialize(p) * materialize(q)).max_abs();
    json j = {{"orthogonal", v.orthogonal}, {"max_abs_pq", product}};
    j["atom"] = v.atom ? json(*v.atom) : json(nullptr);
    j["failed_condition"] = v.failed_condition;
    emit(c.out, io::dump(j), out);
    return v.orthogonal ? kOk : kViolation;
  }
  throw UsageError("proj needs a subcommand: build, parse or orth");
}

int cmd_refine(const RunConfig& c, std::ostream& out) {
  const ScalarFieldProfile p = io::profile_from_json(read_json(c.inputs.at(0)));
  p.validate();
  const ConvergenceReport r = convergence_report(p, c.levels);
  out << "level  cells  sup_error              l1_error               violations\n";
  std::ostringstream csv;
  csv << "level,cells,sup_error,l1_error,bound_violations\n";
  for (const auto& L : r.levels) {
    const std::size_t v = L.bound_violations + L.oscillation_violations + L.domination_violations;
    out << std::left << std::setw(7) << L.level << std::setw(7) << L.cells << std::setprecision(17)
        << std::setw(23) << L.sup_error << std::setw(23) << L.l1_error << v << "\n";
    char line[160];
    std::snprintf(line, sizeof line, "%d,%zu,%.17g,%.17g,%zu\n", L.level, L.cells, L.sup_error,
                  L.l1_error, v);
    csv << line;
  }
  out << (r.pass() ? "PASS" : "FAIL") << " bounds " << (r.bounds_ok() ? "ok" : "violated")
      << ", sup error " << (r.monotone ? "non-increasing" : "increasing") << ", fitted C "
      << r.fitted_constant << "\n";
  if (!c.out.empty()) {
    json rep = {{"command", "refine"},
                {"config", config_echo(c)},
                {"convergence", io::to_json(r)},
                {"pass", r.pass()}};
    write_atomic(c.out, io::dump(rep));
  }
  if (!c.csv.empty()) write_atomic(c.csv, csv.str());
  return r.pass() ? kOk : kViolation;
}

int dispatch(RunConfig& c, std::ostream& out, std::ostream& err) {
  for (const auto& path : {c.out, c.report, c.csv}) {
    if (path.empty() || path == "-") continue;
    if (std::find(c.inputs.begin(), c.inputs.end(), path) != c.inputs.end()) {
      throw UsageError("output path '" + path + "' equals an input path");
    }
  }
  if (c.command == "gen") return cmd_gen(c, out);
  if (c.command == "verify") return cmd_verify(c, out, err);
  if (c.command == "stationarize") return cmd_stationarize(c, out, err);
  if (c.command == "check-pair") return cmd_check_pair(c, out);
  if (c.command == "roundtrip") return cmd_roundtrip(c, out, err);
  if (c.command == "proj") return cmd_proj(c, out);
  if (c.command == "refine") return cmd_refine(c, out);
  throw UsageError("unknown command");
}

}  // namespace

void write_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw FormatError("cannot write '" + tmp.string() + "'");
    f << content;
    f.flush();
    if (!f) throw FormatError("write to '" + tmp.string() + "' failed");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw FormatError("cannot rename onto '" + path + "': " + ec.message());
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig c;
  CLI::App app{"Orthogonal vector fields over 2x2 block algebras", "ovf"};
  app.require_subcommand(1);
  app.add_flag("--timing", c.timing, "Include wall time in the summary (not in output files)");

  auto add_seed = [&](CLI::App* s) { s->add_option("--seed", c.seed, "RNG seed"); };
  auto add_out = [&](CLI::App* s, const char* what) { s->add_option("-o,--out", c.out, what); };
  auto add_tol = [&](CLI::App* s) {
    s->add_option("--tol", c.tol, "Residual tolerance")->check(CLI::PositiveNumber);
  };
  auto add_counts = [&](CLI::App* s) {
    s->add_option("--samples", c.samples, "Sampled orthogonal projection pairs");
    s->add_option("--trials", c.trials, "Random elements per identity");
  };

  auto* gen = app.add_subcommand("gen", "Generate an instance");
  gen->add_option("--atoms", c.atoms, "Number of atoms");
  gen->add_option("--case", c.case_tag, "rank1 | rank2 | mixed | stationary");
  gen->add_option("--split", c.split, "r12 for rank-1 atoms");
  gen->add_flag("--twist", c.twist, "Apply a random unitary twist per atom");
  gen->add_flag("--random-weights", c.random_weights, "Random atom weights");
  gen->add_option("--dim-policy", c.dim_policy, "direct-sum | compact");
  gen->add_option("--spec", c.spec_path, "Generator spec JSON instead of flags");
  add_seed(gen);
  add_out(gen, "Instance path (default stdout)");

  auto* verify = app.add_subcommand("verify", "Run the identity suite on an instance");
  verify->add_option("instance", c.inputs, "Instance JSON")->required()->expected(1);
  add_counts(verify);
  add_seed(verify);
  add_tol(verify);
  add_out(verify, "Report path");

  auto* stat = app.add_subcommand("stationarize", "Compute a stationary pair");
  stat->add_option("instance", c.inputs, "Instance JSON")->required()->expected(1);
  stat->add_flag("--skip-verify", c.skip_verify, "Do not verify the input first");
  stat->add_option("--report", c.report, "Report path");
  add_counts(stat);
  add_seed(stat);
  add_tol(stat);
  add_out(stat, "Pair path");

  auto* check = app.add_subcommand("check-pair", "Check a stationary pair against an instance");
  check->add_option("files", c.inputs, "Instance JSON and pair JSON")->required()->expected(2);
  add_tol(check);
  add_out(check, "Report path");

  auto* rt = app.add_subcommand("roundtrip", "Synthesize from the reductions and compare");
  rt->add_option("instance", c.inputs, "Instance JSON")->required()->expected(1);
  rt->add_option("--trials", c.trials, "Random elements per identity");
  add_seed(rt);
  add_tol(rt);
  add_out(rt, "Synthesized instance path");

  auto* proj = app.add_subcommand("proj", "Canonical projection tools");
  proj->require_subcommand(1);
  auto* build = proj->add_subcommand("build", "Materialize a canonical projection");
  build->add_option("--a", c.a, "Diagonal entry a of p(a, v)");
  build->add_option("--v", c.v, "Phase v as 're,im'");
  build->add_option("--kind", c.kind, "rank1 | e11 | e22 | zero | identity");
  build->add_option("--in", c.inputs, "Canonical projection JSON")->expected(1);
  add_out(build, "Output path");
  auto* parse = proj->add_subcommand("parse", "Decompose a projection into canonical form");
  parse->add_option("element", c.inputs, "Element JSON")->required()->expected(1);
  add_out(parse, "Output path");
  auto* orth = proj->add_subcommand("orth", "Check the orthogonality conditions");
  orth->add_option("files", c.inputs, "Two projection JSON files")->required()->expected(2);
  add_out(orth, "Output path");

  auto* refine = app.add_subcommand("refine", "Level-set refinement convergence report");
  refine->add_option("profile", c.inputs, "Profile JSON")->required()->expected(1);
  refine->add_option("--levels", c.levels, "Refinement levels")->delimiter(',');
  refine->add_option("--csv", c.csv, "CSV table path");
  add_out(refine, "Report path");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kBadInput;
  }
  for (auto* s : app.get_subcommands()) {
    c.command = s->get_name();
    for (auto* ss : s->get_subcommands()) c.subcommand = ss->get_name();
  }

  const auto start = std::chrono::steady_clock::now();
  int code = kBadInput;
  try {
    code = dispatch(c, out, err);
  } catch (const UsageError& e) {
    err << "config error: " << e.what() << "\n";
    return kBadInput;
  } catch (const InconsistentFieldError& e) {
    err << "error: " << e.what() << "\n";
    return kViolation;
  } catch (const FormatError& e) {
    err << "malformed input: " << e.what() << "\n";
    return kBadInput;
  } catch (const DomainError& e) {
    err << "invalid input: " << e.what() << "\n";
    return kBadInput;
  } catch (const std::invalid_argument& e) {  // ConstructionError, DimensionError
    err << "invalid input: " << e.what() << "\n";
    return kBadInput;
  } catch (const std::out_of_range& e) {
    err << "invalid input: " << e.what() << "\n";
    return kBadInput;
  }
  if (c.timing) {
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start;
    err << "wall time " << dt.count() << " s\n";
  }
  return code;
}

}  // namespace ovf::cli
