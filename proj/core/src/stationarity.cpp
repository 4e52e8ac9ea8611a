#include "ovf/stationarity.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ovf/errors.hpp"

namespace ovf {

double phi0(double r21, double rho22, double phi12_abs) {
  const double d = r21 - rho22;
  const double c2 = phi12_abs * phi12_abs;
  const double s = std::sqrt(d * d + 4.0 * c2);
  // Avoid cancellation for d < 0.
  return d >= 0.0 ? 0.5 * (d + s) : (s - d > 0.0 ? 2.0 * c2 / (s - d) : 0.0);
}

double FactorData::sum_rule_residual() const { return r12 + r21 - rho11 - rho22; }

double FactorData::estimate_slack() const {
  const double t = trace();
  return r12 * r21 * rho11 * rho22 - std::norm(phi12) * t * t;
}

bool Feasibility::holds(double tol) const {
  return std::all_of(slack.begin(), slack.end(), [tol](double s) { return s >= -tol; });
}

Feasibility check_feasibility(const FactorData& f, double phi) {
  Feasibility out;
  const double lower = std::max(0.0, f.r21 - f.rho22);
  const double upper = std::min(f.rho11, f.r21);
  out.slack[0] = std::min(phi - lower, upper - phi);
  out.slack[1] = phi * (phi + f.rho22 - f.r21) - std::norm(f.phi12);
  out.slack[2] = (f.rho11 - phi) * (f.r21 - phi) - std::norm(f.rho12 - f.phi12);
  return out;
}

std::string factor_case_name(FactorCase c) { return c == FactorCase::rank1 ? "rank1" : "rank2"; }

namespace {

FactorCase classify(const FactorData& f) {
  const double t = std::max(0.0, f.trace());
  return std::min(f.rho11, f.rho22) <= tol::kRankCliff * t ? FactorCase::rank1
                                                           : FactorCase::rank2;
}

// Slack tolerance: box slack scales like the trace, the quadratic ones like its square.
bool feasible_within(const Feasibility& fe, double trace) {
  const double t = std::max(trace, 1e-300);
  return fe.slack[0] >= -tol::kSlack * t && fe.slack[1] >= -tol::kSlack * t * t &&
         fe.slack[2] >= -tol::kSlack * t * t;
}

}  // namespace

FactorSolution stationarize_factor(const FactorData& f) {
  FactorSolution sol;
  sol.which = classify(f);
  Block phi = Block::Zero(), psi = Block::Zero();
  if (sol.which == FactorCase::rank1) {
    sol.phi0 = f.r21;
    phi(0, 0) = f.r21;
    psi(0, 0) = f.r12;
  } else {
    sol.phi0 = phi0(f.r21, f.rho22, std::abs(f.phi12));
    phi(0, 0) = sol.phi0;
    phi(0, 1) = f.phi12;
    phi(1, 0) = std::conj(f.phi12);
    phi(1, 1) = sol.phi0 + f.rho22 - f.r21;
    psi(0, 0) = f.rho11 - sol.phi0;
    psi(0, 1) = f.rho12 - f.phi12;
    psi(1, 0) = std::conj(f.rho12 - f.phi12);
    psi(1, 1) = f.r21 - sol.phi0;
  }
  sol.feasibility = check_feasibility(f, sol.phi0);
  if (!feasible_within(sol.feasibility, f.trace())) {
    std::ostringstream s;
    s << "factor solution infeasible (" << factor_case_name(sol.which) << ", phi0 = " << sol.phi0
      << ", slacks " << sol.feasibility.slack[0] << ", " << sol.feasibility.slack[1] << ", "
      << sol.feasibility.slack[2] << "); data do not come from an orthogonal vector field";
    throw InconsistentFieldError(s.str());
  }
  const Block& u = f.basis_unitary;
  sol.phi = u * phi * u.adjoint();
  sol.psi = u * psi * u.adjoint();
  return sol;
}

std::pair<Eigen::Vector2d, Block> diagonalize_hermitian(const Block& h) {
  const Block herm = 0.5 * (h + h.adjoint());
  Eigen::SelfAdjointEigenSolver<Block> es(herm);
  Eigen::Vector2d values(es.eigenvalues()(1), es.eigenvalues()(0));
  Block vectors;
  vectors.col(0) = es.eigenvectors().col(1);
  vectors.col(1) = es.eigenvectors().col(0);
  for (int c = 0; c < 2; ++c) {
    const int lead = std::abs(vectors(0, c)) > 1e-15 ? 0 : 1;
    const cplx z = vectors(lead, c);
    if (std::abs(z) > 0.0) vectors.col(c) *= std::conj(z) / std::abs(z);
  }
  return {values, vectors};
}

VectorFieldTable twist_field(const VectorFieldTable& F, const std::vector<Block>& unitaries) {
  if (unitaries.size() != F.atoms()) throw DimensionError("twist_field: one unitary per atom");
  Matrix values = F.values();
  for (std::size_t k = 0; k < F.atoms(); ++k) {
    const Block& u = unitaries[k];
    for (Unit ij : kUnits) {
      Vector acc = Vector::Zero(F.hilbert_dim());
      for (Unit mn : kUnits) {
        acc += u(row_of(mn), row_of(ij)) * std::conj(u(col_of(mn), col_of(ij))) *
               F.values().col(VectorFieldTable::column(k, mn));
      }
      values.col(VectorFieldTable::column(k, ij)) = acc;
    }
  }
  return VectorFieldTable(F.space(), std::move(values));
}

std::vector<FactorData> harvest_factor_data(const VectorFieldTable& F) {
  const DensityReport dens = r_densities(F);
  const CenterFieldTable f21 = reduction(F, Unit::e21);
  const Vector f22_one = reduction(F, Unit::e22).at_unit();
  std::vector<FactorData> out(F.atoms());
  for (std::size_t k = 0; k < F.atoms(); ++k) {
    FactorData& d = out[k];
    const Block& rho = dens.rho[k];
    d.rho11 = rho(0, 0).real();
    d.rho22 = rho(1, 1).real();
    d.rho12 = rho(0, 1);
    d.r12 = dens.r[k][slot(Unit::e12)];
    d.r21 = dens.r[k][slot(Unit::e21)];
    d.phi12 = inner(f21.at_atom(k), f22_one) / F.space().weight(k);
  }
  return out;
}

bool StationarityReport::pass() const {
  return max_scaled_residual <= tolerance && sum_residual <= tolerance &&
         min_eigenvalue_phi >= tol::kPsdFloor && min_eigenvalue_psi >= tol::kPsdFloor;
}

StationarityReport check_stationarity(const VectorFieldTable& F, const StationaryPair& pair,
                                      double tol) {
  if (!(pair.phi.space() == F.space()) || !(pair.psi.space() == F.space())) {
    throw DimensionError("check_stationarity: pair and field live on different spaces");
  }
  StationarityReport rep;
  rep.tolerance = tol;
  const double S = F.scale();
  const double scale = std::max(1.0, S * S);
  const Matrix gram = F.values().adjoint() * F.values();  // gram(y, x) = <F(x), F(y)>
  const std::size_t n = F.atoms();
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t l = 0; l < n; ++l) {
      const double nu = F.space().weight(k);
      for (Unit x : kUnits) {
        for (Unit y : kUnits) {
          cplx rhs = 0.0;
          if (k == l) {
            const int i = row_of(x), j = col_of(x), m = row_of(y), nn = col_of(y);
            if (m == i) rhs += nu * pair.phi[k](j, nn);
            if (j == nn) rhs += nu * pair.psi[k](m, i);
          }
          const cplx lhs =
              gram(VectorFieldTable::column(l, y), VectorFieldTable::column(k, x));
          const double r = std::abs(lhs - rhs);
          ++rep.pairs;
          if (!rep.worst || r > rep.max_abs_residual) {
            rep.max_abs_residual = r;
            std::ostringstream d;
            d << "x = pi_" << F.space().id(k) << " e" << unit_name(x) << ", y = pi_"
              << F.space().id(l) << " e" << unit_name(y) << ": <F(x),F(y)> = " << lhs
              << ", phi(y*x) + psi(xy*) = " << rhs;
            rep.worst = Witness{"<F(x),F(y)> = phi(y*x) + psi(xy*)", k, d.str(), r};
          }
        }
      }
    }
  }
  rep.max_scaled_residual = rep.max_abs_residual / scale;

  const FunctionalDensity rho = rho_functional(F);
  for (std::size_t k = 0; k < n; ++k) {
    rep.sum_residual = std::max(
        rep.sum_residual, (pair.phi[k] + pair.psi[k] - rho[k]).cwiseAbs().maxCoeff() / scale);
  }
  if (n > 0) {
    const auto rel_min = [&](const FunctionalDensity& d) {
      double m = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        const double s = std::max(1.0, d[k].cwiseAbs().maxCoeff());
        m = std::min(m, d.min_eigenvalue(k) / s);
      }
      return m;
    };
    rep.min_eigenvalue_phi = rel_min(pair.phi);
    rep.min_eigenvalue_psi = rel_min(pair.psi);
  }
  return rep;
}

namespace {

void require(const std::vector<CheckRecord>& records, const std::string& stage) {
  for (const CheckRecord& c : records) {
    if (c.pass()) continue;
    std::ostringstream s;
    s << "stationarize: input fails " << stage << " check '" << c.name << "' (residual "
      << c.max_residual << " > " << c.tolerance << ")";
    if (c.worst) {
      if (c.worst->atom) s << " at atom " << *c.worst->atom;
      s << ": " << c.worst->detail;
    }
    throw InconsistentFieldError(s.str());
  }
}

}  // namespace

StationarizeResult stationarize(const VectorFieldTable& F, const StationarizeOptions& options) {
  if (options.verify_input) {
    require(verify_orthogonality(F, options.verify).records(), "orthogonality");
    require(verify_prop1(F, options.verify).checks, "identity");
  }
  const std::size_t n = F.atoms();
  const DensityReport dens = r_densities(F);

  std::vector<Block> unitaries(n, Block::Identity());
  std::vector<bool> rotated(n, false);
  for (std::size_t k = 0; k < n; ++k) {
    const Block& rho = dens.rho[k];
    const double t = std::max(0.0, rho.trace().real());
    const double r11 = rho(0, 0).real(), r22 = rho(1, 1).real();
    const bool offdiag = std::abs(rho(0, 1)) > tol::kRankCliff * t;
    const bool swap = std::min(r11, r22) <= tol::kRankCliff * t && r22 > r11;
    if (offdiag || swap) {
      unitaries[k] = diagonalize_hermitian(rho).second;
      rotated[k] = true;
    }
  }
  const bool any_rotated = std::find(rotated.begin(), rotated.end(), true) != rotated.end();
  const std::vector<FactorData> data =
      harvest_factor_data(any_rotated ? twist_field(F, unitaries) : F);

  StationarizeResult result;
  std::vector<Block> phi(n), psi(n);
  for (std::size_t k = 0; k < n; ++k) {
    AtomDiagnostic diag;
    diag.atom = k;
    diag.diagonalized = rotated[k];
    diag.data = data[k];
    diag.data.basis_unitary = unitaries[k];
    try {
      diag.solution = stationarize_factor(diag.data);
    } catch (const InconsistentFieldError& e) {
      throw InconsistentFieldError("atom " + F.space().id(k) + ": " + e.what());
    }
    phi[k] = diag.solution.phi;
    psi[k] = diag.solution.psi;
    result.atoms.push_back(std::move(diag));
  }
  result.pair = {FunctionalDensity(F.space(), std::move(phi)),
                 FunctionalDensity(F.space(), std::move(psi))};
  result.report = check_stationarity(F, result.pair, options.tol);
  if (options.throw_on_failure && !result.report.pass()) {
    std::ostringstream s;
    s << "stationarize: final pair fails verification (max residual "
      << result.report.max_scaled_residual << ", sum residual " << result.report.sum_residual
      << ", min eigenvalues " << result.report.min_eigenvalue_phi << " / "
      << result.report.min_eigenvalue_psi << ")";
    if (result.report.worst) s << "; worst pair " << result.report.worst->detail;
    throw InconsistentFieldError(s.str());
  }
  return result;
}

GridOracle grid_oracle(const FactorData& f, double step) {
  GridOracle g;
  g.lo = std::max(0.0, f.r21 - f.rho22);
  g.hi = std::min(f.rho11, f.r21);
  g.step = step;
  const double t = std::max(f.trace(), 1e-300);
  const double slack_tol = 2.0 * t * step;
  const double p0 = phi0(f.r21, f.rho22, std::abs(f.phi12));
  if (g.hi < g.lo) return g;
  g.points = static_cast<std::size_t>(std::floor((g.hi - g.lo) / step)) + 2;
  for (std::size_t i = 0; i < g.points; ++i) {
    const double phi = i + 1 == g.points ? g.hi : g.lo + static_cast<double>(i) * step;
    const Feasibility fe = check_feasibility(f, phi);
    const bool ok = fe.slack[0] >= -tol::kSlack * t && fe.slack[1] >= -slack_tol * t &&
                    fe.slack[2] >= -slack_tol * t;
    if (!ok) continue;
    ++g.feasible;
    if (!g.first_feasible) g.first_feasible = phi;
    g.last_feasible = phi;
    if (std::abs(phi - p0) <= step * (1.0 + 1e-9)) g.contains_phi0 = true;
  }
  return g;
}

}  // namespace ovf
