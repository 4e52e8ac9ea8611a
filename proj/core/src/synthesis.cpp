#include "ovf/synthesis.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "ovf/errors.hpp"

namespace ovf {

// --- synthesis ------------------------------------------------------------

VectorFieldTable synthesize(const ReductionSet& R, const SynthesisOptions& options) {
  const MeasureSpace& space = R.space();
  const Eigen::Index dim = R[Unit::e11].hilbert_dim();
  for (Unit u : kUnits) {
    if (!(R[u].space() == space)) {
      throw DimensionError("synthesize: table F" + unit_name(u) + " has a different measure space");
    }
    if (R[u].hilbert_dim() != dim) {
      throw DimensionError("synthesize: table F" + unit_name(u) + " has Hilbert dimension " +
                           std::to_string(R[u].hilbert_dim()) + ", expected " +
                           std::to_string(dim));
    }
  }
  if (options.check) {
    VerifyOptions vo;
    vo.tol = options.tol;
    vo.trials = options.trials;
    vo.seed = options.seed;
    const IdentityReport rep = verify_reduction_identities(R, vo, true);
    std::ostringstream msg;
    std::size_t failed = 0;
    for (const CheckRecord& c : rep.checks) {
      if (c.pass()) continue;
      msg << (failed++ == 0 ? "synthesize: " : "; ") << "identity " << c.name << " fails";
      if (c.worst) {
        if (c.worst->atom) msg << " at atom " << space.id(*c.worst->atom);
        msg << " (" << c.worst->detail << ")";
      }
      msg << ", residual " << c.max_residual << " > " << c.tolerance;
    }
    if (failed > 0) throw InconsistentFieldError(msg.str());
  }
  Matrix values(dim, static_cast<Eigen::Index>(4 * space.size()));
  for (std::size_t k = 0; k < space.size(); ++k) {
    for (Unit u : kUnits) values.col(VectorFieldTable::column(k, u)) = R[u].at_atom(k);
  }
  return VectorFieldTable(space, std::move(values));
}

VectorFieldTable synthesize(const std::array<CenterFieldTable, 4>& tables,
                            const SynthesisOptions& options) {
  return synthesize(ReductionSet{tables}, options);
}

// --- coordinates ----------------------------------------------------------

cplx FactorCoordinates::zeta() const { return omega * kappa(alpha); }

double FactorCoordinates::constraint_residual() const {
  const double norm = 2.0 * std::norm(xi) + std::norm(xi3) + std::norm(xi4) + std::norm(eta3) +
                      std::norm(eta4);
  const cplx bilinear =
      xi3 * std::conj(eta3) + xi4 * std::conj(eta4) - std::conj(omega * omega) * xi * xi;
  return std::max({std::abs(norm - 1.0), std::abs(bilinear), std::abs(std::abs(omega) - 1.0)});
}

std::optional<std::string> FactorCoordinates::invariant_violation(double tol) const {
  if (!(alpha > 0.0 && alpha < 1.0)) return "alpha must lie in (0, 1)";
  if (std::abs(std::abs(omega) - 1.0) > tol) return "omega must be unimodular";
  const double norm = 2.0 * std::norm(xi) + std::norm(xi3) + std::norm(xi4) + std::norm(eta3) +
                      std::norm(eta4);
  if (std::abs(norm - 1.0) > tol) {
    std::ostringstream s;
    s << "norm constraint 2|xi|^2 + |xi3|^2 + |xi4|^2 + |eta3|^2 + |eta4|^2 = 1 fails ("
      << norm << ")";
    return s.str();
  }
  const cplx bilinear =
      xi3 * std::conj(eta3) + xi4 * std::conj(eta4) - std::conj(omega * omega) * xi * xi;
  if (std::abs(bilinear) > tol) {
    std::ostringstream s;
    s << "bilinear constraint xi3 conj(eta3) + xi4 conj(eta4) = conj(omega)^2 xi^2 fails (|diff| = "
      << std::abs(bilinear) << ")";
    return s.str();
  }
  return std::nullopt;
}

FactorCoordinates FactorCoordinates::sample(Rng& rng, std::size_t max_retries) {
  for (std::size_t attempt = 0; attempt < max_retries; ++attempt) {
    FactorCoordinates c;
    c.alpha = rng.uniform(0.05, 0.95);
    c.omega = rng.unit_phase();
    // Uniform point on the 4-simplex from sorted uniforms.
    std::array<double, 6> cuts = {0.0, rng.uniform(), rng.uniform(), rng.uniform(),
                                  rng.uniform(), 1.0};
    std::sort(cuts.begin() + 1, cuts.end() - 1);
    std::array<double, 5> w;
    for (int i = 0; i < 5; ++i) w[i] = cuts[i + 1] - cuts[i];

    const double m_xi = std::sqrt(0.5 * w[0]);
    const double m3 = std::sqrt(w[1]), m4 = std::sqrt(w[2]);
    const double n3 = std::sqrt(w[3]), n4 = std::sqrt(w[4]);
    const double A = m3 * n3, B = m4 * n4, T = m_xi * m_xi;
    if (A <= 0.0 || B <= 0.0 || T <= 0.0) continue;
    if (T < std::abs(A - B) || T > A + B) continue;

    c.xi = std::polar(m_xi, rng.uniform(0.0, 2.0 * std::numbers::pi));
    c.xi3 = std::polar(m3, rng.uniform(0.0, 2.0 * std::numbers::pi));
    c.xi4 = std::polar(m4, rng.uniform(0.0, 2.0 * std::numbers::pi));
    // Solve c3 + c4 = target with |c3| = A, |c4| = B for the eta phases.
    const cplx target = std::conj(c.omega * c.omega) * c.xi * c.xi;
    const double cos_theta = std::clamp((T * T + A * A - B * B) / (2.0 * A * T), -1.0, 1.0);
    const double sign = rng.below(2) == 0 ? 1.0 : -1.0;
    const cplx c3 = std::polar(A, std::arg(target) + sign * std::acos(cos_theta));
    const cplx c4 = target - c3;
    c.eta3 = std::conj(c3 / c.xi3);
    // |c4| equals B up to round-off; keep the prescribed magnitude.
    c.eta4 = std::polar(n4, std::arg(std::conj(c4 / c.xi4)));
    if (c.invariant_violation(1e-12)) continue;
    return c;
  }
  throw ConstructionError("coordinate sampling: no feasible draw after " +
                          std::to_string(max_retries) + " attempts");
}

// --- per-atom factors -----------------------------------------------------

const Eigen::Vector4cd& AtomVectors::operator[](Unit u) const {
  switch (u) {
    case Unit::e11: return f11;
    case Unit::e12: return f12;
    case Unit::e21: return f21;
    default: return f22;
  }
}

AtomVectors generate_rank2_atom(const FactorCoordinates& c) {
  if (auto bad = c.invariant_violation(1e-12)) {
    throw ConstructionError("generate_rank2_atom: " + *bad);
  }
  const cplx zeta = c.zeta();
  AtomVectors v;
  v.unit << 1.0, 0.0, 0.0, 0.0;
  v.f11 << c.alpha, zeta, 0.0, 0.0;
  v.f22 << 1.0 - c.alpha, -zeta, 0.0, 0.0;
  v.f12 << 0.0, c.xi, c.xi3, c.xi4;
  v.f21 << 0.0, -c.omega * c.omega * std::conj(c.xi), c.eta3, c.eta4;
  return v;
}

AtomVectors generate_rank1_atom(double split) {
  if (!(split >= 0.0 && split <= 1.0)) {
    throw ConstructionError("generate_rank1_atom: split must lie in [0, 1]");
  }
  AtomVectors v;
  v.unit << 1.0, 0.0, 0.0, 0.0;
  v.f11 = v.unit;
  v.f22.setZero();
  v.f12 << 0.0, std::sqrt(split), 0.0, 0.0;
  v.f21 << 0.0, 0.0, std::sqrt(1.0 - split), 0.0;
  return v;
}

std::string case_name(AtomCase c) { return c == AtomCase::rank1 ? "rank1" : "rank2"; }

AtomCase parse_case(std::string_view s) {
  if (s == "rank1") return AtomCase::rank1;
  if (s == "rank2") return AtomCase::rank2;
  throw ConstructionError("unknown atom case '" + std::string(s) + "' (expected rank1 or rank2)");
}

// --- assembly -------------------------------------------------------------

MeasureSpace GeneratorSpec::space() const {
  MeasureSpace s = MeasureSpace::uniform(atoms);
  if (weights.empty()) return s;
  return MeasureSpace(std::vector<std::string>(s.ids().begin(), s.ids().end()), weights);
}

std::optional<std::string> GeneratorSpec::invariant_violation() const {
  if (atoms == 0) return "atom count must be positive";
  if (cases.size() != atoms) return "one case tag per atom required";
  if (!twists.empty() && twists.size() != atoms) return "twists must be empty or one per atom";
  if (!splits.empty() && splits.size() != atoms) return "splits must be empty or one per atom";
  if (!weights.empty() && weights.size() != atoms) return "weights must be empty or one per atom";
  if (!coordinates.empty() && coordinates.size() != atoms) {
    return "coordinates must be empty or one per atom";
  }
  for (std::size_t k = 0; k < atoms; ++k) {
    if (!splits.empty() && !(splits[k] >= 0.0 && splits[k] <= 1.0)) {
      return "split of atom " + std::to_string(k) + " outside [0, 1]";
    }
    if (!weights.empty() && !(weights[k] > 0.0 && std::isfinite(weights[k]))) {
      return "weight of atom " + std::to_string(k) + " must be positive";
    }
    if (!twists.empty() && twists[k]) {
      const Block& u = *twists[k];
      if ((u * u.adjoint() - Block::Identity()).cwiseAbs().maxCoeff() > 1e-10) {
        return "twist of atom " + std::to_string(k) + " is not unitary";
      }
    }
    if (!coordinates.empty() && coordinates[k]) {
      if (auto bad = coordinates[k]->invariant_violation()) {
        return "coordinates of atom " + std::to_string(k) + ": " + *bad;
      }
    }
  }
  return std::nullopt;
}

void GeneratorSpec::validate() const {
  if (auto bad = invariant_violation()) throw ConstructionError("generator spec: " + *bad);
}

GeneratorSpec make_spec(std::size_t atoms, std::string_view case_tag, std::uint64_t seed,
                        bool twist, bool random_weights, std::optional<double> split) {
  if (atoms == 0) throw ConstructionError("generator spec: atom count must be positive");
  Rng rng(seed);
  Rng weight_rng = rng.split();
  Rng case_rng = rng.split();
  Rng twist_rng = rng.split();
  GeneratorSpec spec;
  spec.atoms = atoms;
  spec.seed = rng.next_u64();
  for (std::size_t k = 0; k < atoms; ++k) {
    if (case_tag == "rank1") {
      spec.cases.push_back(AtomCase::rank1);
    } else if (case_tag == "rank2") {
      spec.cases.push_back(AtomCase::rank2);
    } else if (case_tag == "mixed") {
      const bool one = k == 0 || (k > 1 && case_rng.below(3) == 0);
      spec.cases.push_back(one ? AtomCase::rank1 : AtomCase::rank2);
    } else {
      throw ConstructionError("unknown case tag '" + std::string(case_tag) +
                              "' (expected rank1, rank2 or mixed)");
    }
    if (random_weights) spec.weights.push_back(weight_rng.uniform(0.25, 2.0));
    if (twist) spec.twists.emplace_back(random_unitary(twist_rng));
  }
  if (split) spec.splits.assign(atoms, *split);
  spec.validate();
  return spec;
}

Block random_unitary(Rng& rng) {
  Eigen::Vector2cd c0(rng.complex_normal(), rng.complex_normal());
  Eigen::Vector2cd c1(rng.complex_normal(), rng.complex_normal());
  c0.normalize();
  c1 -= c0.dot(c1) * c0;
  c1.normalize();
  Block u;
  u.col(0) = c0;
  u.col(1) = c1;
  return u;
}

std::array<Eigen::Vector4cd, 4> twist_atom(const std::array<Eigen::Vector4cd, 4>& table,
                                           const Block& u) {
  std::array<Eigen::Vector4cd, 4> out;
  for (Unit ij : kUnits) {
    Eigen::Vector4cd acc = Eigen::Vector4cd::Zero();
    for (Unit mn : kUnits) {
      acc += u(row_of(mn), row_of(ij)) * std::conj(u(col_of(mn), col_of(ij))) * table[slot(mn)];
    }
    out[slot(ij)] = acc;
  }
  return out;
}

VectorFieldTable assemble(const GeneratorSpec& spec) {
  spec.validate();
  const MeasureSpace space = spec.space();
  const std::size_t n = spec.atoms;
  Matrix values = Matrix::Zero(static_cast<Eigen::Index>(4 * n), static_cast<Eigen::Index>(4 * n));
  Rng master(spec.seed);
  for (std::size_t k = 0; k < n; ++k) {
    Rng rng = master.split();
    AtomVectors v;
    if (spec.cases[k] == AtomCase::rank1) {
      v = generate_rank1_atom(spec.splits.empty() ? rng.uniform() : spec.splits[k]);
    } else if (!spec.coordinates.empty() && spec.coordinates[k]) {
      v = generate_rank2_atom(*spec.coordinates[k]);
    } else {
      v = generate_rank2_atom(FactorCoordinates::sample(rng));
    }
    std::array<Eigen::Vector4cd, 4> table = {v.f11, v.f12, v.f21, v.f22};
    if (!spec.twists.empty() && spec.twists[k]) table = twist_atom(table, *spec.twists[k]);
    const double s = std::sqrt(space.weight(k));
    const auto row = static_cast<Eigen::Index>(4 * k);
    for (Unit u : kUnits) {
      values.block(row, VectorFieldTable::column(k, u), 4, 1) = s * table[slot(u)];
    }
  }
  return VectorFieldTable(space, std::move(values));
}

VectorFieldTable compress_range(const VectorFieldTable& F, double rel_tol) {
  const Matrix& X = F.values();
  if (X.size() == 0) return F;
  Eigen::JacobiSVD<Matrix> svd(X, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  Eigen::Index rank = 0;
  const double cut = rel_tol * (sv.size() > 0 ? sv(0) : 0.0);
  while (rank < sv.size() && sv(rank) > cut) ++rank;
  if (rank == 0) return VectorFieldTable(F.space(), Matrix::Zero(1, X.cols()));
  Matrix basis = svd.matrixU().leftCols(rank);
  return VectorFieldTable(F.space(), basis.adjoint() * X);
}

// --- stationary-pair generator --------------------------------------------

VectorFieldTable generate_from_stationary_pair(const FunctionalDensity& phi,
                                               const FunctionalDensity& psi) {
  if (!(phi.space() == psi.space())) {
    throw DimensionError("stationary pair: phi and psi live on different spaces");
  }
  const MeasureSpace& space = phi.space();
  for (std::size_t k = 0; k < space.size(); ++k) {
    for (const auto* d : {&phi, &psi}) {
      const double scale = std::max(1.0, (*d)[k].cwiseAbs().maxCoeff());
      if (((*d)[k] - (*d)[k].adjoint()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        throw DomainError(std::string("stationary pair: ") + (d == &phi ? "phi" : "psi") +
                          " density is not Hermitian at atom " + space.id(k));
      }
      if (d->min_eigenvalue(k) < tol::kPsdFloor * scale) {
        std::ostringstream s;
        s << "stationary pair: " << (d == &phi ? "phi" : "psi")
          << " density is not positive at atom " << space.id(k) << " (min eigenvalue "
          << d->min_eigenvalue(k) << ")";
        throw DomainError(s.str());
      }
    }
  }

  const auto N = static_cast<Eigen::Index>(4 * space.size());
  // K(y, x) = <F(x), F(y)> = phi(y* x) + psi(x y*).
  Matrix K = Matrix::Zero(N, N);
  for (std::size_t k = 0; k < space.size(); ++k) {
    const double nu = space.weight(k);
    for (Unit x : kUnits) {
      const int i = row_of(x), j = col_of(x);
      for (Unit y : kUnits) {
        const int m = row_of(y), n = col_of(y);
        cplx g = 0.0;
        if (m == i) g += nu * phi[k](j, n);
        if (j == n) g += nu * psi[k](m, i);
        K(VectorFieldTable::column(k, y), VectorFieldTable::column(k, x)) = g;
      }
    }
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(K);
  const Eigen::VectorXd& lambda = es.eigenvalues();
  const double lmax = lambda.size() > 0 ? std::max(0.0, lambda.maxCoeff()) : 0.0;
  if (lambda.size() > 0 && lambda.minCoeff() < tol::kGramNegative * std::max(lmax, 1e-300)) {
    std::ostringstream s;
    s << "stationary pair: Gram matrix has eigenvalue " << lambda.minCoeff()
      << " below the PSD threshold (max " << lmax << ")";
    throw InconsistentFieldError(s.str());
  }
  // Columns f_x[m] = sqrt(lambda_m) conj(V(x, m)).
  Matrix values(N, N);
  for (Eigen::Index m = 0; m < N; ++m) {
    const double l = lambda(m) <= tol::kGramClip * lmax ? 0.0 : lambda(m);
    const double s = std::sqrt(l);
    for (Eigen::Index x = 0; x < N; ++x) values(m, x) = s * std::conj(es.eigenvectors()(x, m));
  }
  return VectorFieldTable(space, std::move(values));
}

std::pair<FunctionalDensity, FunctionalDensity> sample_stationary_pair(const MeasureSpace& space,
                                                                       Rng& rng, bool rank_one) {
  std::vector<Block> phi(space.size()), psi(space.size());
  for (std::size_t k = 0; k < space.size(); ++k) {
    auto draw = [&] {
      Block g;
      for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 2; ++c) g(r, c) = rng.complex_normal();
      }
      if (rank_one) g.col(1).setZero();
      return Block(g * g.adjoint());
    };
    phi[k] = draw();
    psi[k] = draw();
    const double t = (phi[k].trace() + psi[k].trace()).real();
    phi[k] /= t;
    psi[k] /= t;
  }
  return {FunctionalDensity(space, std::move(phi)), FunctionalDensity(space, std::move(psi))};
}

}  // namespace ovf
