#include "ovf/ovf_core.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ovf/errors.hpp"

namespace ovf {

// --- tables ---------------------------------------------------------------

CenterFieldTable::CenterFieldTable(MeasureSpace space, Matrix values)
    : space_(std::move(space)), values_(std::move(values)) {
  if (static_cast<std::size_t>(values_.cols()) != space_.size()) {
    throw DimensionError("center field table: " + std::to_string(values_.cols()) +
                         " columns for " + std::to_string(space_.size()) + " atoms");
  }
}

Vector CenterFieldTable::evaluate(const CenterElement& a) const {
  if (a.size() != space_.size()) {
    throw DimensionError("center field evaluate: element has " + std::to_string(a.size()) +
                         " atoms, field has " + std::to_string(space_.size()));
  }
  Vector coef(static_cast<Eigen::Index>(a.size()));
  for (std::size_t k = 0; k < a.size(); ++k) coef(static_cast<Eigen::Index>(k)) = a[k];
  return values_ * coef;
}

VectorFieldTable::VectorFieldTable(MeasureSpace space, Matrix values)
    : space_(std::move(space)), values_(std::move(values)) {
  if (static_cast<std::size_t>(values_.cols()) != 4 * space_.size()) {
    throw DimensionError("vector field table: " + std::to_string(values_.cols()) +
                         " columns for " + std::to_string(space_.size()) +
                         " atoms (expected 4 per atom)");
  }
}

VectorFieldTable VectorFieldTable::zero(MeasureSpace space, Eigen::Index hilbert_dim) {
  const auto cols = static_cast<Eigen::Index>(4 * space.size());
  return VectorFieldTable(std::move(space), Matrix::Zero(hilbert_dim, cols));
}

VectorFieldTable VectorFieldTable::with_entry(std::size_t k, Unit u,
                                              const Vector& value) const {
  if (value.size() != hilbert_dim()) throw DimensionError("with_entry: vector length mismatch");
  VectorFieldTable copy = *this;
  copy.values_.col(column(k, u)) = value;
  return copy;
}

double VectorFieldTable::scale() const {
  if (values_.size() == 0) return 0.0;
  return values_.colwise().norm().maxCoeff();
}

Vector evaluate(const VectorFieldTable& F, const BlockElement& x) {
  if (x.size() != F.atoms()) {
    throw DimensionError("evaluate: element has " + std::to_string(x.size()) +
                         " atoms, field has " + std::to_string(F.atoms()));
  }
  Vector coef(static_cast<Eigen::Index>(4 * x.size()));
  for (std::size_t k = 0; k < x.size(); ++k) {
    for (Unit u : kUnits) coef(VectorFieldTable::column(k, u)) = x.entry(k, u);
  }
  return F.values() * coef;
}

CenterFieldTable reduction(const VectorFieldTable& F, Unit which) {
  const auto n = static_cast<Eigen::Index>(F.atoms());
  Matrix cols(F.hilbert_dim(), n);
  for (Eigen::Index k = 0; k < n; ++k) {
    cols.col(k) = F.values().col(4 * k + slot(which));
  }
  return CenterFieldTable(F.space(), std::move(cols));
}

ReductionSet reductions(const VectorFieldTable& F) {
  return ReductionSet{{reduction(F, Unit::e11), reduction(F, Unit::e12),
                       reduction(F, Unit::e21), reduction(F, Unit::e22)}};
}

// --- functionals ----------------------------------------------------------

FunctionalDensity::FunctionalDensity(MeasureSpace space, std::vector<Block> densities)
    : space_(std::move(space)), densities_(std::move(densities)) {
  if (densities_.size() != space_.size()) {
    throw DimensionError("functional density: " + std::to_string(densities_.size()) +
                         " blocks for " + std::to_string(space_.size()) + " atoms");
  }
}

FunctionalDensity FunctionalDensity::zero(MeasureSpace space) {
  const std::size_t n = space.size();
  return FunctionalDensity(std::move(space), std::vector<Block>(n, Block::Zero()));
}

cplx FunctionalDensity::apply(const BlockElement& x) const {
  if (x.size() != size()) throw DimensionError("functional apply: atom count mismatch");
  cplx s = 0.0;
  for (std::size_t k = 0; k < size(); ++k) {
    s += space_.weight(k) * (densities_[k] * x[k]).trace();
  }
  return s;
}

double FunctionalDensity::min_eigenvalue(std::size_t k) const {
  const Block h = 0.5 * (densities_[k] + densities_[k].adjoint());
  Eigen::SelfAdjointEigenSolver<Block> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double FunctionalDensity::min_eigenvalue() const {
  double m = 0.0;
  for (std::size_t k = 0; k < size(); ++k) {
    m = k == 0 ? min_eigenvalue(k) : std::min(m, min_eigenvalue(k));
  }
  return m;
}

double FunctionalDensity::hermiticity_residual() const {
  double m = 0.0;
  for (const Block& d : densities_) m = std::max(m, (d - d.adjoint()).cwiseAbs().maxCoeff());
  return m;
}

bool FunctionalDensity::is_positive(double floor) const {
  for (std::size_t k = 0; k < size(); ++k) {
    const double scale = std::max(1.0, densities_[k].cwiseAbs().maxCoeff());
    if (min_eigenvalue(k) < floor * scale) return false;
  }
  return true;
}

FunctionalDensity operator+(const FunctionalDensity& a, const FunctionalDensity& b) {
  if (!(a.space() == b.space())) throw DimensionError("functional sum: spaces differ");
  std::vector<Block> d(a.size());
  for (std::size_t k = 0; k < d.size(); ++k) d[k] = a[k] + b[k];
  return FunctionalDensity(a.space(), std::move(d));
}

FunctionalDensity operator-(const FunctionalDensity& a, const FunctionalDensity& b) {
  if (!(a.space() == b.space())) throw DimensionError("functional difference: spaces differ");
  std::vector<Block> d(a.size());
  for (std::size_t k = 0; k < d.size(); ++k) d[k] = a[k] - b[k];
  return FunctionalDensity(a.space(), std::move(d));
}

FunctionalDensity rho_functional(const VectorFieldTable& F) {
  const ReductionSet R = reductions(F);
  const Vector f11_1 = R[Unit::e11].at_unit();
  const Vector f22_1 = R[Unit::e22].at_unit();
  const Vector unit_image = f11_1 + f22_1;
  std::vector<Block> d(F.atoms());
  for (std::size_t k = 0; k < F.atoms(); ++k) {
    const double nu = F.space().weight(k);
    Block& b = d[k];
    b(0, 0) = inner(R[Unit::e11].at_atom(k), f11_1) / nu;
    b(1, 1) = inner(R[Unit::e22].at_atom(k), f22_1) / nu;
    // rho_12 pairs with x_21, i.e. comes from F_21.
    b(0, 1) = inner(R[Unit::e21].at_atom(k), unit_image) / nu;
    b(1, 0) = inner(R[Unit::e12].at_atom(k), unit_image) / nu;
  }
  return FunctionalDensity(F.space(), std::move(d));
}

double operand_floor(double field_scale, double coef_a, double coef_b) {
  const double s = tol::kOperandFloor * field_scale;
  return std::max(tol::kAbsoluteFloor, s * s * coef_a * coef_b);
}

DensityReport r_densities(const VectorFieldTable& F, bool with_cross, double tol) {
  DensityReport rep;
  rep.realness.tolerance = tol;
  rep.diagonal_rule.tolerance = tol;
  rep.sum_rule.tolerance = tol;
  rep.rho = rho_functional(F);

  const std::size_t n = F.atoms();
  const ReductionSet R = reductions(F);
  std::array<Vector, 4> at_one;
  for (Unit u : kUnits) at_one[slot(u)] = R[u].at_unit();
  const double S = F.scale();
  const double floor = operand_floor(S, 1.0, std::sqrt(static_cast<double>(n)));
  const BlockElement I = BlockElement::identity(n);
  const Vector unit_image = evaluate(F, I);

  rep.r.resize(n);
  if (with_cross) rep.cross.emplace(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double nu = F.space().weight(k);
    for (Unit u : kUnits) {
      const Vector fk = R[u].at_atom(k);
      const cplx raw = inner(fk, at_one[slot(u)]);
      rep.r[k][slot(u)] = raw.real() / nu;
      rep.realness.observe(
          normalized_residual(std::abs(raw.imag()), fk.norm() * at_one[slot(u)].norm(), floor),
          [&] {
            return Witness{"Im r_ij = 0", k, "r_" + unit_name(u), 0.0};
          });
      if (with_cross) {
        for (Unit w : kUnits) {
          (*rep.cross)[k][4 * slot(u) + slot(w)] = inner(fk, at_one[slot(w)]) / nu;
        }
      }
    }
    // r_ii against <F(pi_k e_ii), F(I)> (the trace-pairing value of rho_ii).
    for (Unit u : {Unit::e11, Unit::e22}) {
      const Vector fk = R[u].at_atom(k);
      const cplx direct = inner(fk, unit_image);
      const double diff = std::abs(direct - nu * rep.r[k][slot(u)]);
      rep.diagonal_rule.observe(
          normalized_residual(diff, fk.norm() * unit_image.norm(), floor), [&] {
            return Witness{"r_ii = rho_ii", k, "i = " + std::to_string(row_of(u) + 1), 0.0};
          });
    }
    const auto& rk = rep.r[k];
    const Block& rho = rep.rho[k];
    const double lhs = rk[slot(Unit::e12)] + rk[slot(Unit::e21)];
    const double rhs = rho(0, 0).real() + rho(1, 1).real();
    const double scale = nu * (std::abs(rk[slot(Unit::e12)]) + std::abs(rk[slot(Unit::e21)]) +
                               std::abs(rho(0, 0)) + std::abs(rho(1, 1)));
    rep.sum_rule.observe(normalized_residual(nu * std::abs(lhs - rhs), scale, floor), [&] {
      std::ostringstream d;
      d << "r12 + r21 = " << lhs << ", rho11 + rho22 = " << rhs;
      return Witness{"r12 + r21 = rho11 + rho22", k, d.str(), 0.0};
    });
  }
  return rep;
}

// --- orthogonality --------------------------------------------------------

namespace {

struct NamedBlock {
  const char* name;
  Block block;
};

std::vector<NamedBlock> sweep_blocks() {
  const cplx i(0.0, 1.0);
  std::vector<NamedBlock> out;
  Block b = Block::Zero();
  b(0, 0) = 1.0;
  out.push_back({"e11", b});
  b = Block::Zero();
  b(1, 1) = 1.0;
  out.push_back({"e22", b});
  out.push_back({"I", Block::Identity()});
  const std::array<std::pair<const char*, cplx>, 4> phases = {
      {{"h(+1)", 1.0}, {"h(+i)", i}, {"h(-1)", -1.0}, {"h(-i)", -i}}};
  for (const auto& [name, w] : phases) {
    Block h;
    h << 0.5, 0.5 * std::conj(w), 0.5 * w, 0.5;
    out.push_back({name, h});
  }
  return out;
}

// Same-atom orthogonal partner: e11 <-> e22, h(w) <-> h(-w). I has none.
int partner(int idx) {
  switch (idx) {
    case 0: return 1;
    case 1: return 0;
    case 3: return 5;
    case 5: return 3;
    case 4: return 6;
    case 6: return 4;
    default: return -1;
  }
}

Vector image_at_atom(const VectorFieldTable& F, std::size_t k, const Block& b) {
  Vector v = Vector::Zero(F.hilbert_dim());
  for (Unit u : kUnits) {
    const cplx c = b(row_of(u), col_of(u));
    if (c != 0.0) v += c * F.values().col(VectorFieldTable::column(k, u));
  }
  return v;
}

}  // namespace

OrthogonalityReport verify_orthogonality(const VectorFieldTable& F,
                                         const VerifyOptions& options) {
  OrthogonalityReport rep;
  rep.sweep = CheckRecord("orthogonality (matrix-unit sweep)", options.tol);
  rep.sampled = CheckRecord("orthogonality (sampled pairs)", options.tol);
  const std::size_t n = F.atoms();
  const double floor = operand_floor(F.scale(), 1.0, 1.0);

  auto residual = [&](const Vector& fp, const Vector& fq) {
    return normalized_residual(std::abs(inner(fp, fq)), fp.norm() * fq.norm(), floor);
  };

  const auto blocks = sweep_blocks();
  std::vector<std::vector<Vector>> images(n);
  for (std::size_t k = 0; k < n; ++k) {
    for (const auto& nb : blocks) images[k].push_back(image_at_atom(F, k, nb.block));
  }
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t l = 0; l < n; ++l) {
      for (int bp = 0; bp < static_cast<int>(blocks.size()); ++bp) {
        for (int bq = 0; bq < static_cast<int>(blocks.size()); ++bq) {
          if (k == l && partner(bp) != bq) continue;
          rep.sweep.observe(residual(images[k][bp], images[l][bq]), [&] {
            std::ostringstream d;
            d << "p = " << blocks[bp].name << " at atom " << k << ", q = "
              << blocks[bq].name << " at atom " << l;
            return Witness{"pq = 0 => <F(p),F(q)> = 0", k, d.str(), 0.0};
          });
        }
      }
    }
  }
  // Global pairs: the same block at every atom.
  for (int bp = 0; bp < static_cast<int>(blocks.size()); ++bp) {
    const int bq = partner(bp);
    if (bq < 0) continue;
    Vector fp = Vector::Zero(F.hilbert_dim());
    Vector fq = Vector::Zero(F.hilbert_dim());
    for (std::size_t k = 0; k < n; ++k) {
      fp += images[k][bp];
      fq += images[k][bq];
    }
    rep.sweep.observe(residual(fp, fq), [&] {
      return Witness{"pq = 0 => <F(p),F(q)> = 0", std::nullopt,
                     std::string("p = ") + blocks[bp].name + " everywhere, q = " +
                         blocks[bq].name + " everywhere",
                     0.0};
    });
  }

  Rng rng(options.seed);
  for (std::size_t s = 0; s < options.samples; ++s) {
    const ProjectionPair pair = sample_orthogonal_pair(F.space(), rng);
    const Vector fp = evaluate(F, pair.p_block);
    const Vector fq = evaluate(F, pair.q_block);
    rep.sampled.observe(residual(fp, fq), [&] {
      std::ostringstream d;
      d << "sample " << s << " (seed " << options.seed << ")";
      for (std::size_t k = 0; k < n; ++k) {
        d << "; atom " << k << ": p=" << pair.p_block[k](0, 0).real() << "/"
          << pair.p_block[k](0, 1) << ", q=" << pair.q_block[k](0, 0).real() << "/"
          << pair.q_block[k](0, 1);
      }
      return Witness{"pq = 0 => <F(p),F(q)> = 0", std::nullopt, d.str(), 0.0};
    });
  }
  return rep;
}

// --- identities -----------------------------------------------------------

const CheckRecord* IdentityReport::find(std::string_view name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

std::pair<cplx, cplx> symmetric_offdiagonal_sides(const ReductionSet& R,
                                                  const CenterElement& a,
                                                  const CenterElement& pi) {
  const Vector f = R[Unit::e12].evaluate(a * pi) + R[Unit::e21].evaluate(a.adjoint() * pi);
  return {inner(f, R[Unit::e11].evaluate(pi)), inner(R[Unit::e22].evaluate(pi), f)};
}

namespace {

CenterElement random_subset(std::size_t n, Rng& rng) {
  CenterElement pi = CenterElement::zero(n);
  bool any = false;
  for (std::size_t k = 0; k < n; ++k) {
    if (rng.below(2) == 1) {
      pi[k] = 1.0;
      any = true;
    }
  }
  if (!any) pi[rng.below(n)] = 1.0;
  return pi;
}

std::string pair_name(Unit u, Unit w) { return "(" + unit_name(u) + "," + unit_name(w) + ")"; }

}  // namespace

IdentityReport verify_reduction_identities(const ReductionSet& R,
                                           const VerifyOptions& options,
                                           bool core_only) {
  const double tol = options.tol;
  CheckRecord i_diag("disjoint diagonal: <F11(a),F22(b)> = 0", tol);
  CheckRecord i_off("disjoint off-diagonal: <F12(a),F21(b)> = 0", tol);
  CheckRecord ii("norm balance: |F12(a)|^2 + |F21(a)|^2 = |F11(a)|^2 + |F22(a)|^2", tol);
  CheckRecord iii("module shift: <Fij(a),Fkl(b)> = <Fij(b*a),Fkl(1)>", tol);
  CheckRecord iv_a("off-diagonal balance: <F12(pi),F11(1)> = <F22(1),F21(pi)>", tol);
  CheckRecord iv_b("off-diagonal balance: <F21(pi),F11(1)> = <F22(1),F12(pi)>", tol);
  CheckRecord e11("disjoint supports annihilate", tol);
  CheckRecord e12("symmetric off-diagonal identity", tol);
  CheckRecord e13("symmetric identity at a = 1", tol);
  CheckRecord e14("symmetric identity at a = i", tol);

  const std::size_t n = R.space().size();
  const double sqrt_n = std::sqrt(static_cast<double>(n));
  double S = 0.0;
  for (const auto& t : R.tables) {
    if (t.values().size() > 0) S = std::max(S, t.values().colwise().norm().maxCoeff());
  }
  const CenterElement one = CenterElement::one(n);
  std::array<Vector, 4> at_one;
  for (Unit u : kUnits) at_one[slot(u)] = R[u].at_unit();

  auto ip_residual = [](const Vector& u1, const Vector& v1, const Vector& u2,
                        const Vector& v2, double floor) {
    const cplx lhs = inner(u1, v1);
    const cplx rhs = inner(u2, v2);
    const double scale = std::max(u1.norm() * v1.norm(), u2.norm() * v2.norm());
    return normalized_residual(std::abs(lhs - rhs), scale, floor);
  };

  Rng rng(options.seed);
  for (std::size_t t = 0; t < options.trials; ++t) {
    const CenterElement a = CenterElement::gaussian(n, rng);
    const CenterElement b = CenterElement::gaussian(n, rng);
    const double fl_ab = operand_floor(S, a.norm(), b.norm());
    const double fl_aa = operand_floor(S, a.norm(), a.norm());
    auto trial = [t](const char* what) {
      return std::string(what) + ", random trial " + std::to_string(t);
    };

    const Vector f11a = R[Unit::e11].evaluate(a), f22b = R[Unit::e22].evaluate(b);
    const Vector f12a = R[Unit::e12].evaluate(a), f21b = R[Unit::e21].evaluate(b);
    i_diag.observe(normalized_residual(std::abs(inner(f11a, f22b)),
                                       f11a.norm() * f22b.norm(), fl_ab),
                   [&] { return Witness{i_diag.name, std::nullopt, trial("a, b"), 0.0}; });
    i_off.observe(normalized_residual(std::abs(inner(f12a, f21b)),
                                      f12a.norm() * f21b.norm(), fl_ab),
                  [&] { return Witness{i_off.name, std::nullopt, trial("a, b"), 0.0}; });

    const double n12 = R[Unit::e12].evaluate(a).squaredNorm();
    const double n21 = R[Unit::e21].evaluate(a).squaredNorm();
    const double n11 = f11a.squaredNorm();
    const double n22 = R[Unit::e22].evaluate(a).squaredNorm();
    ii.observe(normalized_residual(std::abs(n12 + n21 - n11 - n22), n12 + n21 + n11 + n22, fl_aa),
               [&] { return Witness{ii.name, std::nullopt, trial("a"), 0.0}; });

    const CenterElement bsa = b.adjoint() * a;
    const double fl_iii = std::max(fl_ab, operand_floor(S, bsa.norm(), sqrt_n));
    for (Unit u : kUnits) {
      const Vector fua = R[u].evaluate(a);
      const Vector fubsa = R[u].evaluate(bsa);
      for (Unit w : kUnits) {
        const Vector fwb = R[w].evaluate(b);
        iii.observe(ip_residual(fua, fwb, fubsa, at_one[slot(w)], fl_iii), [&] {
          return Witness{iii.name, std::nullopt, trial(("(ij,kl) = " + pair_name(u, w)).c_str()),
                         0.0};
        });
      }
    }

    if (!core_only) {
      const CenterElement pi = random_subset(n, rng);
      const double fl_pi = operand_floor(S, a.norm() + sqrt_n, sqrt_n);
      const auto [lhs, rhs] = symmetric_offdiagonal_sides(R, a, pi);
      const Vector f = R[Unit::e12].evaluate(a * pi) + R[Unit::e21].evaluate(a.adjoint() * pi);
      const double scale =
          f.norm() * std::max(R[Unit::e11].evaluate(pi).norm(), R[Unit::e22].evaluate(pi).norm());
      e12.observe(normalized_residual(std::abs(lhs - rhs), scale, fl_pi),
                  [&] { return Witness{e12.name, std::nullopt, trial("a, pi"), 0.0}; });
    }
  }

  // Off-diagonal balance and the a = 1, a = i specializations on every atomic projection.
  for (std::size_t k = 0; k < n; ++k) {
    const double fl = operand_floor(S, 1.0, sqrt_n);
    const Vector f12 = R[Unit::e12].at_atom(k), f21 = R[Unit::e21].at_atom(k);
    const Vector f11 = R[Unit::e11].at_atom(k), f22 = R[Unit::e22].at_atom(k);
    const Vector& f11_1 = at_one[slot(Unit::e11)];
    const Vector& f22_1 = at_one[slot(Unit::e22)];
    iv_a.observe(ip_residual(f12, f11_1, f22_1, f21, fl),
                 [&] { return Witness{iv_a.name, k, "pi = pi_k", 0.0}; });
    iv_b.observe(ip_residual(f21, f11_1, f22_1, f12, fl),
                 [&] { return Witness{iv_b.name, k, "pi = pi_k", 0.0}; });
    if (core_only) continue;

    const Vector sum = f12 + f21, diff = f12 - f21;
    const cplx i(0.0, 1.0);
    const double scale = std::max(sum.norm(), diff.norm()) * std::max(f11.norm(), f22.norm());
    const double fl1 = operand_floor(S, 2.0, 1.0);
    e13.observe(normalized_residual(std::abs(inner(sum, f11) - inner(f22, sum)), scale, fl1),
                [&] { return Witness{e13.name, k, "pi = pi_k", 0.0}; });
    e14.observe(
        normalized_residual(std::abs(i * inner(diff, f11) - (-i) * inner(f22, diff)), scale, fl1),
        [&] { return Witness{e14.name, k, "pi = pi_k", 0.0}; });

    for (std::size_t l = 0; l < n; ++l) {
      if (l == k) continue;
      for (Unit u : kUnits) {
        const Vector fuk = R[u].at_atom(k);
        for (Unit w : kUnits) {
          const Vector fwl = R[w].at_atom(l);
          e11.observe(normalized_residual(std::abs(inner(fuk, fwl)), fuk.norm() * fwl.norm(),
                                          operand_floor(S, 1.0, 1.0)),
                      [&] {
                        return Witness{e11.name, k,
                                       "atoms (" + std::to_string(k) + "," + std::to_string(l) +
                                           "), units " + pair_name(u, w),
                                       0.0};
                      });
        }
      }
    }
  }

  IdentityReport rep;
  rep.checks = {i_diag, i_off, ii, iii, iv_a, iv_b};
  if (!core_only) {
    rep.checks.push_back(e11);
    rep.checks.push_back(e12);
    rep.checks.push_back(e13);
    rep.checks.push_back(e14);
  }
  return rep;
}

IdentityReport verify_prop1(const VectorFieldTable& F, const VerifyOptions& options) {
  IdentityReport rep = verify_reduction_identities(reductions(F), options, false);
  const double tol = options.tol;
  CheckRecord e6("|F(x)|^2 = rho(x^2)", tol);
  CheckRecord e7("Re<F(x),F(y)> = rho(xy+yx)/2", tol);
  CheckRecord gram("Gram reconstruction from cross densities", tol);

  const std::size_t n = F.atoms();
  const double S = F.scale();
  const DensityReport dens = r_densities(F, true, tol);
  const FunctionalDensity& rho = dens.rho;

  auto frob = [](const BlockElement& x) {
    double s = 0.0;
    for (const Block& b : x.blocks()) s += b.squaredNorm();
    return std::sqrt(s);
  };

  // Independent stream so the reduction checks above keep their draws.
  Rng rng(options.seed ^ 0xA5A5A5A5DEADBEEFULL);
  for (std::size_t t = 0; t < options.trials; ++t) {
    const BlockElement x = BlockElement::gaussian_selfadjoint(n, rng);
    const BlockElement y = BlockElement::gaussian_selfadjoint(n, rng);
    const Vector fx = evaluate(F, x), fy = evaluate(F, y);
    const double nx = frob(x), ny = frob(y);
    const double lhs6 = fx.squaredNorm();
    const cplx rhs6 = rho.apply(x * x);
    e6.observe(normalized_residual(std::abs(cplx(lhs6) - rhs6), lhs6, operand_floor(S, nx, nx)),
               [&] {
                 return Witness{e6.name, std::nullopt, "random selfadjoint x, trial " +
                                std::to_string(t), 0.0};
               });
    const double lhs7 = inner(fx, fy).real();
    const cplx rhs7 = 0.5 * rho.apply(x * y + y * x);
    e7.observe(normalized_residual(std::abs(cplx(lhs7) - rhs7), fx.norm() * fy.norm(),
                                   operand_floor(S, nx, ny)),
               [&] {
                 return Witness{e7.name, std::nullopt, "random selfadjoint x, y, trial " +
                                std::to_string(t), 0.0};
               });
  }

  const ReductionSet R = reductions(F);
  constexpr std::size_t kGramSamples = 50;
  for (std::size_t t = 0; t < std::max(kGramSamples, options.trials / 2); ++t) {
    const CenterElement a = CenterElement::gaussian(n, rng);
    const CenterElement b = CenterElement::gaussian(n, rng);
    const Unit u = kUnits[rng.below(4)];
    const Unit w = kUnits[rng.below(4)];
    const Vector fua = R[u].evaluate(a), fwb = R[w].evaluate(b);
    const cplx direct = inner(fua, fwb);
    cplx rebuilt = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      rebuilt += std::conj(b[k]) * a[k] * F.space().weight(k) *
                 (*dens.cross)[k][4 * slot(u) + slot(w)];
    }
    gram.observe(normalized_residual(std::abs(direct - rebuilt), fua.norm() * fwb.norm(),
                                     operand_floor(S, a.norm(), b.norm())),
                 [&] {
                   return Witness{gram.name, std::nullopt,
                                  "units " + pair_name(u, w) + ", trial " + std::to_string(t),
                                  0.0};
                 });
  }

  rep.checks.push_back(e6);
  rep.checks.push_back(e7);
  rep.checks.push_back(gram);
  for (const auto& r : dens.records()) rep.checks.push_back(r);
  return rep;
}

}  // namespace ovf
