#pragma once

// Orthogonal vector fields F: N -> H stored by their values on the basis
// {pi_k epsilon_ij}, their center reductions F_ij, the associated density
// functionals, and the identity verification suite.

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ovf/checks.hpp"
#include "ovf/measure_algebra.hpp"
#include "ovf/tolerances.hpp"

namespace ovf {

using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;

/// <u, v>, linear in u and conjugate-linear in v.
inline cplx inner(const Vector& u, const Vector& v) { return v.dot(u); }

/// Commutative field G: M -> H, one column G(pi_k) per atom.
class CenterFieldTable {
 public:
  CenterFieldTable() = default;
  CenterFieldTable(MeasureSpace space, Matrix values);

  const MeasureSpace& space() const { return space_; }
  Eigen::Index hilbert_dim() const { return values_.rows(); }
  const Matrix& values() const { return values_; }

  Vector at_atom(std::size_t k) const { return values_.col(static_cast<Eigen::Index>(k)); }
  /// G(a) = sum_k a_k G(pi_k).
  Vector evaluate(const CenterElement& a) const;
  /// G(1).
  Vector at_unit() const { return values_.rowwise().sum(); }

 private:
  MeasureSpace space_;
  Matrix values_;
};

/// F given by F(pi_k epsilon_ij), stored column-wise at 4k + slot(u).
class VectorFieldTable {
 public:
  VectorFieldTable() = default;
  VectorFieldTable(MeasureSpace space, Matrix values);

  static VectorFieldTable zero(MeasureSpace space, Eigen::Index hilbert_dim);
  static Eigen::Index column(std::size_t k, Unit u) {
    return static_cast<Eigen::Index>(4 * k) + slot(u);
  }

  const MeasureSpace& space() const { return space_; }
  std::size_t atoms() const { return space_.size(); }
  Eigen::Index hilbert_dim() const { return values_.rows(); }
  const Matrix& values() const { return values_; }

  Vector entry(std::size_t k, Unit u) const { return values_.col(column(k, u)); }
  /// Copy with F(pi_k epsilon_u) replaced.
  VectorFieldTable with_entry(std::size_t k, Unit u, const Vector& value) const;

  /// Largest table-vector norm; the scale used by residual floors.
  double scale() const;

 private:
  MeasureSpace space_;
  Matrix values_;
};

/// F(x) = sum_k sum_ij x_ij(k) F(pi_k epsilon_ij).
Vector evaluate(const VectorFieldTable& F, const BlockElement& x);

/// F_ij(a) = F(a epsilon_ij) as a commutative field table.
CenterFieldTable reduction(const VectorFieldTable& F, Unit which);

/// The four reductions, indexed by slot(Unit).
struct ReductionSet {
  std::array<CenterFieldTable, 4> tables;

  const CenterFieldTable& operator[](Unit u) const { return tables[slot(u)]; }
  const MeasureSpace& space() const { return tables[0].space(); }
};
ReductionSet reductions(const VectorFieldTable& F);

/// Normal functional on N by its density matrices: phi(x) = sum_k nu_k tr(D_k x_k).
class FunctionalDensity {
 public:
  FunctionalDensity() = default;
  FunctionalDensity(MeasureSpace space, std::vector<Block> densities);
  static FunctionalDensity zero(MeasureSpace space);

  const MeasureSpace& space() const { return space_; }
  std::size_t size() const { return densities_.size(); }
  const Block& operator[](std::size_t k) const { return densities_[k]; }
  const std::vector<Block>& densities() const { return densities_; }

  cplx apply(const BlockElement& x) const;
  /// Smallest eigenvalue of the Hermitian part at atom k.
  double min_eigenvalue(std::size_t k) const;
  double min_eigenvalue() const;
  /// Largest deviation from Hermiticity over atoms.
  double hermiticity_residual() const;
  bool is_positive(double floor = tol::kPsdFloor) const;

  friend FunctionalDensity operator+(const FunctionalDensity&, const FunctionalDensity&);
  friend FunctionalDensity operator-(const FunctionalDensity&, const FunctionalDensity&);

 private:
  MeasureSpace space_;
  std::vector<Block> densities_;
};

/// rho(x) = <F(x), F(I)> by its densities:
/// rho_ii(k) = <F_ii(pi_k), F_ii(1)> / nu_k and
/// rho_ij(k) = <F_ji(pi_k), F_11(1) + F_22(1)> / nu_k for i != j.
FunctionalDensity rho_functional(const VectorFieldTable& F);

/// Radon-Nikodym densities of a field and their consistency checks.
struct DensityReport {
  FunctionalDensity rho;
  /// r_ij(k) = Re <F_ij(pi_k), F_ij(1)> / nu_k, indexed [k][slot].
  std::vector<std::array<double, 4>> r;
  /// d_{u,w}(k) = <F_u(pi_k), F_w(1)> / nu_k, indexed [k][4 * slot(u) + slot(w)].
  std::optional<std::vector<std::array<cplx, 16>>> cross;

  CheckRecord realness{"Im r_ij = 0", tol::kIdentity};
  CheckRecord diagonal_rule{"r_ii = rho_ii", tol::kIdentity};
  CheckRecord sum_rule{"r12 + r21 = rho11 + rho22", tol::kIdentity};

  bool consistent() const {
    return realness.pass() && diagonal_rule.pass() && sum_rule.pass();
  }
  std::vector<CheckRecord> records() const { return {realness, diagonal_rule, sum_rule}; }
};
DensityReport r_densities(const VectorFieldTable& F, bool with_cross = false,
                          double tol = tol::kIdentity);

struct VerifyOptions {
  std::size_t samples = 1000;  // sampled orthogonal projection pairs
  std::size_t trials = 100;    // random center / block elements per identity
  std::uint64_t seed = 0;
  double tol = tol::kIdentity;
};

/// Orthogonality (pq = 0 => <F(p), F(q)> = 0) over a deterministic sweep of
/// matrix-unit-derived pairs and `samples` random canonical pairs.
struct OrthogonalityReport {
  CheckRecord sweep;
  CheckRecord sampled;
  bool pass() const { return sweep.pass() && sampled.pass(); }
  std::vector<CheckRecord> records() const { return {sweep, sampled}; }
};
OrthogonalityReport verify_orthogonality(const VectorFieldTable& F,
                                         const VerifyOptions& options = {});

struct IdentityReport {
  std::vector<CheckRecord> checks;
  bool pass() const { return all_pass(checks); }
  const CheckRecord* find(std::string_view name) const;
};

/// Reduction-level identities: disjointness, norm balance, module shift and
/// off-diagonal balance, plus the derived support relations and the symmetric
/// off-diagonal identity with its a = 1, a = i specializations. `core_only`
/// restricts to the first four families.
IdentityReport verify_reduction_identities(const ReductionSet& R,
                                           const VerifyOptions& options,
                                           bool core_only = false);

/// Full suite on F: the reduction identities, the rho identities for
/// selfadjoint elements, and Gram reconstruction from the cross densities.
IdentityReport verify_prop1(const VectorFieldTable& F, const VerifyOptions& options);

/// Both sides of <F12(a pi) + F21(a* pi), F11(pi)> = <F22(pi), F12(a pi) + F21(a* pi)>.
std::pair<cplx, cplx> symmetric_offdiagonal_sides(const ReductionSet& R,
                                                  const CenterElement& a,
                                                  const CenterElement& pi);

/// Floor applied to residual denominators for inner products of F-images of
/// elements with coefficient norms `coef_a` and `coef_b`.
double operand_floor(double field_scale, double coef_a, double coef_b);

}  // namespace ovf
