#pragma once

// Finite atomic model of M = L^inf(Omega, nu) and of N = M (x) M_2.
//
// Every element of M is one complex number per atom; every element of N is
// one 2x2 complex block per atom. Products, sums and adjoints act atom-wise.

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ovf/rng.hpp"

namespace ovf {

using cplx = std::complex<double>;
using Block = Eigen::Matrix2cd;

/// Matrix unit epsilon_ij of M_2. Enumerator value is the slot index 2*i + j
/// (zero-based row/column), which fixes the basis ordering everywhere.
enum class Unit : int { e11 = 0, e12 = 1, e21 = 2, e22 = 3 };

inline constexpr std::array<Unit, 4> kUnits = {Unit::e11, Unit::e12, Unit::e21,
                                               Unit::e22};

constexpr int slot(Unit u) { return static_cast<int>(u); }
constexpr int row_of(Unit u) { return slot(u) / 2; }
constexpr int col_of(Unit u) { return slot(u) % 2; }
constexpr Unit make_unit(int row, int col) {
  return static_cast<Unit>(2 * row + col);
}
constexpr Unit transpose(Unit u) { return make_unit(col_of(u), row_of(u)); }
/// "11", "12", "21", "22".
std::string unit_name(Unit u);
/// Inverse of unit_name; throws FormatError.
Unit parse_unit(std::string_view name);

/// Finite atomic measure space: ordered atoms with positive weights.
class MeasureSpace {
 public:
  MeasureSpace() = default;
  MeasureSpace(std::vector<std::string> ids, std::vector<double> weights);

  /// Atoms "w0", "w1", ... all of the given weight.
  static MeasureSpace uniform(std::size_t atoms, double weight = 1.0);

  std::size_t size() const { return weights_.size(); }
  double weight(std::size_t k) const { return weights_[k]; }
  const std::string& id(std::size_t k) const { return ids_[k]; }
  std::span<const double> weights() const { return weights_; }
  std::span<const std::string> ids() const { return ids_; }
  double total() const;

  friend bool operator==(const MeasureSpace&, const MeasureSpace&) = default;

 private:
  std::vector<std::string> ids_;
  std::vector<double> weights_;
};

/// Element of the center M: one complex value per atom.
class CenterElement {
 public:
  CenterElement() = default;
  explicit CenterElement(std::vector<cplx> values) : values_(std::move(values)) {}

  static CenterElement constant(std::size_t atoms, cplx value);
  static CenterElement zero(std::size_t atoms) { return constant(atoms, 0.0); }
  static CenterElement one(std::size_t atoms) { return constant(atoms, 1.0); }
  /// The atomic projection pi_k.
  static CenterElement atom(std::size_t atoms, std::size_t k);
  static CenterElement gaussian(std::size_t atoms, Rng& rng);

  std::size_t size() const { return values_.size(); }
  cplx operator[](std::size_t k) const { return values_[k]; }
  cplx& operator[](std::size_t k) { return values_[k]; }
  std::span<const cplx> values() const { return values_; }

  bool is_projection(double tol = 0.0) const;
  bool is_selfadjoint(double tol = 0.0) const;
  /// Euclidean norm of the value vector.
  double norm() const;

  CenterElement adjoint() const;

  friend CenterElement operator*(const CenterElement& a, const CenterElement& b);
  friend CenterElement operator+(const CenterElement& a, const CenterElement& b);
  friend CenterElement operator-(const CenterElement& a, const CenterElement& b);
  friend CenterElement operator*(cplx s, const CenterElement& a);
  friend bool operator==(const CenterElement&, const CenterElement&) = default;

 private:
  std::vector<cplx> values_;
};

/// Element of N = M (x) M_2: one 2x2 block per atom.
class BlockElement {
 public:
  BlockElement() = default;
  explicit BlockElement(std::vector<Block> blocks) : blocks_(std::move(blocks)) {}

  static BlockElement zero(std::size_t atoms);
  static BlockElement identity(std::size_t atoms);
  static BlockElement gaussian(std::size_t atoms, Rng& rng);
  static BlockElement gaussian_selfadjoint(std::size_t atoms, Rng& rng);

  std::size_t size() const { return blocks_.size(); }
  const Block& operator[](std::size_t k) const { return blocks_[k]; }
  Block& operator[](std::size_t k) { return blocks_[k]; }
  std::span<const Block> blocks() const { return blocks_; }

  /// Coefficient of pi_k epsilon_u.
  cplx entry(std::size_t k, Unit u) const {
    return blocks_[k](row_of(u), col_of(u));
  }

  BlockElement adjoint() const;

  /// max over atoms of max(||b^2 - b||, ||b - b*||) in the entry-wise max norm.
  double projection_residual() const;
  bool is_projection(double tol = 1e-12) const {
    return projection_residual() <= tol;
  }
  /// Entry-wise max norm over all atoms.
  double max_abs() const;

  friend BlockElement operator*(const BlockElement& x, const BlockElement& y);
  friend BlockElement operator+(const BlockElement& x, const BlockElement& y);
  friend BlockElement operator-(const BlockElement& x, const BlockElement& y);
  friend BlockElement operator*(cplx s, const BlockElement& x);

 private:
  std::vector<Block> blocks_;
};

/// epsilon_ij at every atom.
BlockElement matrix_unit(Unit which, const MeasureSpace& space);
BlockElement matrix_unit(Unit which, std::size_t atoms);

/// a epsilon_ij: the center element placed at entry (i, j).
BlockElement embed_center(const CenterElement& a, Unit which);

/// Support indicator of a nonnegative center element. Values must be real and
/// nonnegative (up to `support_tol`); otherwise DomainError.
CenterElement range_projection(const CenterElement& a, double support_tol = 1e-12);

/// kappa(x) = (x(1-x))^{1/2}, clamped at 0 outside [0, 1].
double kappa(double x);

/// Canonical form r = pi1 (+) pi2 + p(a, v, pi3) of a projection in N.
///
/// `a` and `v` only matter on pi3. Off pi3 they are kept as given; decompose()
/// produces a = 0, v = 1 there.
struct CanonicalProjection {
  CenterElement pi1;
  CenterElement pi2;
  CenterElement pi3;
  CenterElement a;  // real values
  CenterElement v;  // unimodular on pi3

  std::size_t size() const { return pi3.size(); }

  /// Empty when valid; otherwise names the first failed constraint.
  std::optional<std::string> invariant_violation() const;
  /// Throws ConstructionError naming the failed constraint.
  void validate() const;

  /// Single-atom helpers.
  static CanonicalProjection rank_one(double a, cplx v);
  static CanonicalProjection diagonal(bool pi1, bool pi2);
};

/// pi1 (+) pi2 + p(a, v, pi3). Validates first.
BlockElement materialize(const CanonicalProjection& r);

/// Atom-wise classification of a projection block. DomainError (message
/// carries the max residual) when p is not a projection within `tol`.
CanonicalProjection decompose_projection(const BlockElement& p, double tol = 1e-12);

struct OrthogonalityVerdict {
  bool orthogonal = true;
  std::optional<std::size_t> atom;   // first atom where a condition fails
  std::string failed_condition;      // e.g. "tau1 sigma1 = 0"
};

/// Evaluates the pq = 0 conditions on the canonical parameters: the disjointness
/// relations among tau_i, sigma_i, and w = -v, b = 1 - a on pi3(p) pi3(q).
OrthogonalityVerdict orthogonality_conditions(const CanonicalProjection& p,
                                              const CanonicalProjection& q,
                                              double tol = 1e-10);

struct ProjectionPair {
  CanonicalProjection p;
  CanonicalProjection q;
  BlockElement p_block;
  BlockElement q_block;
};

/// Random pair with pq = 0, built atom by atom: the p-block is one of
/// {0, I, e11, e22, p(a, v)} and the q-block is a projection under I - p.
ProjectionPair sample_orthogonal_pair(const MeasureSpace& space, Rng& rng);

/// Random projection with no orthogonality constraint (same block menu).
CanonicalProjection sample_projection(std::size_t atoms, Rng& rng);

}  // namespace ovf
