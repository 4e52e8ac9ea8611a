#include "ovf/measure_algebra.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "ovf/errors.hpp"
#include "ovf/tolerances.hpp"

namespace ovf {

std::string unit_name(Unit u) {
  return std::to_string(row_of(u) + 1) + std::to_string(col_of(u) + 1);
}

Unit parse_unit(std::string_view name) {
  for (Unit u : kUnits) {
    if (unit_name(u) == name) return u;
  }
  throw FormatError("unknown matrix unit '" + std::string(name) + "'");
}

// --- MeasureSpace ---------------------------------------------------------

MeasureSpace::MeasureSpace(std::vector<std::string> ids, std::vector<double> weights)
    : ids_(std::move(ids)), weights_(std::move(weights)) {
  if (ids_.size() != weights_.size()) {
    throw ConstructionError("measure space: " + std::to_string(ids_.size()) +
                            " ids but " + std::to_string(weights_.size()) + " weights");
  }
  std::set<std::string> seen;
  for (std::size_t k = 0; k < ids_.size(); ++k) {
    if (!(weights_[k] > 0.0) || !std::isfinite(weights_[k])) {
      throw ConstructionError("measure space: weight of atom " + ids_[k] +
                              " must be positive and finite");
    }
    if (!seen.insert(ids_[k]).second) {
      throw ConstructionError("measure space: duplicate atom id " + ids_[k]);
    }
  }
}

MeasureSpace MeasureSpace::uniform(std::size_t atoms, double weight) {
  std::vector<std::string> ids;
  ids.reserve(atoms);
  for (std::size_t k = 0; k < atoms; ++k) ids.push_back("w" + std::to_string(k));
  return MeasureSpace(std::move(ids), std::vector<double>(atoms, weight));
}

double MeasureSpace::total() const {
  double s = 0.0;
  for (double w : weights_) s += w;
  return s;
}

// --- CenterElement --------------------------------------------------------

CenterElement CenterElement::constant(std::size_t atoms, cplx value) {
  return CenterElement(std::vector<cplx>(atoms, value));
}

CenterElement CenterElement::atom(std::size_t atoms, std::size_t k) {
  CenterElement e = zero(atoms);
  e[k] = 1.0;
  return e;
}

CenterElement CenterElement::gaussian(std::size_t atoms, Rng& rng) {
  std::vector<cplx> v(atoms);
  for (auto& x : v) x = rng.complex_normal();
  return CenterElement(std::move(v));
}

bool CenterElement::is_projection(double tol) const {
  return std::all_of(values_.begin(), values_.end(), [tol](cplx x) {
    return std::abs(x) <= tol || std::abs(x - 1.0) <= tol;
  });
}

bool CenterElement::is_selfadjoint(double tol) const {
  return std::all_of(values_.begin(), values_.end(),
                     [tol](cplx x) { return std::abs(x.imag()) <= tol; });
}

double CenterElement::norm() const {
  double s = 0.0;
  for (cplx x : values_) s += std::norm(x);
  return std::sqrt(s);
}

CenterElement CenterElement::adjoint() const {
  CenterElement r = *this;
  for (auto& x : r.values_) x = std::conj(x);
  return r;
}

namespace {

void require_same_size(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw DimensionError(std::string(what) + ": atom counts differ (" +
                         std::to_string(a) + " vs " + std::to_string(b) + ")");
  }
}

template <class Op>
CenterElement zip(const CenterElement& a, const CenterElement& b, Op op,
                  const char* what) {
  require_same_size(a.size(), b.size(), what);
  std::vector<cplx> v(a.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = op(a[k], b[k]);
  return CenterElement(std::move(v));
}

template <class Op>
BlockElement zip(const BlockElement& x, const BlockElement& y, Op op,
                 const char* what) {
  require_same_size(x.size(), y.size(), what);
  std::vector<Block> v(x.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = op(x[k], y[k]);
  return BlockElement(std::move(v));
}

}  // namespace

CenterElement operator*(const CenterElement& a, const CenterElement& b) {
  return zip(a, b, [](cplx x, cplx y) { return x * y; }, "center product");
}
CenterElement operator+(const CenterElement& a, const CenterElement& b) {
  return zip(a, b, [](cplx x, cplx y) { return x + y; }, "center sum");
}
CenterElement operator-(const CenterElement& a, const CenterElement& b) {
  return zip(a, b, [](cplx x, cplx y) { return x - y; }, "center difference");
}
CenterElement operator*(cplx s, const CenterElement& a) {
  CenterElement r = a;
  for (std::size_t k = 0; k < r.size(); ++k) r[k] *= s;
  return r;
}

// --- BlockElement ---------------------------------------------------------

BlockElement BlockElement::zero(std::size_t atoms) {
  return BlockElement(std::vector<Block>(atoms, Block::Zero()));
}

BlockElement BlockElement::identity(std::size_t atoms) {
  return BlockElement(std::vector<Block>(atoms, Block::Identity()));
}

BlockElement BlockElement::gaussian(std::size_t atoms, Rng& rng) {
  std::vector<Block> v(atoms);
  for (auto& b : v) {
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) b(i, j) = rng.complex_normal();
  }
  return BlockElement(std::move(v));
}

BlockElement BlockElement::gaussian_selfadjoint(std::size_t atoms, Rng& rng) {
  BlockElement x = gaussian(atoms, rng);
  for (auto& b : x.blocks_) b = 0.5 * (b + b.adjoint()).eval();
  return x;
}

BlockElement BlockElement::adjoint() const {
  BlockElement r = *this;
  for (auto& b : r.blocks_) b = b.adjoint().eval();
  return r;
}

double BlockElement::projection_residual() const {
  double worst = 0.0;
  for (const Block& b : blocks_) {
    const double idem = (b * b - b).cwiseAbs().maxCoeff();
    const double herm = (b - b.adjoint()).cwiseAbs().maxCoeff();
    worst = std::max({worst, idem, herm});
  }
  return worst;
}

double BlockElement::max_abs() const {
  double m = 0.0;
  for (const Block& b : blocks_) m = std::max(m, b.cwiseAbs().maxCoeff());
  return m;
}

BlockElement operator*(const BlockElement& x, const BlockElement& y) {
  return zip(x, y, [](const Block& a, const Block& b) -> Block { return a * b; },
             "block product");
}
BlockElement operator+(const BlockElement& x, const BlockElement& y) {
  return zip(x, y, [](const Block& a, const Block& b) -> Block { return a + b; },
             "block sum");
}
BlockElement operator-(const BlockElement& x, const BlockElement& y) {
  return zip(x, y, [](const Block& a, const Block& b) -> Block { return a - b; },
             "block difference");
}
BlockElement operator*(cplx s, const BlockElement& x) {
  BlockElement r = x;
  for (std::size_t k = 0; k < r.size(); ++k) r[k] *= s;
  return r;
}

// --- matrix units ---------------------------------------------------------

BlockElement matrix_unit(Unit which, std::size_t atoms) {
  Block b = Block::Zero();
  b(row_of(which), col_of(which)) = 1.0;
  return BlockElement(std::vector<Block>(atoms, b));
}

BlockElement matrix_unit(Unit which, const MeasureSpace& space) {
  return matrix_unit(which, space.size());
}

BlockElement embed_center(const CenterElement& a, Unit which) {
  std::vector<Block> v(a.size(), Block::Zero());
  for (std::size_t k = 0; k < a.size(); ++k) v[k](row_of(which), col_of(which)) = a[k];
  return BlockElement(std::move(v));
}

CenterElement range_projection(const CenterElement& a, double support_tol) {
  std::vector<cplx> out(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    const cplx x = a[k];
    if (std::abs(x.imag()) > support_tol || x.real() < -support_tol) {
      std::ostringstream msg;
      msg << "range_projection: value at atom " << k << " is not nonnegative ("
          << x.real() << (x.imag() < 0 ? "-" : "+") << std::abs(x.imag()) << "i)";
      throw DomainError(msg.str());
    }
    out[k] = x.real() > support_tol ? 1.0 : 0.0;
  }
  return CenterElement(std::move(out));
}

double kappa(double x) {
  const double p = x * (1.0 - x);
  return p > 0.0 ? std::sqrt(p) : 0.0;
}

// --- canonical projections ------------------------------------------------

std::optional<std::string> CanonicalProjection::invariant_violation() const {
  const std::size_t n = pi3.size();
  if (pi1.size() != n || pi2.size() != n || a.size() != n || v.size() != n) {
    return "all components must have one value per atom";
  }
  if (!pi1.is_projection()) return "pi1 is not a projection";
  if (!pi2.is_projection()) return "pi2 is not a projection";
  if (!pi3.is_projection()) return "pi3 is not a projection";
  for (std::size_t k = 0; k < n; ++k) {
    const std::string at = " at atom " + std::to_string(k);
    if (std::abs(a[k].imag()) != 0.0) return "a must be real" + at;
    if (pi3[k] == 1.0) {
      if (pi1[k] != 0.0) return "pi1 <= 1 - pi3 violated" + at;
      if (pi2[k] != 0.0) return "pi2 <= 1 - pi3 violated" + at;
      const double ak = a[k].real();
      if (!(std::min(ak, 1.0 - ak) > tol::kStrictMargin)) {
        return "0 < a < 1 on pi3 violated" + at;
      }
      if (std::abs(std::abs(v[k]) - 1.0) > tol::kUnimodular) {
        return "|v| = 1 on pi3 violated" + at;
      }
    }
  }
  return std::nullopt;
}

void CanonicalProjection::validate() const {
  if (auto why = invariant_violation()) throw ConstructionError("canonical projection: " + *why);
}

CanonicalProjection CanonicalProjection::rank_one(double a, cplx v) {
  return {CenterElement::zero(1), CenterElement::zero(1), CenterElement::one(1),
          CenterElement::constant(1, a), CenterElement::constant(1, v)};
}

CanonicalProjection CanonicalProjection::diagonal(bool pi1, bool pi2) {
  return {CenterElement::constant(1, pi1 ? 1.0 : 0.0),
          CenterElement::constant(1, pi2 ? 1.0 : 0.0), CenterElement::zero(1),
          CenterElement::zero(1), CenterElement::one(1)};
}

BlockElement materialize(const CanonicalProjection& r) {
  r.validate();
  std::vector<Block> out(r.size(), Block::Zero());
  for (std::size_t k = 0; k < r.size(); ++k) {
    Block& b = out[k];
    b(0, 0) = r.pi1[k];
    b(1, 1) = r.pi2[k];
    if (r.pi3[k] == 1.0) {
      const double a = r.a[k].real();
      const double kap = kappa(a);
      b(0, 0) += a;
      b(1, 1) += 1.0 - a;
      b(0, 1) = r.v[k] * kap;
      b(1, 0) = std::conj(r.v[k]) * kap;
    }
  }
  return BlockElement(std::move(out));
}

CanonicalProjection decompose_projection(const BlockElement& p, double tol) {
  const double residual = p.projection_residual();
  if (!(residual <= tol)) {
    std::ostringstream msg;
    msg << "decompose_projection: input is not a projection (max residual "
        << residual << " > " << tol << ")";
    throw DomainError(msg.str());
  }
  const std::size_t n = p.size();
  CanonicalProjection c{CenterElement::zero(n), CenterElement::zero(n),
                        CenterElement::zero(n), CenterElement::zero(n),
                        CenterElement::one(n)};
  for (std::size_t k = 0; k < n; ++k) {
    const Block& b = p[k];
    const double tr = (b(0, 0) + b(1, 1)).real();
    const double off = std::abs(b(0, 1));
    if (off <= tol::kPhaseFloor) {
      // Diagonal block: each diagonal entry is 0 or 1.
      c.pi1[k] = b(0, 0).real() > 0.5 ? 1.0 : 0.0;
      c.pi2[k] = b(1, 1).real() > 0.5 ? 1.0 : 0.0;
      continue;
    }
    if (std::abs(tr - 1.0) > 0.5) {
      throw DomainError("decompose_projection: block at atom " + std::to_string(k) +
                        " has nonzero off-diagonal but trace " + std::to_string(tr));
    }
    const double a = b(0, 0).real();
    if (!(std::min(a, 1.0 - a) > tol::kStrictMargin)) {
      throw DomainError("decompose_projection: rank-one block at atom " +
                        std::to_string(k) + " is too close to diagonal to classify");
    }
    c.pi3[k] = 1.0;
    c.a[k] = a;
    c.v[k] = b(0, 1) / off;
  }
  return c;
}

OrthogonalityVerdict orthogonality_conditions(const CanonicalProjection& p,
                                              const CanonicalProjection& q,
                                              double tol) {
  p.validate();
  q.validate();
  require_same_size(p.size(), q.size(), "orthogonality_conditions");
  OrthogonalityVerdict verdict;
  auto fail = [&](std::size_t k, const char* what) {
    verdict.orthogonal = false;
    verdict.atom = k;
    verdict.failed_condition = what;
    return verdict;
  };
  // tau = components of p, sigma = components of q.
  for (std::size_t k = 0; k < p.size(); ++k) {
    const bool t1 = p.pi1[k] == 1.0, t2 = p.pi2[k] == 1.0, t3 = p.pi3[k] == 1.0;
    const bool s1 = q.pi1[k] == 1.0, s2 = q.pi2[k] == 1.0, s3 = q.pi3[k] == 1.0;
    if (t1 && s1) return fail(k, "tau1 sigma1 = 0");
    if (t2 && s2) return fail(k, "tau2 sigma2 = 0");
    if (t3 && (s1 || s2)) return fail(k, "tau3 sigma_i = 0");
    if (s3 && (t1 || t2)) return fail(k, "tau_i sigma3 = 0");
    if (t3 && s3) {
      if (std::abs(q.v[k] + p.v[k]) > tol) return fail(k, "w pi = -v pi");
      if (std::abs(q.a[k].real() - (1.0 - p.a[k].real())) > tol) {
        return fail(k, "b pi = (1 - a) pi");
      }
    }
  }
  return verdict;
}

namespace {

enum class BlockKind { zero, identity, e11, e22, rank_one };

void set_atom(CanonicalProjection& c, std::size_t k, BlockKind kind, double a, cplx v) {
  c.pi1[k] = (kind == BlockKind::identity || kind == BlockKind::e11) ? 1.0 : 0.0;
  c.pi2[k] = (kind == BlockKind::identity || kind == BlockKind::e22) ? 1.0 : 0.0;
  c.pi3[k] = kind == BlockKind::rank_one ? 1.0 : 0.0;
  c.a[k] = kind == BlockKind::rank_one ? a : 0.0;
  c.v[k] = kind == BlockKind::rank_one ? v : cplx(1.0);
}

CanonicalProjection blank(std::size_t n) {
  return {CenterElement::zero(n), CenterElement::zero(n), CenterElement::zero(n),
          CenterElement::zero(n), CenterElement::one(n)};
}

BlockKind draw_kind(Rng& rng) {
  // Rank-one blocks are the interesting case; give them half the mass.
  const std::uint64_t r = rng.below(8);
  if (r < 4) return BlockKind::rank_one;
  if (r == 4) return BlockKind::zero;
  if (r == 5) return BlockKind::identity;
  if (r == 6) return BlockKind::e11;
  return BlockKind::e22;
}

double draw_a(Rng& rng) { return rng.uniform(1e-3, 1.0 - 1e-3); }

}  // namespace

CanonicalProjection sample_projection(std::size_t atoms, Rng& rng) {
  CanonicalProjection p = blank(atoms);
  for (std::size_t k = 0; k < atoms; ++k) {
    const BlockKind kind = draw_kind(rng);
    const double a = draw_a(rng);
    set_atom(p, k, kind, a, rng.unit_phase());
  }
  return p;
}

ProjectionPair sample_orthogonal_pair(const MeasureSpace& space, Rng& rng) {
  const std::size_t n = space.size();
  CanonicalProjection p = blank(n);
  CanonicalProjection q = blank(n);
  for (std::size_t k = 0; k < n; ++k) {
    const BlockKind pk = draw_kind(rng);
    const double a = draw_a(rng);
    const cplx v = rng.unit_phase();
    set_atom(p, k, pk, a, v);
    // q is zero with probability 1/4, otherwise the largest admissible choice
    // (or a random projection when p vanishes at this atom).
    const bool q_nonzero = rng.below(4) != 0;
    switch (pk) {
      case BlockKind::identity:
        break;
      case BlockKind::zero:
        if (q_nonzero) set_atom(q, k, draw_kind(rng), draw_a(rng), rng.unit_phase());
        break;
      case BlockKind::e11:
        if (q_nonzero) set_atom(q, k, BlockKind::e22, 0.0, 1.0);
        break;
      case BlockKind::e22:
        if (q_nonzero) set_atom(q, k, BlockKind::e11, 0.0, 1.0);
        break;
      case BlockKind::rank_one:
        if (q_nonzero) set_atom(q, k, BlockKind::rank_one, 1.0 - a, -v);
        break;
    }
  }
  ProjectionPair out{p, q, materialize(p), materialize(q)};
  return out;
}

}  // namespace ovf
