#pragma once

// Building vector fields: synthesis from four commutative reductions, the
// per-atom coordinate families, direct-sum assembly, and the Gram-factorized
// generator for a prescribed stationary pair.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ovf/ovf_core.hpp"

namespace ovf {

struct SynthesisOptions {
  bool check = true;
  double tol = tol::kIdentity;
  std::size_t trials = 100;
  std::uint64_t seed = 0;
};

/// F(pi_k epsilon_ij) := F_ij(pi_k). With `check`, the reduction identities
/// (i)-(iv) are verified first; a failure throws InconsistentFieldError naming
/// the identity and atom.
VectorFieldTable synthesize(const ReductionSet& tables, const SynthesisOptions& options = {});
VectorFieldTable synthesize(const std::array<CenterFieldTable, 4>& tables,
                            const SynthesisOptions& options = {});

/// Per-atom coordinates of a rank-2 factor.
struct FactorCoordinates {
  double alpha = 0.5;
  cplx omega = 1.0;
  cplx xi = 0.0;
  cplx xi3 = 0.0, xi4 = 0.0, eta3 = 0.0, eta4 = 0.0;

  cplx zeta() const;
  /// Largest residual of the norm and bilinear constraints and |omega| = 1.
  double constraint_residual() const;
  std::optional<std::string> invariant_violation(double tol = 1e-12) const;

  /// Random coordinates satisfying the constraints; ConstructionError after
  /// `max_retries` infeasible magnitude draws.
  static FactorCoordinates sample(Rng& rng, std::size_t max_retries = 1000);
};

/// The five per-atom vectors of a factor in C^4.
struct AtomVectors {
  Eigen::Vector4cd unit;  // F(I)
  Eigen::Vector4cd f11, f22, f12, f21;

  const Eigen::Vector4cd& operator[](Unit u) const;
};

AtomVectors generate_rank2_atom(const FactorCoordinates& c);
/// F(I) = F11 = e0, F22 = 0, F12 = sqrt(split) e1, F21 = sqrt(1 - split) e2.
AtomVectors generate_rank1_atom(double split);

enum class AtomCase { rank1, rank2 };
std::string case_name(AtomCase c);
AtomCase parse_case(std::string_view s);

struct GeneratorSpec {
  std::size_t atoms = 1;
  std::vector<AtomCase> cases;  // per atom
  std::uint64_t seed = 0;
  std::vector<std::optional<Block>> twists;  // per atom, empty = none
  std::vector<double> splits;                // per atom, used by rank1
  std::vector<double> weights;               // per atom, empty = all 1
  /// Fixed coordinates for rank2 atoms; unset entries are sampled.
  std::vector<std::optional<FactorCoordinates>> coordinates;

  MeasureSpace space() const;
  std::optional<std::string> invariant_violation() const;
  void validate() const;
};

/// Spec with per-atom cases drawn from `case_tag` (rank1 | rank2 | mixed).
/// Mixed puts a rank-1 atom first and a rank-2 atom second, the rest random.
/// Twists and weights (uniform on [0.25, 2]) come from separate streams.
GeneratorSpec make_spec(std::size_t atoms, std::string_view case_tag, std::uint64_t seed,
                        bool twist = false, bool random_weights = false,
                        std::optional<double> split = std::nullopt);

/// Haar-like 2x2 unitary from normalized Gaussian columns.
Block random_unitary(Rng& rng);

/// Table of F'(x) = F(u x u*) at one atom from the table of F.
std::array<Eigen::Vector4cd, 4> twist_atom(const std::array<Eigen::Vector4cd, 4>& table,
                                           const Block& u);

/// Direct sum of per-atom factors in C^{4n}, each scaled by sqrt(nu_k).
VectorFieldTable assemble(const GeneratorSpec& spec);

/// Isometric compression onto the range of the table (rank by relative SVD
/// cutoff `rel_tol`). Inner products between table vectors are preserved.
VectorFieldTable compress_range(const VectorFieldTable& F, double rel_tol = 1e-12);

/// Field with <F(x), F(y)> = phi(y* x) + psi(x y*) on all basis elements,
/// from an eigendecomposition of the Gram matrix.
VectorFieldTable generate_from_stationary_pair(const FunctionalDensity& phi,
                                               const FunctionalDensity& psi);

/// Random positive densities, one Wishart-like 2x2 block per atom, scaled so
/// that tr(phi_k) + tr(psi_k) = 1. `rank_one` forces rank-1 blocks.
std::pair<FunctionalDensity, FunctionalDensity> sample_stationary_pair(const MeasureSpace& space,
                                                                       Rng& rng,
                                                                       bool rank_one = false);

}  // namespace ovf
