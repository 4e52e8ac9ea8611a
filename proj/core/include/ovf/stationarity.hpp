#pragma once

// Stationary pairs (phi, psi) with <F(x), F(y)> = phi(y* x) + psi(x y*):
// the per-factor closed form, atom-wise assembly and verification.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "ovf/ovf_core.hpp"

namespace ovf {

/// Larger root of t (t + rho22 - r21) = |phi12|^2.
double phi0(double r21, double rho22, double phi12_abs);

/// Per-atom data entering the factor solution.
struct FactorData {
  double rho11 = 0.0, rho22 = 0.0;
  cplx rho12 = 0.0;
  double r12 = 0.0, r21 = 0.0;
  cplx phi12 = 0.0;  // <F21(pi_k), F22(1)> / nu_k
  Block basis_unitary = Block::Identity();

  double trace() const { return rho11 + rho22; }
  /// r12 + r21 - rho11 - rho22.
  double sum_rule_residual() const;
  /// r12 r21 rho11 rho22 - |phi12|^2 (rho11 + rho22)^2; nonnegative for field data.
  double estimate_slack() const;
};

struct Feasibility {
  /// [0]: box (lower and upper), [1]: |phi12|^2 <= phi (phi + rho22 - r21),
  /// [2]: |rho12 - phi12|^2 <= (rho11 - phi)(r21 - phi). Nonnegative = holds.
  std::array<double, 3> slack{};
  bool holds(double tol) const;
};
Feasibility check_feasibility(const FactorData& f, double phi);

enum class FactorCase { rank1, rank2 };
std::string factor_case_name(FactorCase c);

struct FactorSolution {
  FactorCase which = FactorCase::rank2;
  double phi0 = 0.0;  // the scalar phi_11 in the solving basis
  Feasibility feasibility;
  Block phi = Block::Zero();  // conjugated back by basis_unitary
  Block psi = Block::Zero();
};

/// Closed-form pair for one atom. Expects data in the solving basis (rho12
/// negligible, mass in rho11 for rank 1). InconsistentFieldError if the
/// result is infeasible.
FactorSolution stationarize_factor(const FactorData& f);

/// Eigendecomposition of a Hermitian 2x2 matrix: eigenvalues in descending
/// order, eigenvector columns with first nonzero component real nonnegative.
std::pair<Eigen::Vector2d, Block> diagonalize_hermitian(const Block& h);

/// F'(x) = F(u x u*), with u given per atom.
VectorFieldTable twist_field(const VectorFieldTable& F, const std::vector<Block>& unitaries);

/// Factor data of every atom of F (basis_unitary left at identity).
std::vector<FactorData> harvest_factor_data(const VectorFieldTable& F);

struct StationaryPair {
  FunctionalDensity phi;
  FunctionalDensity psi;
};

struct AtomDiagnostic {
  std::size_t atom = 0;
  bool diagonalized = false;
  FactorData data;  // in the solving basis
  FactorSolution solution;
};

struct StationarityReport {
  double max_abs_residual = 0.0;
  double max_scaled_residual = 0.0;  // abs / max(1, scale^2)
  double tolerance = tol::kStationarity;
  std::optional<Witness> worst;
  double sum_residual = 0.0;  // max entry of |phi + psi - rho|
  double min_eigenvalue_phi = 0.0;
  double min_eigenvalue_psi = 0.0;
  std::size_t pairs = 0;

  bool pass() const;
};

/// <F(x),F(y)> = phi(y*x) + psi(xy*) over all pairs of basis elements.
StationarityReport check_stationarity(const VectorFieldTable& F, const StationaryPair& pair,
                                      double tol = tol::kStationarity);

struct StationarizeOptions {
  bool verify_input = true;
  VerifyOptions verify;
  double tol = tol::kStationarity;
  bool throw_on_failure = true;
};

struct StationarizeResult {
  StationaryPair pair;
  std::vector<AtomDiagnostic> atoms;
  StationarityReport report;
};

/// Atom-wise stationary pair. Input verification failures and (with
/// `throw_on_failure`) a failing final check raise InconsistentFieldError.
StationarizeResult stationarize(const VectorFieldTable& F, const StationarizeOptions& options = {});

/// Brute-force scan of the box [max(0, r21 - rho22), min(rho11, r21)].
struct GridOracle {
  double lo = 0.0, hi = 0.0, step = 0.0;
  std::size_t points = 0;
  std::size_t feasible = 0;
  std::optional<double> first_feasible, last_feasible;
  /// Some feasible grid point lies within one step of phi0.
  bool contains_phi0 = false;
};
GridOracle grid_oracle(const FactorData& f, double step = 1e-4);

}  // namespace ovf
