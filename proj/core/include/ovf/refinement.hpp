#pragma once

// Continuous-parameter model on Omega = [0, 1] with Lebesgue measure:
// piecewise-polynomial density fields, level-set partitions, the per-cell
// approximants phi^(n) and their convergence to the pointwise closed form.

#include <array>
#include <complex>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ovf {

/// Piecewise polynomial on [0, 1]; piece i lives on [breaks[i], breaks[i+1]]
/// with coefficients in ascending powers of the global coordinate.
class PiecewisePolynomial {
 public:
  PiecewisePolynomial() = default;
  PiecewisePolynomial(std::vector<double> breaks, std::vector<std::vector<double>> coeffs);
  static PiecewisePolynomial constant(double c);
  static PiecewisePolynomial linear(double c0, double c1);

  const std::vector<double>& breaks() const { return breaks_; }
  const std::vector<std::vector<double>>& coeffs() const { return coeffs_; }
  std::size_t pieces() const { return coeffs_.size(); }
  std::size_t piece_of(double w) const;

  double operator()(double w) const;
  double eval_piece(std::size_t i, double w) const;
  /// Integral over [a, b] within [0, 1].
  double integral(double a, double b) const;
  double integral_piece(std::size_t i, double a, double b) const;
  /// Points where some piece equals `level`. Jumps at breakpoints are not
  /// reported (partitions cut at every breakpoint anyway). Unsorted, may repeat.
  std::vector<double> crossings(double level) const;
  double max_value() const;
  double min_value() const;

 private:
  std::vector<double> breaks_;
  std::vector<std::vector<double>> coeffs_;
};

/// Complex field given by a nonnegative modulus and a constant phase per piece.
struct PhaseModulusField {
  PiecewisePolynomial modulus;
  std::vector<double> phase;  // radians, one per modulus piece

  std::complex<double> operator()(double w) const;
  double abs(double w) const { return modulus(w); }
};

struct ScalarFieldProfile {
  PiecewisePolynomial rho11, rho22, r21, r12;
  PhaseModulusField phi12;

  /// Checks on a dense grid plus breakpoints: sum rule, nonnegativity and the
  /// estimate |phi12|^2 (rho11 + rho22)^2 <= r12 r21 rho11 rho22.
  std::optional<std::string> invariant_violation(std::size_t grid = 4097) const;
  void validate() const;

  /// phi0 of the exact fields at w.
  double phi_limit(double w) const;
  std::vector<double> all_breaks() const;
};

struct Cell {
  std::array<long, 4> index{};  // bins of rho11, r21, |phi12|, rho22
  std::vector<std::pair<double, double>> intervals;
  double measure = 0.0;
  double rho11 = 0.0, rho22 = 0.0, r21 = 0.0, r12 = 0.0;
  double phi12_abs = 0.0;             // cell average of |phi12|
  std::complex<double> phi12 = 0.0;   // cell average of phi12
};

struct Partition {
  int level = 1;
  std::vector<Cell> cells;
  /// Elementary intervals (a, b, cell index), sorted and covering [0, 1].
  struct Piece {
    double a, b;
    std::size_t cell;
  };
  std::vector<Piece> pieces;

  std::size_t cell_at(double w) const;
  double total_measure() const;
};

Partition build_partition(const ScalarFieldProfile& p, int n);

/// Simple function constant on the cells of a partition.
struct SimpleFunction {
  const Partition* partition = nullptr;
  std::vector<double> values;  // per cell

  double operator()(double w) const { return values[partition->cell_at(w)]; }
};

/// Per-cell phi0 of the averages.
SimpleFunction phi_delta(const Partition& part);

struct LevelReport {
  int level = 0;
  std::size_t cells = 0;
  double sup_error = 0.0;
  double l1_error = 0.0;
  std::size_t bound_violations = 0;        // the per-cell box on phi^(n)
  std::size_t oscillation_violations = 0;  // in-cell deviation >= 1/n
  std::size_t domination_violations = 0;   // phi^(n) > min(rho11, r21) + 2/n
  double measure_defect = 0.0;             // |total length - 1|
};

struct ConvergenceReport {
  std::vector<LevelReport> levels;
  std::size_t limit_infeasible = 0;  // grid points where phi_limit fails the inequalities
  double integral_limit = 0.0;       // int phi
  double integral_dominant = 0.0;    // int min(rho11, r21)
  bool monotone = true;              // sup errors non-increasing
  double fitted_constant = 0.0;      // geometric mean of sup_error * n
  bool rate_within_factor3 = true;

  bool bounds_ok() const;
  bool pass() const { return bounds_ok() && monotone; }
};

ConvergenceReport convergence_report(const ScalarFieldProfile& p, const std::vector<int>& levels);

}  // namespace ovf
