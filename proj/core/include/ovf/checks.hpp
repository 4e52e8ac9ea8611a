#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace ovf {

/// One offending evaluation: which identity, where, and how badly.
struct Witness {
  std::string identity;
  std::optional<std::size_t> atom;
  std::string detail;  // basis pair, projection description, ...
  double value = 0.0;  // normalized residual
};

/// Max-residual record for a single identity or condition.
///
/// `observe` keeps the largest residual and its witness; witnesses are only
/// materialized when a residual is a new maximum, so callers pass a factory.
struct CheckRecord {
  std::string name;
  double tolerance = 0.0;
  double max_residual = 0.0;
  std::size_t evaluations = 0;
  std::size_t failures = 0;
  std::optional<Witness> worst;

  CheckRecord() = default;
  CheckRecord(std::string n, double tol) : name(std::move(n)), tolerance(tol) {}

  bool pass() const { return failures == 0; }

  template <class WitnessFactory>
  void observe(double residual, WitnessFactory&& make_witness) {
    ++evaluations;
    // NaN must never pass.
    const bool bad = !(residual <= tolerance);
    if (bad) ++failures;
    if (bad && !worst_failed_ ) {
      worst_failed_ = true;
      max_residual = residual;
      worst = make_witness();
      worst->value = residual;
      return;
    }
    if ((bad == worst_failed_) && (residual > max_residual || !worst)) {
      max_residual = residual;
      worst = make_witness();
      worst->value = residual;
    }
  }

 private:
  bool worst_failed_ = false;
};

bool all_pass(const std::vector<CheckRecord>& records);

/// |diff| / max(scale, floor).
double normalized_residual(double abs_diff, double scale, double floor);

}  // namespace ovf
