#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "ovf/errors.hpp"
#include "ovf/refinement.hpp"
#include "ovf/stationarity.hpp"
#include "support.hpp"

using namespace ovf;

namespace {

const std::vector<std::string> kProfiles = {"profile_constant", "profile_linear",
                                            "profile_varying_trace", "profile_zero_phi12",
                                            "profile_tent"};

ScalarFieldProfile cubic_profile() {
  ScalarFieldProfile p;
  p.rho11 = PiecewisePolynomial({0.0, 1.0}, {{0.3, 0.0, 0.0, 0.4}});
  p.rho22 = PiecewisePolynomial({0.0, 1.0}, {{0.7, 0.0, 0.0, -0.4}});
  p.r21 = PiecewisePolynomial::constant(0.5);
  p.r12 = PiecewisePolynomial::constant(0.5);
  p.phi12 = {PiecewisePolynomial::constant(0.0), {0.0}};
  return p;
}

std::vector<double> sorted(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

TEST_CASE("piecewise polynomials evaluate and integrate") {
  const PiecewisePolynomial p({0.0, 0.5, 1.0}, {{0.0, 1.0}, {1.0, 0.0, -1.0}});
  CHECK(p(0.25) == 0.25);
  CHECK(p(0.75) == Catch::Approx(1.0 - 0.5625));
  CHECK(p.integral(0.0, 0.5) == Catch::Approx(0.125));
  CHECK(p.integral(0.5, 1.0) == Catch::Approx(0.5 - (1.0 - 0.125) / 3.0));
  CHECK(p.integral(0.2, 0.2) == 0.0);
  CHECK(p.max_value() == Catch::Approx(0.75));
  CHECK(p.min_value() == 0.0);
  CHECK_THROWS_AS(PiecewisePolynomial({0.0, 0.4}, {{1.0}}), ConstructionError);
  CHECK_THROWS_AS(PiecewisePolynomial({0.0, 0.6, 0.5, 1.0}, {{1.0}, {1.0}, {1.0}}), ConstructionError);
}

TEST_CASE("integrals over tiny intervals keep relative accuracy") {
  const PiecewisePolynomial p = PiecewisePolynomial::linear(0.0, 1.0);
  const double a = 0.7, b = a + 1e-12, h = b - a;
  const double exact = h * (a + 0.5 * h);
  CHECK(std::abs(p.integral(a, b) - exact) <= 1e-14 * exact);
}

TEST_CASE("level crossings") {
  SECTION("linear") {
    const auto c = PiecewisePolynomial::linear(0.0, 1.0).crossings(0.5);
    REQUIRE(c.size() == 1);
    CHECK(c[0] == 0.5);
  }
  SECTION("cubic") {
    const auto c = PiecewisePolynomial({0.0, 1.0}, {{0.0, 0.0, 0.0, 1.0}}).crossings(0.125);
    REQUIRE(c.size() == 1);
    CHECK(std::abs(c[0] - 0.5) <= 1e-12);
  }
  SECTION("quadratic with two roots") {
    const auto c = sorted(PiecewisePolynomial({0.0, 1.0}, {{0.25, -1.0, 1.0}}).crossings(0.04));
    REQUIRE(c.size() == 2);
    CHECK(std::abs(c[0] - 0.3) <= 1e-12);
    CHECK(std::abs(c[1] - 0.7) <= 1e-12);
  }
  SECTION("quartic touching and crossing") {
    // (w - 0.25)^2 (w - 0.75)^2 has double roots; level 0 is touched, not crossed.
    const double a = 0.25, b = 0.75;
    const std::vector<double> co = {a * a * b * b, -2 * a * b * (a + b),
                                    (a + b) * (a + b) + 2 * a * b, -2 * (a + b), 1.0};
    const PiecewisePolynomial q({0.0, 1.0}, {co});
    const auto c = sorted(q.crossings(1e-4));
    REQUIRE(c.size() == 4);
    for (double w : c) CHECK(std::abs(q(w) - 1e-4) <= 1e-12);
  }
  SECTION("jumps are left to the breakpoints") {
    const PiecewisePolynomial s({0.0, 0.4, 1.0}, {{0.1}, {0.9}});
    CHECK(s.crossings(0.5).empty());
  }
}

TEST_CASE("identity field splits at one half") {
  ScalarFieldProfile p;
  p.rho11 = PiecewisePolynomial::linear(0.0, 1.0);
  p.rho22 = PiecewisePolynomial::linear(1.0, -1.0);
  p.r21 = PiecewisePolynomial::constant(0.5);
  p.r12 = PiecewisePolynomial::constant(0.5);
  p.phi12 = {PiecewisePolynomial::constant(0.0), {0.0}};
  p.validate();
  const Partition part = build_partition(p, 2);
  REQUIRE(part.cells.size() == 2);
  REQUIRE(part.pieces.size() == 2);
  CHECK(part.pieces[0].a == 0.0);
  CHECK(part.pieces[0].b == 0.5);
  CHECK(part.pieces[1].b == 1.0);
  CHECK(part.cells[part.cell_at(0.49)].index[0] == 0);
  CHECK(part.cells[part.cell_at(0.5)].index[0] == 1);
  CHECK(part.cells[part.cell_at(1.0)].index[0] == 1);
  CHECK(part.cells[part.cell_at(0.2)].rho11 == Catch::Approx(0.25));
  CHECK(part.cells[part.cell_at(0.7)].rho11 == Catch::Approx(0.75));
}

TEST_CASE("constant profile gives one cell and no error") {
  const ScalarFieldProfile p = test::profile("profile_constant");
  for (int n : {1, 2, 7, 64}) {
    const Partition part = build_partition(p, n);
    CHECK(part.cells.size() == 1);
    const SimpleFunction f = phi_delta(part);
    CHECK(f(0.3) == Catch::Approx(p.phi_limit(0.3)).epsilon(1e-14));
  }
  const ConvergenceReport r = convergence_report(p, {2, 8, 32});
  for (const LevelReport& l : r.levels) {
    CHECK(l.sup_error <= 1e-15);
    CHECK(l.l1_error <= 1e-15);
  }
  CHECK(r.pass());
}

TEST_CASE("partitions cover the interval and respect the cell bounds") {
  std::vector<ScalarFieldProfile> all;
  for (const auto& name : kProfiles) all.push_back(test::profile(name));
  all.push_back(cubic_profile());
  for (const ScalarFieldProfile& p : all) {
    for (int n : {1, 3, 8, 25, 64}) {
      const Partition part = build_partition(p, n);
      CHECK(std::abs(part.total_measure() - 1.0) <= 1e-12);
      CHECK(part.pieces.front().a == 0.0);
      CHECK(part.pieces.back().b == 1.0);
      for (std::size_t i = 1; i < part.pieces.size(); ++i) {
        CHECK(part.pieces[i].a == part.pieces[i - 1].b);
      }
      const SimpleFunction f = phi_delta(part);
      for (std::size_t c = 0; c < part.cells.size(); ++c) {
        const Cell& cell = part.cells[c];
        CHECK(cell.measure > 0.0);
        const double v = f.values[c];
        CHECK(v >= std::max(0.0, cell.r21 - cell.rho22) - 1e-15);
        CHECK(v <= std::min(cell.rho11, cell.r21) + 1e-15);
        for (const auto& [a, b] : cell.intervals) {
          for (int s = 0; s <= 8; ++s) {
            const double w = a + (b - a) * s / 8.0;
            CHECK(std::abs(p.rho11(w) - cell.rho11) < 1.0 / n);
            CHECK(std::abs(p.r21(w) - cell.r21) < 1.0 / n);
            CHECK(std::abs(p.phi12.abs(w) - cell.phi12_abs) < 1.0 / n);
          }
        }
      }
    }
  }
}

TEST_CASE("sup error refines monotonically") {
  for (const auto& name : kProfiles) {
    const ConvergenceReport r = convergence_report(test::profile(name), {2, 4, 8, 16, 32, 64});
    INFO(name);
    CHECK(r.pass());
    CHECK(r.limit_infeasible == 0);
    CHECK(r.integral_limit <= r.integral_dominant + 1e-12);
    for (std::size_t i = 2; i < r.levels.size(); i += 2) {
      CHECK(r.levels[i].sup_error <= r.levels[i - 2].sup_error + 1e-15);
    }
    for (const LevelReport& l : r.levels) {
      CHECK(l.bound_violations == 0);
      CHECK(l.oscillation_violations == 0);
      CHECK(l.domination_violations == 0);
      CHECK(l.measure_defect <= 1e-12);
    }
  }
}

TEST_CASE("linear profile converges at first order") {
  const ConvergenceReport r = convergence_report(test::profile("profile_linear"), {4, 16, 64});
  REQUIRE(r.levels.size() == 3);
  for (std::size_t i = 1; i < 3; ++i) {
    const double ratio = r.levels[i].l1_error / r.levels[i - 1].l1_error;
    CHECK(ratio >= 0.15);
    CHECK(ratio <= 0.35);
    CHECK(r.levels[i].sup_error < r.levels[i - 1].sup_error);
  }
  CHECK(r.fitted_constant > 0.0);
  CHECK(r.rate_within_factor3);
}

TEST_CASE("limit solves the pointwise quadratic") {
  const ScalarFieldProfile p = test::profile("profile_tent");
  for (int i = 0; i <= 100; ++i) {
    const double w = i / 100.0;
    const double a = std::abs(p.phi12(w));
    CHECK(p.phi_limit(w) == Catch::Approx(phi0(p.r21(w), p.rho22(w), a)).epsilon(1e-14));
  }
}

TEST_CASE("inconsistent profiles are rejected") {
  ScalarFieldProfile p = test::profile("profile_linear");
  p.r12 = PiecewisePolynomial::constant(0.9);
  CHECK(p.invariant_violation().has_value());
  CHECK_THROWS_AS(p.validate(), ConstructionError);
  p = test::profile("profile_linear");
  p.phi12.modulus = PiecewisePolynomial::constant(0.5);
  CHECK(p.invariant_violation().has_value());
}
