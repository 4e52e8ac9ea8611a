#include <catch_amalgamated.hpp>

#include "ovf/errors.hpp"
#include "ovf/ovf_core.hpp"
#include "ovf/synthesis.hpp"
#include "support.hpp"

using namespace ovf;

namespace {

BlockElement single(std::size_t n, std::size_t k, Unit u) {
  BlockElement x = BlockElement::zero(n);
  x[k](row_of(u), col_of(u)) = 1.0;
  return x;
}

}  // namespace

TEST_CASE("evaluate reads the table and is linear") {
  const VectorFieldTable F = test::instance(4, 1);
  for (std::size_t k = 0; k < 4; ++k) {
    for (Unit u : kUnits) CHECK(evaluate(F, single(4, k, u)) == F.entry(k, u));
  }
  Vector sum = Vector::Zero(F.hilbert_dim());
  for (std::size_t k = 0; k < 4; ++k) sum += F.entry(k, Unit::e11) + F.entry(k, Unit::e22);
  CHECK((evaluate(F, BlockElement::identity(4)) - sum).norm() < 1e-15);

  Rng rng(2);
  for (int t = 0; t < 50; ++t) {
    const BlockElement x = BlockElement::gaussian(4, rng), y = BlockElement::gaussian(4, rng);
    const cplx c = rng.complex_normal();
    const Vector lhs = evaluate(F, x + c * y);
    const Vector rhs = evaluate(F, x) + c * evaluate(F, y);
    CHECK((lhs - rhs).norm() <= 1e-13 * (1.0 + lhs.norm()));
  }
}

TEST_CASE("reductions reassemble evaluate") {
  const VectorFieldTable F = test::instance(3, 4);
  const ReductionSet R = reductions(F);
  CHECK((R[Unit::e11].at_unit() - evaluate(F, matrix_unit(Unit::e11, 3))).norm() < 1e-15);

  Rng rng(5);
  const BlockElement x = BlockElement::gaussian(3, rng);
  Vector sum = Vector::Zero(F.hilbert_dim());
  for (Unit u : kUnits) {
    std::vector<cplx> entries;
    for (std::size_t k = 0; k < 3; ++k) entries.push_back(x.entry(k, u));
    sum += R[u].evaluate(CenterElement(entries));
  }
  CHECK((sum - evaluate(F, x)).norm() < 1e-14);
}

TEST_CASE("disjoint supports give orthogonal reductions") {
  const VectorFieldTable F = test::instance(6, 8);
  const ReductionSet R = reductions(F);
  Rng rng(3);
  for (int t = 0; t < 100; ++t) {
    CenterElement sigma = CenterElement::zero(6), pi = CenterElement::zero(6);
    for (std::size_t k = 0; k < 6; ++k) {
      const auto r = rng.below(3);
      if (r == 1) sigma[k] = 1.0;
      if (r == 2) pi[k] = 1.0;
    }
    for (Unit u : kUnits) {
      CHECK(std::abs(inner(R[u].evaluate(sigma), R[u].evaluate(pi))) <= 1e-10);
    }
  }
}

TEST_CASE("rho of a rank-one factor") {
  GeneratorSpec spec;
  spec.atoms = 1;
  spec.cases = {AtomCase::rank1};
  spec.splits = {0.3};
  const VectorFieldTable F = assemble(spec);
  const FunctionalDensity rho = rho_functional(F);
  CHECK(std::abs(rho[0](0, 0) - 1.0) < 1e-15);
  CHECK(std::abs(rho[0](1, 1)) < 1e-15);
  CHECK(std::abs(rho[0](0, 1)) < 1e-15);
}

TEST_CASE("rho21 vanishes when F(e12) is orthogonal to F(I)") {
  // Rank-two factors have F12 orthogonal to F(I) = (1, 0, 0, 0).
  const VectorFieldTable F = assemble(make_spec(3, "rank2", 4));
  const FunctionalDensity rho = rho_functional(F);
  for (std::size_t k = 0; k < 3; ++k) CHECK(std::abs(rho[k](1, 0)) < 1e-15);
}

TEST_CASE("rho trace pairing reproduces <F(x), F(I)>") {
  const VectorFieldTable F = test::instance(5, 12, true, true);
  const FunctionalDensity rho = rho_functional(F);
  const Vector fi = evaluate(F, BlockElement::identity(5));
  Rng rng(9);
  for (int t = 0; t < 100; ++t) {
    const BlockElement x = BlockElement::gaussian(5, rng);
    const cplx direct = inner(evaluate(F, x), fi);
    const cplx paired = rho.apply(x);
    CHECK(std::abs(direct - paired) <= 1e-12 * std::max(1.0, std::abs(direct)));
  }
}

TEST_CASE("density report on generated fields") {
  const VectorFieldTable F = test::instance(8, 21, true, true);
  const DensityReport d = r_densities(F);
  CHECK(d.consistent());
  for (std::size_t k = 0; k < 8; ++k) {
    // rho_ii and r_ii come from the same inner product.
    CHECK(d.rho[k](0, 0).real() == d.r[k][slot(Unit::e11)]);
    CHECK(d.rho[k](1, 1).real() == d.r[k][slot(Unit::e22)]);
    const double sum = d.r[k][slot(Unit::e12)] + d.r[k][slot(Unit::e21)];
    CHECK(std::abs(sum - d.rho[k].trace().real()) <= 1e-10);
  }
  const DensityReport z = r_densities(VectorFieldTable::zero(MeasureSpace::uniform(2), 8));
  CHECK(z.consistent());
  for (std::size_t k = 0; k < 2; ++k) {
    CHECK(z.rho[k].norm() == 0.0);
    for (double r : z.r[k]) CHECK(r == 0.0);
  }
}

TEST_CASE("orthogonality verifier passes generated and zero fields") {
  VerifyOptions vo;
  vo.samples = 1000;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const OrthogonalityReport rep = verify_orthogonality(test::instance(4, seed), vo);
    CHECK(rep.pass());
    CHECK(rep.sampled.evaluations == 1000);
  }
  CHECK(verify_orthogonality(VectorFieldTable::zero(MeasureSpace::uniform(3), 12), vo).pass());
}

TEST_CASE("perturbing F(e12) by 0.1 F(e11) is caught with a witness") {
  const VectorFieldTable F = test::instance(4, 17);
  const std::size_t k = 2;
  const VectorFieldTable G =
      F.with_entry(k, Unit::e12, F.entry(k, Unit::e12) + 0.1 * F.entry(k, Unit::e11));
  const OrthogonalityReport rep = verify_orthogonality(G);
  CHECK_FALSE(rep.pass());
  REQUIRE(rep.sweep.worst);
  CHECK(rep.sweep.worst->atom == k);
  CHECK(rep.sweep.worst->detail.find("atom 2") != std::string::npos);

  const IdentityReport ids = verify_prop1(G, {});
  const CheckRecord* iv = ids.find("off-diagonal balance: <F12(pi),F11(1)> = <F22(1),F21(pi)>");
  REQUIRE(iv);
  CHECK_FALSE(iv->pass());
  CHECK(iv->worst->atom == k);
}

TEST_CASE("identity suite passes on generated fields") {
  VerifyOptions vo;
  vo.trials = 100;
  for (std::size_t atoms : {1u, 4u, 16u}) {
    const IdentityReport rep = verify_prop1(test::instance(atoms, 40 + atoms, true, true), vo);
    for (const auto& c : rep.checks) {
      INFO(c.name << " max " << c.max_residual);
      CHECK(c.pass());
    }
  }
}

TEST_CASE("symmetric off-diagonal identity specializes to a = 1 and a = i") {
  const VectorFieldTable F = test::instance(3, 6);
  const ReductionSet R = reductions(F);
  const CenterElement pi({1.0, 0.0, 1.0});
  const cplx i(0.0, 1.0);

  const auto [l1, r1] = symmetric_offdiagonal_sides(R, CenterElement::one(3), pi);
  const Vector sum = R[Unit::e12].evaluate(pi) + R[Unit::e21].evaluate(pi);
  CHECK(std::abs(l1 - inner(sum, R[Unit::e11].evaluate(pi))) < 1e-15);
  CHECK(std::abs(r1 - inner(R[Unit::e22].evaluate(pi), sum)) < 1e-15);

  const auto [li, ri] = symmetric_offdiagonal_sides(R, CenterElement::constant(3, i), pi);
  const Vector diff = R[Unit::e12].evaluate(pi) - R[Unit::e21].evaluate(pi);
  CHECK(std::abs(li - i * inner(diff, R[Unit::e11].evaluate(pi))) < 1e-15);
  CHECK(std::abs(ri - (-i) * inner(R[Unit::e22].evaluate(pi), diff)) < 1e-15);
  CHECK(std::abs(l1 - r1) < 1e-12);
  CHECK(std::abs(li - ri) < 1e-12);
}

TEST_CASE("module property with a = b and equal indices is a norm identity") {
  const VectorFieldTable F = test::instance(4, 19);
  const ReductionSet R = reductions(F);
  Rng rng(4);
  const CenterElement a = CenterElement::gaussian(4, rng);
  for (Unit u : kUnits) {
    const double lhs = R[u].evaluate(a).squaredNorm();
    const cplx rhs = inner(R[u].evaluate(a.adjoint() * a), R[u].at_unit());
    CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, lhs));
  }
}

TEST_CASE("dimension mismatches are rejected") {
  const VectorFieldTable F = test::instance(2, 1);
  CHECK_THROWS_AS(evaluate(F, BlockElement::identity(3)), DimensionError);
  CHECK_THROWS_AS(VectorFieldTable(MeasureSpace::uniform(2), Matrix::Zero(4, 7)), DimensionError);
  CHECK_THROWS_AS(F.with_entry(0, Unit::e11, Vector::Zero(3)), DimensionError);
}
