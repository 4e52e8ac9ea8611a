#include <catch_amalgamated.hpp>

#include <cmath>

#include "ovf/errors.hpp"
#include "ovf/stationarity.hpp"
#include "ovf/synthesis.hpp"
#include "support.hpp"

using namespace ovf;

namespace {

bool all_pass_on(const VectorFieldTable& F, double tol) {
  VerifyOptions vo;
  vo.tol = tol;
  return verify_orthogonality(F, vo).pass() && verify_prop1(F, vo).pass();
}

FactorCoordinates worked_coordinates() {
  FactorCoordinates c;
  c.alpha = 0.5;
  c.omega = 1.0;
  c.xi = 0.0;
  c.xi3 = std::sqrt(0.5);
  c.eta4 = std::sqrt(0.5);
  return c;
}

}  // namespace

TEST_CASE("synthesis reproduces the table bit for bit") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const VectorFieldTable F = test::instance(1 + seed % 5, seed, true, seed % 2 == 0);
    const VectorFieldTable G = synthesize(reductions(F));
    CHECK(G.values() == F.values());
    CHECK(G.space() == F.space());
  }
}

TEST_CASE("synthesized fields from generator tables are orthogonal") {
  const VectorFieldTable F = test::instance(6, 33);
  const ReductionSet R = reductions(F);
  const VectorFieldTable G = synthesize(R.tables);
  CHECK(verify_orthogonality(G).pass());
}

TEST_CASE("tables with a broken relation are rejected by name") {
  const VectorFieldTable F = test::instance(4, 8);
  ReductionSet R = reductions(F);
  Matrix v12 = R[Unit::e12].values();
  v12.col(1) += 0.1 * R[Unit::e11].values().col(1);
  R.tables[slot(Unit::e12)] = CenterFieldTable(F.space(), v12);
  try {
    synthesize(R);
    FAIL("expected rejection");
  } catch (const InconsistentFieldError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("off-diagonal balance") != std::string::npos);
    CHECK(msg.find("atom w1") != std::string::npos);
  }
  SynthesisOptions unchecked;
  unchecked.check = false;
  const OrthogonalityReport rep = verify_orthogonality(synthesize(R, unchecked));
  CHECK_FALSE(rep.pass());
  REQUIRE(rep.sweep.worst);
  CHECK(rep.sweep.worst->detail.find("atom 1") != std::string::npos);
}

TEST_CASE("mismatched tables are rejected") {
  const ReductionSet a = reductions(test::instance(2, 1));
  const ReductionSet b = reductions(test::instance(3, 1));
  ReductionSet mixed = a;
  mixed.tables[2] = b.tables[2];
  CHECK_THROWS_AS(synthesize(mixed), DimensionError);
}

TEST_CASE("the worked rank-two factor") {
  const FactorCoordinates c = worked_coordinates();
  CHECK(std::abs(c.zeta() - 0.5) < 1e-16);
  const AtomVectors v = generate_rank2_atom(c);
  CHECK(v.unit == Eigen::Vector4cd(1.0, 0.0, 0.0, 0.0));
  CHECK(std::abs(v.f11(1) - 0.5) < 1e-16);
  CHECK(std::abs(v.f22(1) + 0.5) < 1e-16);

  GeneratorSpec spec;
  spec.atoms = 1;
  spec.cases = {AtomCase::rank2};
  spec.coordinates = {c};
  const VectorFieldTable F = assemble(spec);
  VerifyOptions vo;
  vo.tol = 1e-12;
  CHECK(verify_prop1(F, vo).pass());
  CHECK(verify_orthogonality(F, vo).pass());
  for (Unit u : kUnits) CHECK((F.entry(0, u) - v[u]).norm() == 0.0);
}

TEST_CASE("rank-two factors have rho = diag(alpha, 1 - alpha)") {
  Rng rng(4);
  for (int t = 0; t < 50; ++t) {
    GeneratorSpec spec;
    spec.atoms = 1;
    spec.cases = {AtomCase::rank2};
    spec.coordinates = {FactorCoordinates::sample(rng)};
    const FunctionalDensity rho = rho_functional(assemble(spec));
    CHECK(std::abs(rho[0](0, 0) - spec.coordinates[0]->alpha) < 1e-14);
    CHECK(std::abs(rho[0](1, 1) - (1.0 - spec.coordinates[0]->alpha)) < 1e-14);
    CHECK(std::abs(rho[0](0, 1)) < 1e-15);
    CHECK(std::abs(rho[0](1, 0)) < 1e-15);
  }
}

TEST_CASE("sampled coordinates satisfy the constraints and the estimate") {
  Rng rng(99);
  for (int t = 0; t < 1000; ++t) {
    const FactorCoordinates c = FactorCoordinates::sample(rng);
    CHECK(c.constraint_residual() <= 1e-14);
    CHECK(c.alpha >= 0.05);
    CHECK(c.alpha <= 0.95);
    const AtomVectors v = generate_rank2_atom(c);
    const double r12 = v.f12.squaredNorm(), r21 = v.f21.squaredNorm();
    CHECK(r12 * r21 >= std::norm(c.xi) - 1e-15);
  }
}

TEST_CASE("invalid coordinates are rejected") {
  FactorCoordinates c = worked_coordinates();
  c.xi = 0.1;
  CHECK_THROWS_AS(generate_rank2_atom(c), ConstructionError);
  c = worked_coordinates();
  c.alpha = 1.0;
  CHECK_THROWS_AS(generate_rank2_atom(c), ConstructionError);
}

TEST_CASE("rank-one factors") {
  AtomVectors v = generate_rank1_atom(0.0);
  CHECK(v.f12.norm() == 0.0);
  v = generate_rank1_atom(0.3);
  CHECK(v.f12.squaredNorm() == Catch::Approx(0.3));
  CHECK(v.f21.squaredNorm() == Catch::Approx(0.7));
  CHECK(v.f22.norm() == 0.0);
  CHECK(v.f11 == v.unit);
  CHECK(std::abs(v.f12.dot(v.f21)) == 0.0);
  CHECK(std::abs(v.f11.dot(v.f12)) == 0.0);
  CHECK(v.f12.squaredNorm() + v.f21.squaredNorm() ==
        Catch::Approx(v.f11.squaredNorm() + v.f22.squaredNorm()));
  CHECK_THROWS_AS(generate_rank1_atom(1.5), ConstructionError);
}

TEST_CASE("assembled instances pass the full suite") {
  for (std::uint64_t seed : {1u, 2u}) {
    CHECK(all_pass_on(test::instance(4, seed, true, true), 1e-10));
  }
  const VectorFieldTable F = test::instance(4, 5);
  CHECK(F.hilbert_dim() == 16);
}

TEST_CASE("twisting moves rho off the diagonal and untwisting restores it") {
  GeneratorSpec spec = make_spec(3, "rank2", 12);
  const VectorFieldTable plain = assemble(spec);
  Rng rng(8);
  std::vector<Block> us;
  for (int k = 0; k < 3; ++k) us.push_back(random_unitary(rng));
  spec.twists.assign(us.begin(), us.end());
  const VectorFieldTable twisted = assemble(spec);
  const FunctionalDensity rho = rho_functional(twisted);
  double off = 0.0;
  for (std::size_t k = 0; k < 3; ++k) off = std::max(off, std::abs(rho[k](0, 1)));
  CHECK(off > 1e-3);

  std::vector<Block> inverse;
  for (const Block& u : us) inverse.push_back(u.adjoint());
  const VectorFieldTable back = twist_field(twisted, inverse);
  CHECK((back.values() - plain.values()).cwiseAbs().maxCoeff() < 1e-14);
  const FunctionalDensity rho_back = rho_functional(back);
  for (std::size_t k = 0; k < 3; ++k) CHECK(std::abs(rho_back[k](0, 1)) < 1e-14);
  // Densities transform by conjugation: rho' = u* rho u.
  const FunctionalDensity rho_plain = rho_functional(plain);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK((rho[k] - us[k].adjoint() * rho_plain[k] * us[k]).norm() < 1e-14);
  }
}

TEST_CASE("random unitaries are unitary") {
  Rng rng(1);
  for (int t = 0; t < 100; ++t) {
    const Block u = random_unitary(rng);
    CHECK((u * u.adjoint() - Block::Identity()).norm() < 1e-14);
  }
}

TEST_CASE("stationary-pair generator") {
  const MeasureSpace one = MeasureSpace::uniform(1);
  SECTION("zero pair gives the zero field") {
    const VectorFieldTable F =
        generate_from_stationary_pair(FunctionalDensity::zero(one), FunctionalDensity::zero(one));
    CHECK(F.values().norm() == 0.0);
  }
  SECTION("rank-one diagonal pair") {
    Block phi = Block::Zero(), psi = Block::Zero();
    phi(0, 0) = 0.7;
    psi(0, 0) = 0.3;
    const VectorFieldTable F = generate_from_stationary_pair(FunctionalDensity(one, {phi}),
                                                             FunctionalDensity(one, {psi}));
    CHECK(all_pass_on(F, 1e-10));
    const DensityReport d = r_densities(F);
    CHECK(d.r[0][slot(Unit::e21)] == Catch::Approx(0.7).margin(1e-14));
    CHECK(d.r[0][slot(Unit::e12)] == Catch::Approx(0.3).margin(1e-14));
  }
  SECTION("random positive pairs on four atoms") {
    Rng rng(77);
    for (int t = 0; t < 5; ++t) {
      const MeasureSpace s({"a", "b", "c", "d"}, {0.5, 1.0, 1.5, 2.0});
      auto [phi, psi] = sample_stationary_pair(s, rng, t == 0);
      const VectorFieldTable F = generate_from_stationary_pair(phi, psi);
      CHECK(all_pass_on(F, 1e-9));
      const StationarityReport rep = check_stationarity(F, {phi, psi});
      CHECK(rep.max_scaled_residual <= 1e-9);
    }
  }
  SECTION("non-positive input is rejected") {
    Block bad = Block::Zero();
    bad(0, 0) = -0.5;
    CHECK_THROWS_AS(
        generate_from_stationary_pair(FunctionalDensity(one, {bad}), FunctionalDensity::zero(one)),
        DomainError);
  }
}

TEST_CASE("range compression preserves inner products") {
  const VectorFieldTable F =
      generate_from_stationary_pair(FunctionalDensity(MeasureSpace::uniform(2),
                                                      {Block::Identity(), Block::Zero()}),
                                    FunctionalDensity::zero(MeasureSpace::uniform(2)));
  const VectorFieldTable C = compress_range(F);
  CHECK(C.hilbert_dim() < F.hilbert_dim());
  const Matrix g1 = F.values().adjoint() * F.values();
  const Matrix g2 = C.values().adjoint() * C.values();
  CHECK((g1 - g2).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("generator specs are validated") {
  GeneratorSpec s;
  s.atoms = 2;
  s.cases = {AtomCase::rank1};
  CHECK_THROWS_AS(assemble(s), ConstructionError);
  s.cases = {AtomCase::rank1, AtomCase::rank2};
  s.splits = {0.2, 1.2};
  CHECK_THROWS_AS(assemble(s), ConstructionError);
  CHECK_THROWS_AS(make_spec(0, "mixed", 1), ConstructionError);
  CHECK_THROWS_AS(make_spec(2, "other", 1), ConstructionError);
}

TEST_CASE("assembly is a deterministic function of the spec") {
  const GeneratorSpec s = make_spec(5, "mixed", 123, true, true);
  CHECK(assemble(s).values() == assemble(s).values());
}
