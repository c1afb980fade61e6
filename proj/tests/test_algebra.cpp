#include "doctest.h"
#include "oracles.hpp"

#include "carnot/algebra.hpp"

#include <random>

using namespace carnot;

TEST_CASE("heisenberg algebra validates")
{
  CHECK(validate(oracle::heisenberg1_def()).ok());
  const auto alg = GradedNilpotentAlgebra::build(oracle::heisenberg1_def());
  CHECK(alg.dimension() == 3);
  CHECK(alg.depth() == 2);
  CHECK(alg.hausdorff_dimension() == 4);
  CHECK(alg.constant(0, 1, 2) == 1.0);
  CHECK(alg.constant(1, 0, 2) == -1.0);
}

TEST_CASE("abelian R3 validates")
{
  const auto alg = GradedNilpotentAlgebra::abelian(3);
  CHECK(alg.depth() == 1);
  CHECK(alg.hausdorff_dimension() == 3);
  CHECK(alg.structure_constants().empty());
}

TEST_CASE("inconsistent mirror record is an antisymmetry violation at (1,2,3)")
{
  AlgebraDefinition def{"bad", {2, 1}, {{0, 1, 2, 1.0}, {1, 0, 2, 0.0}}};
  const auto report = validate(def);
  REQUIRE(report.has(ViolationKind::Antisymmetry));
  const auto& v = report.violations.front();
  CHECK(v.kind == ViolationKind::Antisymmetry);
  CHECK(v.indices == std::array<int, 3>{0, 1, 2});
  CHECK(v.residual == doctest::Approx(1.0));
  CHECK_THROWS_AS(GradedNilpotentAlgebra::build(def), AlgebraError);
}

TEST_CASE("self bracket must vanish")
{
  AlgebraDefinition zero{"ok", {2, 1}, {{0, 1, 2, 1.0}, {0, 0, 2, 0.0}}};
  CHECK(validate(zero).ok());
  AlgebraDefinition bad{"bad", {2, 1}, {{0, 1, 2, 1.0}, {0, 0, 2, 0.5}}};
  CHECK(validate(bad).has(ViolationKind::Antisymmetry));
}

TEST_CASE("grading, index and duplicate violations")
{
  AlgebraDefinition grading{"g", {2, 1}, {{0, 1, 2, 1.0}, {0, 1, 1, 0.5}}};
  CHECK(validate(grading).has(ViolationKind::Grading));
  AlgebraDefinition range{"r", {2, 1}, {{0, 1, 5, 1.0}}};
  CHECK(validate(range).has(ViolationKind::IndexRange));
  AlgebraDefinition dup{"d", {2, 1}, {{0, 1, 2, 1.0}, {0, 1, 2, 2.0}}};
  CHECK(validate(dup).has(ViolationKind::Duplicate));
}

TEST_CASE("Jacobi violation is detected")
{
  AlgebraDefinition def{"j", {3, 1, 1}, {{0, 1, 3, 1.0}, {0, 2, 3, 1.0}, {0, 3, 4, 1.0}, {1, 3, 4, 1.0}}};
  // X1,X2,X3 in layer 1; [X1,X2]=X4, [X1,X3]=X4, [X1,X4]=X5, [X2,X4]=X5.
  // Jacobi on (1,2,3): [X1,[X2,X3]] + [X2,[X3,X1]] + [X3,[X1,X2]] = 0 + [X2,-X4] + [X3,X4] = -X5.
  const auto report = validate(def);
  CHECK(report.has(ViolationKind::Jacobi));
  bool found = false;
  for (const auto& v : report.violations)
    if (v.kind == ViolationKind::Jacobi && v.indices == std::array<int, 3>{0, 1, 2}) found = v.residual == doctest::Approx(1.0);
  CHECK(found);
}

TEST_CASE("generation condition")
{
  AlgebraDefinition def{"nogen", {2, 1}, {}};
  CHECK(validate(def).has(ViolationKind::Generation));
  CHECK(validate(oracle::engel_def()).ok());
}

TEST_CASE("malformed dimensions are rejected")
{
  CHECK_THROWS_AS(validate(AlgebraDefinition{"x", {}, {}}), std::invalid_argument);
  CHECK_THROWS_AS(validate(AlgebraDefinition{"x", {2, 0}, {}}), std::invalid_argument);
  CHECK_THROWS_AS(validate(AlgebraDefinition{"x", {-1}, {}}), std::invalid_argument);
  const std::vector<int> unsorted{1, 2, 1};
  CHECK_THROWS_AS(layers_from_degrees(unsorted), std::invalid_argument);
}

TEST_CASE("nilpotentize")
{
  const std::vector<int> deg{1, 1, 2};
  SUBCASE("graded input is a fixed point")
  {
    const auto alg = nilpotentize({{{0, 1, 2}, 1.0}, {{1, 0, 2}, -1.0}}, deg, "H1");
    CHECK(alg.structure_constants().size() == 1);
    CHECK(alg.constant(0, 1, 2) == 1.0);
  }
  SUBCASE("lower-order term is dropped")
  {
    const auto alg = nilpotentize({{{0, 1, 2}, 1.0}, {{0, 1, 0}, 0.5}, {{1, 0, 0}, -0.5}}, deg, "H1");
    CHECK(alg.constant(0, 1, 0) == 0.0);
    CHECK(alg.constant(0, 1, 2) == 1.0);
    CHECK(validate(alg.definition()).ok());
  }
  SUBCASE("all zero gives the abelian algebra")
  {
    const std::vector<int> flat{1, 1, 1};
    const auto alg = nilpotentize({}, flat);
    CHECK(alg.structure_constants().empty());
  }
  SUBCASE("degree excess is rejected")
  {
    const std::vector<int> engel_deg{1, 1, 2, 3};
    CHECK_THROWS_AS(nilpotentize({{{0, 1, 3}, 1.0}}, engel_deg), std::invalid_argument);
    CHECK_THROWS_AS(nilpotentize({{{0, 1, 2}, 1.0}, {{1, 0, 2}, 1.0}}, deg), std::invalid_argument);
  }
  SUBCASE("projection that breaks generation carries the diagnostic")
  {
    const std::vector<int> d{1, 1, 2};
    try {
      nilpotentize({{{0, 1, 0}, 1.0}}, d);
      FAIL("expected AlgebraError");
    } catch (const AlgebraError& e) {
      CHECK(e.report().has(ViolationKind::Generation));
    }
  }
}

TEST_CASE("nilpotentize output always validates")
{
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1, 1);
  const std::vector<int> deg{1, 1, 2, 3};
  for (int trial = 0; trial < 50; ++trial) {
    // Engel shape with random extra lower-order constants.
    RawConstants raw{{{0, 1, 2}, 1.0}, {{0, 2, 3}, 1.0}};
    raw[{0, 1, 0}] = u(rng);
    raw[{1, 2, 1}] = u(rng);
    raw[{0, 2, 2}] = u(rng);
    const auto alg = nilpotentize(raw, deg);
    CHECK(validate(alg.definition()).ok());
  }
}

TEST_CASE("bracket")
{
  const auto h1 = GradedNilpotentAlgebra::build(oracle::heisenberg1_def());
  Vec e1 = Vec::Zero(3), e2 = Vec::Zero(3);
  e1(0) = 1;
  e2(1) = 1;
  CHECK(h1.bracket(e1, e2)(2) == 1.0);
  CHECK(h1.bracket(e2, e1)(2) == -1.0);

  const auto engel = GradedNilpotentAlgebra::build(oracle::engel_def());
  Vec f1 = Vec::Zero(4), f3 = Vec::Zero(4);
  f1(0) = 1;
  f3(2) = 1;
  const Vec r = engel.bracket(f1, f3);
  CHECK(r(3) == 1.0);
  CHECK(r.head(3).norm() == 0.0);

  std::mt19937_64 rng(3);
  for (int s = 0; s < 100; ++s) {
    const Vec x = oracle::random_vec(rng, 4);
    CHECK(engel.bracket(x, x).norm() < 1e-15);
  }
}

TEST_CASE("random Jacobi residual is tiny")
{
  std::mt19937_64 rng(11);
  for (const auto& def : {oracle::heisenberg1_def(), oracle::engel_def(), oracle::heisenberg_def(3)}) {
    const auto alg = GradedNilpotentAlgebra::build(def);
    for (int s = 0; s < 200; ++s) {
      const Vec x = oracle::random_vec(rng, alg.dimension()), y = oracle::random_vec(rng, alg.dimension()),
                z = oracle::random_vec(rng, alg.dimension());
      const Vec j = alg.bracket(x, alg.bracket(y, z)) + alg.bracket(y, alg.bracket(z, x)) + alg.bracket(z, alg.bracket(x, y));
      CHECK(j.norm() <= 1e-12 * (x.norm() * y.norm() * z.norm() + 1));
    }
  }
}

TEST_CASE("homogeneous norm and two Hausdorff formulas")
{
  const auto h1 = GradedNilpotentAlgebra::build(oracle::heisenberg1_def());
  CHECK(h1.homogeneous_norm(std::vector<int>{1, 1, 0}) == 2);
  CHECK(h1.homogeneous_norm(std::vector<int>{0, 0, 2}) == 4);
  const auto engel = GradedNilpotentAlgebra::build(oracle::engel_def());
  CHECK(engel.homogeneous_norm(std::vector<int>{1, 0, 0, 1}) == 4);
  for (const auto& def : {oracle::heisenberg1_def(), oracle::engel_def(), oracle::heisenberg_def(2)}) {
    const auto alg = GradedNilpotentAlgebra::build(def);
    int from_degrees = 0;
    for (int d : alg.degrees()) from_degrees += d;
    CHECK(from_degrees == alg.hausdorff_dimension());
    CHECK(layers_from_degrees(alg.degrees()) == def.layer_dims);
  }
}

TEST_CASE("layer offsets")
{
  const auto engel = GradedNilpotentAlgebra::build(oracle::engel_def());
  CHECK(engel.layer_offset(1) == 0);
  CHECK(engel.layer_offset(2) == 2);
  CHECK(engel.layer_offset(3) == 3);
  CHECK(engel.layer_dim(3) == 1);
  CHECK(engel.layer_dim(4) == 0);
}
