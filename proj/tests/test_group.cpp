#include "doctest.h"
#include "oracles.hpp"

#include "carnot/group.hpp"

#include <random>

using namespace carnot;

namespace {
Vec v3(double a, double b, double c)
{
  Vec v(3);
  v << a, b, c;
  return v;
}
}  // namespace

TEST_CASE("rational recovery of short decimals")
{
  CHECK(rational_from_double(0.5) == Rational(1, 2));
  CHECK(rational_from_double(-0.25) == Rational(-1, 4));
  CHECK(rational_from_double(0.1) == Rational(1, 10));
  CHECK(rational_from_double(1.0 / 3.0) == Rational(1, 3));
  CHECK(rational_from_double(3.0) == Rational(3));
  CHECK(rational_from_double(0.0) == Rational(0));
}

TEST_CASE("H1 BCH third component")
{
  const auto g = oracle::group_of(oracle::heisenberg1_def());
  const auto& z = g->bch().components();
  // z3 = x3 + y3 + (x1 y2 - x2 y1)/2 over variables (x1,x2,x3,y1,y2,y3).
  using P = Polynomial<Rational>;
  const P expected = P::variable(6, 2) + P::variable(6, 5) + P::variable(6, 0) * P::variable(6, 4) * Rational(1, 2) -
                     P::variable(6, 1) * P::variable(6, 3) * Rational(1, 2);
  CHECK(z[2] == expected);
  CHECK(z[0] == P::variable(6, 0) + P::variable(6, 3));
}

TEST_CASE("abelian product is addition")
{
  const auto g = CarnotGroup::create(GradedNilpotentAlgebra::abelian(3));
  using P = Polynomial<Rational>;
  for (int i = 0; i < 3; ++i) CHECK(g->bch().components()[static_cast<std::size_t>(i)] == P::variable(6, static_cast<std::size_t>(i)) + P::variable(6, static_cast<std::size_t>(3 + i)));
  const Vec x = v3(1, 2, 3), y = v3(-4, 5, 0.5);
  CHECK((g->product(x, y) - (x + y)).norm() == 0.0);
}

TEST_CASE("Engel BCH contains the 1/12 double brackets")
{
  const auto g = oracle::group_of(oracle::engel_def());
  const auto& z4 = g->bch().components()[3];
  // [x,[x,y]]_4 = x1 (x1 y2 - x2 y1), so coefficient of x1^2 y2 is 1/12.
  Monomial m(8, 0);
  m[0] = 2;
  m[5] = 1;
  REQUIRE(z4.terms().count(m) == 1);
  CHECK(z4.terms().at(m) == Rational(1, 12));
  // -[y,[x,y]]/12 -> y1 (x1 y2 - x2 y1) with coefficient -1/12, so x1 y1 y2 has -1/12.
  Monomial n(8, 0);
  n[0] = 1;
  n[4] = 1;
  n[5] = 1;
  REQUIRE(z4.terms().count(n) == 1);
  CHECK(z4.terms().at(n) == Rational(-1, 12));
}

TEST_CASE("H1 product examples")
{
  const auto g = oracle::group_of(oracle::heisenberg1_def());
  CHECK((g->product(v3(1, 0, 0), v3(0, 1, 0)) - v3(1, 1, 0.5)).norm() < 1e-15);
  CHECK(g->product(v3(1, 0, 0), v3(-1, 0, 0)).norm() == 0.0);
  std::mt19937_64 rng(5);
  for (int s = 0; s < 50; ++s) {
    const Vec x = oracle::random_vec(rng, 3);
    CHECK((g->product(x, Vec::Zero(3)) - x).norm() == 0.0);
    CHECK((g->product(Vec::Zero(3), x) - x).norm() == 0.0);
  }
}

TEST_CASE("matrix and flow oracles agree with BCH")
{
  std::mt19937_64 rng(2024);
  const auto h1 = oracle::group_of(oracle::heisenberg1_def());
  const auto engel = oracle::group_of(oracle::engel_def());
  double h1_err = 0, engel_err = 0;
  for (int s = 0; s < 1000; ++s) {
    const Vec x = oracle::random_vec(rng, 3), y = oracle::random_vec(rng, 3);
    h1_err = std::max(h1_err, (h1->product(x, y) - oracle::h1_matrix_product(x, y)).norm());
    const Vec a = oracle::random_vec(rng, 4), b = oracle::random_vec(rng, 4);
    engel_err = std::max(engel_err, (engel->product(a, b) - oracle::engel_flow_product(a, b)).norm());
  }
  CHECK(h1_err <= 1e-10);
  CHECK(engel_err <= 1e-10);
}

TEST_CASE("inverse and dilation")
{
  const auto g = oracle::group_of(oracle::heisenberg1_def());
  CHECK(g->inverse(Vec::Zero(3)).norm() == 0.0);
  CHECK((g->inverse(v3(1, 2, 3)) - v3(-1, -2, -3)).norm() == 0.0);
  CHECK((g->dilation(v3(1, 1, 1), 2.0) - v3(2, 2, 4)).norm() == 0.0);
  const Vec x = v3(0.3, -1.2, 2.5);
  CHECK((g->dilation(x, 1.0) - x).norm() == 0.0);
  CHECK_THROWS_AS(g->dilation(x, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(g->dilation(x, -1.0), std::invalid_argument);
}

TEST_CASE("frames")
{
  const auto g = oracle::group_of(oracle::heisenberg1_def());
  const Mat f = g->frame(v3(0.7, -1.3, 4.0));
  // Columns X1 = (1,0,-x2/2), X2 = (0,1,x1/2), X3 = (0,0,1).
  CHECK(f(0, 0) == 1.0);
  CHECK(f(2, 0) == doctest::Approx(1.3 / 2));
  CHECK(f(2, 1) == doctest::Approx(0.7 / 2));
  CHECK(f(2, 2) == 1.0);
  CHECK(f(0, 1) == 0.0);
  CHECK(f(1, 0) == 0.0);
  const auto ab = CarnotGroup::create(GradedNilpotentAlgebra::abelian(4));
  Vec x(4);
  x << 1, 2, 3, 4;
  CHECK((ab->frame(x) - Mat::Identity(4, 4)).norm() == 0.0);
  const auto engel = oracle::group_of(oracle::engel_def());
  CHECK((engel->frame(Vec::Zero(4)) - Mat::Identity(4, 4)).norm() == 0.0);
}

TEST_CASE("frame columns are derivatives of left translation")
{
  const auto g = oracle::group_of(oracle::engel_def());
  std::mt19937_64 rng(9);
  for (int s = 0; s < 20; ++s) {
    const Vec x = oracle::random_vec(rng, 4);
    const Mat f = g->frame(x);
    for (int i = 0; i < 4; ++i) {
      Vec e = Vec::Zero(4);
      const double h = 1e-5;
      e(i) = h;
      const Vec fd = (g->product(x, e) - g->product(x, -e)) / (2 * h);
      CHECK((fd - f.col(i)).norm() < 1e-8);
    }
  }
}

TEST_CASE("frame brackets reproduce constants at random points")
{
  const auto g = oracle::group_of(oracle::engel_def());
  const int n = 4;
  const auto& fp = g->bch().frame_polynomials();
  std::mt19937_64 rng(21);
  for (int s = 0; s < 10; ++s) {
    const Vec x = oracle::random_vec(rng, n);
    std::vector<double> xs(x.data(), x.data() + n);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        for (int j = 0; j < n; ++j) {
          double lie = 0;
          for (int i = 0; i < n; ++i) {
            lie += fp[static_cast<std::size_t>(i * n + a)].evaluate(xs) * fp[static_cast<std::size_t>(j * n + b)].derivative(static_cast<std::size_t>(i)).evaluate(xs);
            lie -= fp[static_cast<std::size_t>(i * n + b)].evaluate(xs) * fp[static_cast<std::size_t>(j * n + a)].derivative(static_cast<std::size_t>(i)).evaluate(xs);
          }
          double expect = 0;
          for (int k = 0; k < n; ++k) expect += g->algebra().constant(a, b, k) * fp[static_cast<std::size_t>(j * n + k)].evaluate(xs);
          CHECK(std::abs(lie - expect) < 1e-10);
        }
      }
  }
}

TEST_CASE("self test passes on the fixture algebras")
{
  for (const auto& def : {oracle::heisenberg1_def(), oracle::engel_def(), oracle::heisenberg_def(2)}) {
    const auto g = oracle::group_of(def);
    const auto st = run_group_selftest(*g, 1000, 42);
    INFO(def.name);
    CHECK(st.associativity_residual <= 1e-9);
    CHECK(st.inverse_residual <= 1e-12);
    CHECK(st.homogeneous);
    CHECK(st.frame_brackets_exact);
    CHECK(st.passed());
  }
}

TEST_CASE("depth cap")
{
  // Filiform algebra of depth 6: [X1, X_k] = X_{k+1}.
  AlgebraDefinition def{"filiform6", {2, 1, 1, 1, 1, 1}, {}};
  for (int k = 1; k < 6; ++k) def.brackets.push_back({0, k, k + 1, 1.0});
  const auto alg = GradedNilpotentAlgebra::build(def);
  CHECK_THROWS_AS(CarnotGroup::create(alg), UnsupportedDepthError);
  def.layer_dims.pop_back();
  def.brackets.pop_back();
  const auto g = CarnotGroup::create(GradedNilpotentAlgebra::build(def));
  CHECK(run_group_selftest(*g, 200, 1).passed());
}

TEST_CASE("group points")
{
  const auto g = oracle::group_of(oracle::heisenberg1_def());
  const auto other = oracle::group_of(oracle::heisenberg1_def());
  const GroupPoint a(g, v3(1, 0, 0)), b(g, v3(0, 1, 0)), c(other, v3(0, 1, 0));
  CHECK((product(a, b).coords() - v3(1, 1, 0.5)).norm() < 1e-15);
  CHECK_THROWS_AS(product(a, c), AlgebraMismatchError);
  CHECK_THROWS_AS(GroupPoint(g, v3(std::nan(""), 0, 0)), std::invalid_argument);
  CHECK_THROWS_AS(GroupPoint(g, Vec::Zero(2)), std::invalid_argument);
  CHECK(GroupPoint::identity(g).coords().norm() == 0.0);
  CHECK((inverse(a).coords() + a.coords()).norm() == 0.0);
}
