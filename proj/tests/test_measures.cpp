#include "carnot/measures.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace carnot;

namespace {

GroupPtr h1() { return oracle::group_of(oracle::heisenberg1_def()); }
GroupPtr engel() { return oracle::group_of(oracle::engel_def()); }
GroupPtr line(int k = 1) { return CarnotGroup::create(GradedNilpotentAlgebra::abelian(k, "R" + std::to_string(k))); }

PiRational pr(long num, long den, int pi_power) { return {Rational(num) / Rational(den), pi_power}; }

const MeasureConvention kPaper{ConstantMode::PaperLiteral, OmegaNormalization::UnitBall};
const MeasureConvention kBalanced{ConstantMode::Balanced, OmegaNormalization::UnitBall};

}  // namespace

TEST_CASE("J^SR constant reproduces the displayed specializations exactly")
{
  const auto h = h1();
  const auto d = MapDimensions::of(h->algebra(), line()->algebra());
  CHECK(jsr_constant(d, kPaper) == displayed_h1_to_r());
  CHECK(jsr_constant(d, kPaper) == pr(8, 9, 0));
  CHECK(jsr_constant(d, kBalanced) == pr(4, 3, 0));

  for (int n = 1; n <= 3; ++n) {
    const auto src = GradedNilpotentAlgebra::build(oracle::heisenberg_def(n));
    for (int k = 1; k <= 2 * n; ++k) {
      CAPTURE(n);
      CAPTURE(k);
      const auto dk = MapDimensions::of(src, GradedNilpotentAlgebra::abelian(k));
      CHECK(jsr_constant(dk, kPaper) == displayed_hn_to_rk(n, k));
    }
  }
  for (const auto& def : {oracle::heisenberg1_def(), oracle::engel_def()}) {
    const auto alg = GradedNilpotentAlgebra::build(def);
    const auto dg = MapDimensions::of(alg, GradedNilpotentAlgebra::abelian(1));
    CHECK(jsr_constant(dg, kPaper) == displayed_group_to_r(alg));
  }
  // Engel -> R by hand: omega_4 omega_6 / (omega_7 omega_1 omega_1 omega_1) with N=4, nu=7, n=(2,1,1).
  const auto de = MapDimensions::of(GradedNilpotentAlgebra::build(oracle::engel_def()), GradedNilpotentAlgebra::abelian(1));
  CHECK(jsr_constant(de, kPaper).value() ==
        doctest::Approx(omega_value(4) * omega_value(6) / (omega_value(7) * std::pow(omega_value(1), 3))).epsilon(1e-14));
}

TEST_CASE("omega_0 convention and layer mismatch")
{
  const auto src = GradedNilpotentAlgebra::build(oracle::h1_times_r2_def());
  const auto d = MapDimensions::of(src, h1()->algebra());
  CHECK(regular_constant(d) == omega(2));
  CHECK(alpha_constant(d) == pr(1, 1, 0));
  CHECK(kappa(h1()->algebra()) == pr(1, 4, 1));  // omega_4 / (omega_2 omega_1)
  const auto bad = MapDimensions::of(GradedNilpotentAlgebra::abelian(1), h1()->algebra());
  CHECK_THROWS_AS(regular_constant(bad), DomainError);
}

TEST_CASE("coarea factors on H1")
{
  const auto h = h1();
  const auto x1 = PolynomialContactMap::parse("x1", h, line(), {"u1"});
  const auto x3 = PolynomialContactMap::parse("x3", h, line(), {"u3"});
  const auto zero = PolynomialContactMap::parse("zero", h, line(), {"0"});
  CHECK(coarea_factor_sr(x1, oracle::vec({0, 0, 0}), kPaper) == doctest::Approx(8.0 / 9.0).epsilon(1e-14));
  CHECK(coarea_factor_sr(x1, oracle::vec({0.3, -1, 2}), kBalanced) == doctest::Approx(4.0 / 3.0).epsilon(1e-14));
  CHECK(coarea_factor_sr(zero, oracle::vec({0.3, 0.1, 0}), kPaper) == 0.0);
  CHECK(coarea_factor_sr(x3, oracle::vec({0, 0, 0.5}), kPaper) == 0.0);  // hc part vanishes at the characteristic line
  CHECK(coarea_factor_riemannian(x1, oracle::vec({0, 0, 0})) == doctest::Approx(1.0));
  CHECK(coarea_factor_riemannian(x3, oracle::vec({1, 0, 0})) == doctest::Approx(std::sqrt(1.25)).epsilon(1e-14));
  CHECK(coarea_factor_riemannian(zero, oracle::vec({1, 0, 0})) == 0.0);
}

TEST_CASE("measure density alpha")
{
  const auto h = h1();
  const auto x1 = PolynomialContactMap::parse("x1", h, line(), {"u1"});
  for (const auto& x : {oracle::vec({0, 0, 0}), oracle::vec({1, -2, 3})})
    CHECK(measure_density_alpha(x1, x) == doctest::Approx(M_PI / 3).epsilon(1e-14));
  const auto src = oracle::group_of(oracle::h1_times_r2_def());
  const auto proj = PolynomialContactMap::parse("proj", src, h, {"u1", "u3", "u5"});
  CHECK(measure_density_alpha(proj, Vec::Zero(5)) == doctest::Approx(1.0).epsilon(1e-14));
  const auto x3 = PolynomialContactMap::parse("x3", h, line(), {"u3"});
  CHECK_THROWS_AS(measure_density_alpha(x3, oracle::vec({0, 0, 0})), DomainError);
  CHECK_THROWS_AS(level_set_prediction(x3, oracle::vec({0, 0, 0}), 0.1), DomainError);
}

TEST_CASE("J^SR = J_N~ * alpha * omega ratio at regular points (PaperLiteral)")
{
  struct Case
  {
    GroupPtr src, tgt;
    std::vector<std::string> comps;
  };
  const auto h = h1();
  const std::vector<Case> cases{
      {h, line(), {"u1"}},
      {h, line(), {"u1 + u2^2"}},
      {h, line(), {"u3 + 0.5*u1*u2 - u1^2"}},
      {engel(), line(), {"u2 + 0.25*u1^2"}},
      {oracle::group_of(oracle::h1_times_r2_def()), h, {"u1", "u3", "u5"}},
  };
  std::mt19937_64 rng(7);
  for (const auto& c : cases) {
    const auto map = PolynomialContactMap::parse("m", c.src, c.tgt, c.comps);
    const auto d = MapDimensions::of(c.src->algebra(), c.tgt->algebra());
    const double ratio = omega_value(d.N) / omega_value(d.nu) * omega_value(d.target_nu) / omega_value(d.target_N);
    int checked = 0;
    for (int i = 0; i < 40; ++i) {
      const Vec x = oracle::random_vec(rng, c.src->dimension(), -1, 1);
      if (classify_point(map, x).kind != PointKind::Regular) continue;
      const double lhs = coarea_factor_sr(map, x, kPaper);
      const double rhs = coarea_factor_riemannian(map, x) * measure_density_alpha(map, x) * ratio;
      CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(lhs)));
      ++checked;
    }
    CHECK(checked > 10);
  }
}

TEST_CASE("graded kernel ordering")
{
  const auto h = h1();
  const auto x1 = PolynomialContactMap::parse("x1", h, line(), {"u1"});
  const auto k = graded_kernel(x1, oracle::vec({0, 0, 0}));
  REQUIRE(k.degrees == std::vector<int>{1, 2});
  CHECK((k.basis.transpose() * k.basis - Mat::Identity(2, 2)).norm() < 1e-12);
  CHECK(std::abs(k.basis(2, 0)) < 1e-12);
  CHECK(std::abs(k.basis(2, 1)) == doctest::Approx(1.0));
  const auto x3 = PolynomialContactMap::parse("x3", h, line(), {"u3"});
  CHECK(graded_kernel(x3, oracle::vec({0, 0, 0})).degrees == std::vector<int>{1, 1});
  const auto zero = PolynomialContactMap::parse("zero", h, line(), {"0"});
  CHECK_THROWS_AS(graded_kernel(zero, oracle::vec({0, 0, 0})), DomainError);
}

TEST_CASE("tangent-plane box measures")
{
  const auto h = h1();
  const auto x1 = PolynomialContactMap::parse("x1", h, line(), {"u1"});
  const auto x3 = PolynomialContactMap::parse("x3", h, line(), {"u3"});
  const Vec o = oracle::vec({0, 0, 0});
  const std::vector<double> radii{0.4, 0.2, 0.1, 0.05};
  std::vector<double> v1, v3;
  for (double r : radii) {
    const auto m1 = tangent_plane_box_measure(x1, o, r);
    const auto m3 = tangent_plane_box_measure(x3, o, r);
    CHECK(m1.converged);
    CHECK(m3.converged);
    CHECK(m1.value == doctest::Approx(4 * r * r * r).epsilon(5e-3));
    CHECK(m3.value == doctest::Approx(M_PI * r * r).epsilon(5e-3));
    v1.push_back(m1.value);
    v3.push_back(m3.value);
  }
  const auto f1 = exponent_fit(radii, v1), f3 = exponent_fit(radii, v3);
  CHECK(f1.exponent == doctest::Approx(3.0).epsilon(0.02 / 3));
  CHECK(f1.constant == doctest::Approx(4.0).epsilon(0.02));
  CHECK(f3.exponent == doctest::Approx(2.0).epsilon(0.01));
  CHECK(tangent_plane_box_measure(x3, o, 0.2).value / tangent_plane_box_measure(x3, o, 0.1).value ==
        doctest::Approx(4.0).epsilon(1e-2));

  const auto src = oracle::group_of(oracle::h1_times_r2_def());
  const auto proj = PolynomialContactMap::parse("proj", src, h, {"u1", "u3", "u5"});
  CHECK(tangent_plane_box_measure(proj, Vec::Zero(5), 0.3).value == doctest::Approx(M_PI * 0.09).epsilon(5e-3));
}

TEST_CASE("level-set box measures")
{
  const auto h = h1();
  const auto x1 = PolynomialContactMap::parse("x1", h, line(), {"u1"});
  const Vec o = oracle::vec({0, 0, 0});
  const std::vector<double> radii{0.4, 0.2, 0.1, 0.05};
  std::vector<double> v;
  for (double r : radii) {
    const auto m = level_set_box_measure(x1, o, r);
    CHECK(m.value == doctest::Approx(4 * r * r * r).epsilon(5e-3));
    CHECK(level_set_prediction(x1, o, r) == doctest::Approx(4 * r * r * r).epsilon(1e-14));
    v.push_back(m.value);
  }
  CHECK(exponent_fit(radii, v).exponent == doctest::Approx(3.0).epsilon(0.02 / 3));

  // At a base point off the origin the flat level {x1 = a} meets Box2(x, r) in a sheared rectangle of the same area.
  const Vec a = oracle::vec({0.7, -0.4, 0.2});
  CHECK(level_set_box_measure(x1, a, 0.2).value == doctest::Approx(4 * 0.008).epsilon(5e-3));

  const auto cubic = PolynomialContactMap::parse("cubic", h, line(), {"u1 + u1^3"});
  CHECK(level_set_box_measure(cubic, o, 0.05).value == doctest::Approx(level_set_prediction(cubic, o, 0.05)).epsilon(0.05));

  // Curved levels: relative deviation from the prediction shrinks with r. The quadrature
  // tolerance has to sit well below the deviations being compared.
  const auto curved = PolynomialContactMap::parse("curved", h, line(), {"u1 + u2^2"});
  QuadratureOptions tight;
  tight.rel_tol = 1e-4;
  for (const Vec& x : {oracle::vec({0, 0, 0}), oracle::vec({0.2, 0.3, -0.1})}) {
    double prev = std::numeric_limits<double>::infinity();
    for (double r : {0.4, 0.2, 0.1, 0.05}) {
      const double dev = std::abs(level_set_box_measure(curved, x, r, tight).value / level_set_prediction(curved, x, r) - 1);
      CAPTURE(r);
      CHECK(dev < prev);
      prev = dev;
    }
    CHECK(prev < 0.05);
  }
}

TEST_CASE("level-set measure on Engel and the projection")
{
  const auto e = engel();
  const auto m = PolynomialContactMap::parse("e", e, line(), {"u2 + 0.25*u1^2"});
  const Vec x = oracle::vec({0.1, 0.2, -0.1, 0.05});
  const double r = 0.05;
  CHECK(level_set_box_measure(m, x, r).value == doctest::Approx(level_set_prediction(m, x, r)).epsilon(0.05));

  const auto src = oracle::group_of(oracle::h1_times_r2_def());
  const auto proj = PolynomialContactMap::parse("proj", src, h1(), {"u1", "u3", "u5"});
  const Vec y = oracle::vec({0.3, -0.2, 0.1, 0.5, -0.4});
  CHECK(level_set_box_measure(proj, y, 0.2).value == doctest::Approx(M_PI * 0.04).epsilon(5e-3));
}

TEST_CASE("exponent fit")
{
  const std::vector<double> radii{0.4, 0.2, 0.1, 0.05};
  std::vector<double> v;
  for (double r : radii) v.push_back(3 * r * r);
  const auto fit = exponent_fit(radii, v);
  CHECK(fit.exponent == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(fit.constant == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(fit.r2 == doctest::Approx(1.0));
  CHECK_THROWS_AS(exponent_fit({0.4, 0.2, 0.1}, {1, 2, 3}), std::invalid_argument);
  CHECK_THROWS_AS(exponent_fit({0.4, 0.3, 0.2, 0.1}, {1, 2, 3, 4}), std::invalid_argument);
  CHECK_THROWS_AS(exponent_fit(radii, {1, 2, 0, 4}), std::invalid_argument);
}

TEST_CASE("covering estimator")
{
  const auto r1 = line();
  std::vector<Vec> segment;
  for (int i = 0; i <= 10000; ++i) segment.push_back(oracle::vec({i / 10000.0}));
  const auto seg = covering_hausdorff_estimate(r1, segment, 1, 0.01, 3);
  CHECK(seg.value == doctest::Approx(1.0).epsilon(0.1));
  CHECK_THROWS_AS(covering_hausdorff_estimate(r1, {}, 1, 0.01, 3), std::invalid_argument);

  const auto h = h1();
  const auto x1 = PolynomialContactMap::parse("x1", h, line(), {"u1"});
  const Vec o = oracle::vec({0, 0, 0});
  for (double r : {0.2, 0.1}) {
    CAPTURE(r);
    const double delta = r / 10;
    const auto cloud = level_set_cloud(x1, o, r, delta / 2);
    const double target = omega_value(3) * r * r * r;
    const auto est = covering_hausdorff_estimate(h, cloud, 3, delta, 11);
    CHECK(est.value / target >= 0.85);
    CHECK(est.value / target <= 1.15);
    const auto fine = covering_hausdorff_estimate(h, level_set_cloud(x1, o, r, delta / 4), 3, delta / 2, 11);
    CHECK(std::abs(fine.value / est.value - 1) < 0.1);
  }
}
