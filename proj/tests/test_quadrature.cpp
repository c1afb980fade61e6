#include "carnot/quadrature.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace carnot;

namespace {

Integrand<1> disc_indicator(double radius)
{
  return [radius](const double* s) -> std::optional<std::array<double, 1>> {
    if (s[0] * s[0] + s[1] * s[1] < radius * radius) return std::array<double, 1>{1.0};
    return std::nullopt;
  };
}

}  // namespace

TEST_CASE("nested midpoint: disc area with boundary clipping")
{
  const std::vector<double> lo{-1.0, -1.0}, hi{1.0, 1.0};
  const auto f = disc_indicator(0.9);
  const auto coarse = nested_midpoint<1>(f, lo, hi, 16);
  const auto fine = nested_midpoint<1>(f, lo, hi, 64);
  const double exact = M_PI * 0.81;
  CHECK(std::abs(fine.value[0] - exact) < std::abs(coarse.value[0] - exact));
  CHECK(std::abs(fine.value[0] - exact) / exact < 2e-3);
  CHECK_FALSE(fine.touched[0]);
  CHECK_FALSE(fine.touched[1]);

  const auto refined = refine_nested<1>(f, lo, hi);
  CHECK(refined.converged);
  CHECK(std::abs(refined.value[0] - exact) / exact < 5e-3);
}

TEST_CASE("nested midpoint: second moment and edge flags")
{
  const std::vector<double> lo{-1.0, -1.0}, hi{1.0, 1.0};
  Integrand<2> f = [](const double* s) -> std::optional<std::array<double, 2>> {
    if (s[0] * s[0] + s[1] * s[1] < 1.0) return std::array<double, 2>{s[0] * s[0], 1.0};
    return std::nullopt;
  };
  const auto q = refine_nested<2>(f, lo, hi);
  CHECK(q.value[0] == doctest::Approx(M_PI / 4).epsilon(5e-3));
  CHECK(q.value[1] == doctest::Approx(M_PI).epsilon(5e-3));
  CHECK_FALSE(q.touched[0]);

  // The unit disc cut by the box |s0| <= 0.6 reaches the edges along axis 0 only.
  const std::vector<double> cut_lo{-0.6, -1.0}, cut_hi{0.6, 1.0};
  const auto cut = refine_nested<2>(f, cut_lo, cut_hi);
  const double exact = 2.0 * (0.6 * std::sqrt(1.0 - 0.36) + std::asin(0.6));
  CHECK(cut.value[1] == doctest::Approx(exact).epsilon(5e-3));
  CHECK(cut.touched[0]);
  CHECK_FALSE(cut.touched[1]);
}

TEST_CASE("nested midpoint: empty support integrates to zero")
{
  const std::vector<double> lo{0.0}, hi{1.0};
  Integrand<1> none = [](const double*) -> std::optional<std::array<double, 1>> { return std::nullopt; };
  const auto q = refine_nested<1>(none, lo, hi);
  CHECK(q.value[0] == 0.0);
  CHECK(q.converged);
}

TEST_CASE("ball integrator: Box2 volumes and moments on H1")
{
  const auto alg = GradedNilpotentAlgebra::build(oracle::heisenberg1_def());
  Integrand<1> one = [](const double*) -> std::optional<std::array<double, 1>> { return std::array<double, 1>{1.0}; };
  for (double r : {1.0, 0.5}) {
    const auto q = box2_ball_integral<1>(alg, r, one, 32);
    CHECK(q.value[0] == doctest::Approx(2 * M_PI * std::pow(r, 4)).epsilon(1e-3));
  }
  Integrand<1> t2 = [](const double* w) -> std::optional<std::array<double, 1>> { return std::array<double, 1>{w[2] * w[2]}; };
  // Disc area times int_{-1}^{1} t^2 dt.
  const auto q = refine_box2_ball<1>(alg, 1.0, t2);
  CHECK(q.value[0] == doctest::Approx(M_PI * 2.0 / 3.0).epsilon(5e-3));
}
