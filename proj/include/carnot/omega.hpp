#pragma once

#include "carnot/polynomial.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>

namespace carnot {

/// Exact number of the form coeff * pi^power.
struct PiRational
{
  Rational coeff{1};
  int pi_power = 0;

  double value() const { return to_double(coeff) * std::pow(std::numbers::pi, pi_power); }

  friend PiRational operator*(const PiRational& a, const PiRational& b)
  {
    return {a.coeff * b.coeff, a.pi_power + b.pi_power};
  }
  friend PiRational operator/(const PiRational& a, const PiRational& b)
  {
    if (b.coeff == 0) throw std::domain_error("division by zero constant");
    return {a.coeff / b.coeff, a.pi_power - b.pi_power};
  }
  friend bool operator==(const PiRational& a, const PiRational& b)
  {
    if (a.coeff == 0 || b.coeff == 0) return a.coeff == b.coeff;
    return a.coeff == b.coeff && a.pi_power == b.pi_power;
  }
  friend std::ostream& operator<<(std::ostream& os, const PiRational& q)
  {
    os << q.coeff;
    if (q.pi_power != 0) os << "*pi^" << q.pi_power;
    return os;
  }
};

/// Normalization of the Hausdorff constants omega_mu.
enum class OmegaNormalization
{
  UnitBall,   ///< Euclidean unit-ball volume pi^{mu/2} / Gamma(mu/2 + 1)
  PowerOfTwo  ///< 2^mu, for sensitivity runs
};

inline std::string to_string(OmegaNormalization n)
{
  return n == OmegaNormalization::UnitBall ? "unit-ball-volume" : "power-of-two";
}

inline Rational factorial(int n)
{
  Rational out{1};
  for (int i = 2; i <= n; ++i) out *= i;
  return out;
}

/// omega_mu exactly. omega_0 = 1 in both normalizations.
inline PiRational omega(int mu, OmegaNormalization norm = OmegaNormalization::UnitBall)
{
  if (mu < 0) throw std::invalid_argument("omega of a negative dimension");
  if (norm == OmegaNormalization::PowerOfTwo) {
    Rational p{1};
    for (int i = 0; i < mu; ++i) p *= 2;
    return {p, 0};
  }
  const int m = mu / 2;
  if (mu % 2 == 0) return {Rational(1) / factorial(m), m};
  Rational p{1};
  for (int i = 0; i < mu; ++i) p *= 2;
  return {p * factorial(m) / factorial(mu), m};
}

inline double omega_value(int mu, OmegaNormalization norm = OmegaNormalization::UnitBall)
{
  return omega(mu, norm).value();
}

}  // namespace carnot
