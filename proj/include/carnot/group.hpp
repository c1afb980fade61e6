#pragma once

#include "carnot/algebra.hpp"
#include "carnot/polynomial.hpp"
#include "carnot/types.hpp"

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <vector>

namespace carnot {

/// Deepest grading for which the BCH table is built.
inline constexpr int kMaxBchDepth = 5;

class UnsupportedDepthError : public std::runtime_error
{
 public:
  using std::runtime_error::runtime_error;
};

class AlgebraMismatchError : public std::invalid_argument
{
 public:
  using std::invalid_argument::invalid_argument;
};

/// Closest small-denominator rational to a short decimal (exact binary value as fallback).
Rational rational_from_double(double v);

/**
 * @brief Group law of a Carnot group in coordinates of the first kind.
 *
 * Component i of the product is a polynomial in (x_1..x_N, y_1..y_N) with rational
 * coefficients, obtained from the graded BCH recursion over the concrete algebra. Every
 * bracket of more than M elements vanishes, so the truncated series is exact.
 */
class BchTable
{
 public:
  static BchTable build(const GradedNilpotentAlgebra& alg);

  int dimension() const { return n_; }

  /// Product components over 2N variables, x-block first.
  const std::vector<Polynomial<Rational>>& components() const { return z_; }

  /// Left-invariant frame; entry (row j, column i) stored at j * N + i, polynomials in x.
  const std::vector<Polynomial<Rational>>& frame_polynomials() const { return frame_; }

  /// True when every monomial x^mu y^beta in component i has |mu + beta|_h == deg_i.
  bool homogeneous(const GradedNilpotentAlgebra& alg) const;

  void product(const double* x, const double* y, double* z) const;
  void frame(const double* x, Mat& out) const;

 private:
  int n_ = 0;
  std::vector<Polynomial<Rational>> z_;
  std::vector<Polynomial<Rational>> frame_;
  CompiledPolynomials z_eval_;
  CompiledPolynomials frame_eval_;
};

/// Algebra plus its group law. Immutable; share through std::shared_ptr.
class CarnotGroup
{
 public:
  static std::shared_ptr<const CarnotGroup> create(GradedNilpotentAlgebra alg);

  const GradedNilpotentAlgebra& algebra() const { return alg_; }
  const BchTable& bch() const { return bch_; }
  int dimension() const { return alg_.dimension(); }

  Vec product(const Vec& x, const Vec& y) const;
  Vec inverse(const Vec& x) const { return -x; }
  Vec dilation(const Vec& x, double r) const;

  /// Column i is X_i(x) in coordinates. Unit lower block-triangular.
  Mat frame(const Vec& x) const;

 private:
  explicit CarnotGroup(GradedNilpotentAlgebra alg);

  GradedNilpotentAlgebra alg_;
  BchTable bch_;
};

using GroupPtr = std::shared_ptr<const CarnotGroup>;

/// Group element in first-kind coordinates; the identity is the zero vector.
class GroupPoint
{
 public:
  GroupPoint(GroupPtr group, Vec coords);

  static GroupPoint identity(GroupPtr group);

  const GroupPtr& group() const { return group_; }
  const Vec& coords() const { return coords_; }
  int dimension() const { return static_cast<int>(coords_.size()); }

 private:
  GroupPtr group_;
  Vec coords_;
};

/// Throws AlgebraMismatchError unless both points live in the same group.
void require_same_group(const GroupPoint& a, const GroupPoint& b);

GroupPoint product(const GroupPoint& x, const GroupPoint& y);
GroupPoint inverse(const GroupPoint& x);
GroupPoint dilation(const GroupPoint& x, double r);
Mat left_invariant_frame(const GroupPoint& x);

/// Outcome of the group invariant suite.
struct GroupSelfTest
{
  std::string algebra;
  int samples = 0;
  std::uint64_t seed = 0;
  double associativity_residual = 0.0;
  double inverse_residual = 0.0;
  double dilation_residual = 0.0;
  double frame_identity_residual = 0.0;
  bool homogeneous = false;
  bool frame_brackets_exact = false;

  bool passed() const;
};

/// Associativity (1e-9), inverse and dilation-homomorphism (1e-12 scaled), exact homogeneity and
/// exact frame bracket relations. Random coordinates are drawn from [-2, 2].
GroupSelfTest run_group_selftest(const CarnotGroup& group, int samples, std::uint64_t seed);

}  // namespace carnot
