#pragma once

#include "carnot/group.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace carnot {

/// Relative singular-value threshold shared by every rank decision.
inline constexpr double kRankRelTol = 1e-8;

class ParseError : public std::invalid_argument
{
 public:
  ParseError(const std::string& what, std::size_t position);
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

/**
 * Parses +, -, *, ^ (nonnegative integer exponent), parentheses, decimal constants and
 * variables u1..uN. Division is accepted only by a nonzero constant.
 */
Polynomial<double> parse_polynomial(const std::string& text, std::size_t num_vars);

class ContactError : public std::runtime_error
{
 public:
  ContactError(const std::string& what, double residual) : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// Polynomial map between two Carnot groups in first-kind coordinates.
class PolynomialContactMap
{
 public:
  PolynomialContactMap(std::string name, GroupPtr source, GroupPtr target, std::vector<Polynomial<double>> components);

  static PolynomialContactMap parse(std::string name, GroupPtr source, GroupPtr target, const std::vector<std::string>& components);

  const std::string& name() const { return name_; }
  const GroupPtr& source() const { return source_; }
  const GroupPtr& target() const { return target_; }
  const std::vector<Polynomial<double>>& components() const { return components_; }
  const std::vector<std::string>& component_strings() const { return strings_; }

  int source_dim() const { return source_->dimension(); }
  int target_dim() const { return target_->dimension(); }

  Vec evaluate(const Vec& x) const;

  /// Coordinate Jacobian, target_dim x source_dim.
  Mat jacobian(const Vec& x) const;

 private:
  std::string name_;
  GroupPtr source_, target_;
  std::vector<Polynomial<double>> components_;
  std::vector<std::string> strings_;
  CompiledPolynomials value_eval_;
  CompiledPolynomials jacobian_eval_;
};

struct DifferentialPair
{
  Vec point;
  Mat full;                 ///< D phi(x) in the left-invariant frames
  std::vector<Mat> blocks;  ///< V_k, sized target n_k x source n_k for k = 1..max depth

  /// Block-diagonal matrix assembled from the blocks.
  Mat hc() const;
};

/// F~(phi(x))^{-1} J phi(x) F(x).
Mat riemannian_differential(const PolynomialContactMap& map, const Vec& x);

/// Largest |entry| with target degree above source degree.
double contact_residual(const PolynomialContactMap& map, const Mat& full);

/// Throws ContactError when an entry below the block diagonal exceeds 1e-8 (relative to max(1, |full|)).
DifferentialPair differential_pair(const PolynomialContactMap& map, const Vec& x);

struct ContactCheck
{
  bool ok = true;
  double max_residual = 0.0;
  std::size_t worst_point = 0;
};

ContactCheck contactness_check(const PolynomialContactMap& map, const std::vector<Vec>& points, double tol = 1e-8);

/// sqrt(det(A A^T)) as a product of singular values; requires rows <= cols.
double gram_row(const Mat& a);
/// sqrt(det(B^T B)); requires cols <= rows.
double gram_col(const Mat& b);

}  // namespace carnot
