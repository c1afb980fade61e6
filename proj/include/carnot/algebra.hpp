#pragma once

#include "carnot/types.hpp"

#include <array>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace carnot {

/// Absolute tolerance for antisymmetry and Jacobi residuals.
inline constexpr double kAlgebraTolerance = 1e-12;

/// One declared bracket coefficient, [X_i, X_j] contains c * X_k. Indices are 0-based.
struct BracketRecord
{
  int i = 0;
  int j = 0;
  int k = 0;
  double c = 0.0;
};

/// Unvalidated algebra data as read from a configuration document.
struct AlgebraDefinition
{
  std::string name;
  std::vector<int> layer_dims;
  std::vector<BracketRecord> brackets;
};

enum class ViolationKind
{
  IndexRange,
  Duplicate,
  Antisymmetry,
  Grading,
  Jacobi,
  Generation
};

std::string to_string(ViolationKind kind);

struct Violation
{
  ViolationKind kind;
  std::array<int, 3> indices{};  // 0-based; meaning depends on kind
  double residual = 0.0;
  std::string message;
};

struct ValidationReport
{
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  bool has(ViolationKind kind) const;
  std::string summary() const;
};

class AlgebraError : public std::runtime_error
{
 public:
  explicit AlgebraError(ValidationReport report);
  const ValidationReport& report() const { return report_; }

 private:
  ValidationReport report_;
};

/// Rejects malformed dimension data with std::invalid_argument; otherwise lists violated invariants.
ValidationReport validate(const AlgebraDefinition& def);

/// Degree sequence (1-based layer numbers) for the given layer dimensions.
std::vector<int> degrees_from_layers(std::span<const int> layer_dims);

/// Inverse of degrees_from_layers; rejects sequences that are not nondecreasing with unit steps.
std::vector<int> layers_from_degrees(std::span<const int> degrees);

/**
 * @brief A validated graded nilpotent Lie algebra given by structure constants.
 *
 * Basis vectors are ordered by nondecreasing degree. Constants are stored once per
 * unordered pair i < j; the other half follows from antisymmetry.
 */
class GradedNilpotentAlgebra
{
 public:
  struct Entry
  {
    int i;
    int j;
    int k;
    double c;
  };

  /// Throws AlgebraError when the definition violates any invariant.
  static GradedNilpotentAlgebra build(const AlgebraDefinition& def);

  /// Commutative algebra R^dim in one layer.
  static GradedNilpotentAlgebra abelian(int dim, std::string name = {});

  const std::string& name() const { return def_.name; }
  const AlgebraDefinition& definition() const { return def_; }

  int dimension() const { return static_cast<int>(degrees_.size()); }
  int depth() const { return static_cast<int>(layer_dims_.size()); }
  std::span<const int> layer_dims() const { return layer_dims_; }
  std::span<const int> degrees() const { return degrees_; }
  int degree(int i) const { return degrees_.at(static_cast<std::size_t>(i)); }

  /// Index of the first basis vector in layer k (1-based layer number).
  int layer_offset(int k) const;

  /// Dimension of layer k, zero beyond the depth.
  int layer_dim(int k) const;

  /// Hausdorff dimension sum_k k * n_k.
  int hausdorff_dimension() const { return hausdorff_dim_; }

  std::span<const Entry> structure_constants() const { return entries_; }

  /// c_{ijk}, with antisymmetry applied when i > j.
  double constant(int i, int j, int k) const;

  Vec bracket(const Vec& x, const Vec& y) const;

  /// sum_i mu_i * deg_i.
  int homogeneous_norm(std::span<const int> mu) const;

 private:
  GradedNilpotentAlgebra() = default;

  AlgebraDefinition def_;
  std::vector<int> layer_dims_;
  std::vector<int> degrees_;
  std::vector<Entry> entries_;
  int hausdorff_dim_ = 0;
};

/// Sparse raw constants keyed by 0-based (i, j, k).
using RawConstants = std::map<std::array<int, 3>, double>;

/**
 * @brief Keeps the constants with deg_i + deg_j == deg_k and zeroes the rest.
 *
 * Input must be antisymmetric with deg_k <= deg_i + deg_j (std::invalid_argument otherwise).
 * Throws AlgebraError, carrying the Jacobi residual, when the projection is not a valid
 * graded algebra.
 */
GradedNilpotentAlgebra nilpotentize(const RawConstants& raw, std::span<const int> degrees, std::string name = {});

}  // namespace carnot
