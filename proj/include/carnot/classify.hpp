#pragma once

#include "carnot/maps.hpp"
#include "carnot/metrics.hpp"

#include <optional>
#include <vector>

namespace carnot {

enum class PointKind
{
  Degenerate,
  Characteristic,
  Regular
};

std::string to_string(PointKind kind);

/// Subset enumeration is used up to this many column subsets; larger cases use the greedy basis.
inline constexpr double kMaxNu0Subsets = 1e6;

struct Nu0Result
{
  std::optional<int> value;  ///< empty when no full-rank column subset exists
  std::vector<int> witness;  ///< 0-based source columns of a minimal subset
  bool marginal = false;     ///< some decisive singular value sat near the threshold
  bool enumerated = false;   ///< false when the greedy basis was used
};

/// Minimal degree sum over full-rank target_dim-column subsets of `full`.
Nu0Result nu0(const Mat& full, std::span<const int> source_degrees, double threshold, bool allow_enumeration = true);

/// Minimum-degree column basis by the matroid greedy rule (exact for column matroids).
Nu0Result nu0_greedy(const Mat& full, std::span<const int> source_degrees, double threshold);

std::optional<int> nu0(const PolynomialContactMap& map, const Vec& x);

/// Rank threshold kRankRelTol * sigma_max(full), zero for a zero matrix.
double rank_threshold(const Mat& full);

struct PointClass
{
  PointKind kind = PointKind::Degenerate;
  std::optional<int> nu0;
  int rank_full = 0;
  int rank_hc = 0;  ///< sum of block ranks
  bool marginal = false;
  bool routes_agree = true;
  PointKind nu0_route = PointKind::Degenerate;
  PointKind surjectivity_route = PointKind::Degenerate;
  std::vector<int> witness;
};

class ClassificationConflict : public std::runtime_error
{
 public:
  using std::runtime_error::runtime_error;
};

/// Classifies without throwing; the two routes are stored separately.
PointClass classify_pair(const PolynomialContactMap& map, const DifferentialPair& pair);

/// Throws ClassificationConflict when the routes disagree at a non-marginal point.
PointClass classify_point(const PolynomialContactMap& map, const Vec& x);

/// Lattice points of Box2(center, r): per-axis grids of `resolution` nodes over [-r^k, r^k], kept
/// when every layer lies in its open Euclidean ball, then left-translated by the center.
std::vector<Vec> box2_lattice(const Box2Ball& ball, int resolution);

struct ScanCensus
{
  std::size_t total = 0;
  std::size_t degenerate = 0;
  std::size_t characteristic = 0;
  std::size_t regular = 0;
  std::size_t marginal = 0;
  std::size_t disagreements = 0;           ///< non-marginal route disagreements
  std::size_t marginal_disagreements = 0;  ///< disagreements at marginal points
  std::size_t lemma_sum_i_failures = 0;    ///< nu0 < target Hausdorff dimension at a non-degenerate point
  std::size_t lemma_sum_ii_failures = 0;   ///< nu0 == nu~ but no witness of degrees <= target depth
  std::size_t first_block_failures = 0;    ///< V_1 not surjective yet classified Regular
  std::size_t block_propagation_failures = 0;  ///< V_1 onto, yet some V_k not onto
  std::vector<Vec> characteristic_points;
  std::vector<int> characteristic_nu0;
  std::vector<Vec> degenerate_points;
};

ScanCensus scan_grid(const PolynomialContactMap& map, const Box2Ball& box, int resolution);

}  // namespace carnot
