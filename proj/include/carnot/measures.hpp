#pragma once

#include "carnot/classify.hpp"
#include "carnot/omega.hpp"
#include "carnot/quadrature.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace carnot {

inline constexpr const char* kHausdorffMetric = "d2-spherical";
inline constexpr const char* kGConvention = "left-invariant, frames orthonormal";

enum class ConstantMode
{
  PaperLiteral,  ///< omega_N / omega_nu * omega_nu~ / omega_N~ * omega_{nu-nu~} / prod omega_{n_k-n~_k}
  Balanced       ///< omega_N / omega_N~ replaced by prod omega_{n_k} / prod omega_{n~_k}
};

std::string to_string(ConstantMode mode);
ConstantMode constant_mode_from_string(const std::string& s);

struct MeasureConvention
{
  ConstantMode mode = ConstantMode::Balanced;
  OmegaNormalization omega = OmegaNormalization::UnitBall;
};

class DomainError : public std::domain_error
{
 public:
  using std::domain_error::domain_error;
};

/// Layer data of a source/target pair, padded with zeros to the larger depth.
struct MapDimensions
{
  int N = 0, target_N = 0, nu = 0, target_nu = 0;
  std::vector<int> n, target_n;

  static MapDimensions of(const GradedNilpotentAlgebra& source, const GradedNilpotentAlgebra& target);
};

/// prod_k omega_{n_k - n~_k}; throws DomainError when some n_k < n~_k.
PiRational regular_constant(const MapDimensions& d, OmegaNormalization norm = OmegaNormalization::UnitBall);

/// omega_{nu - nu~} / prod_k omega_{n_k - n~_k}.
PiRational alpha_constant(const MapDimensions& d, OmegaNormalization norm = OmegaNormalization::UnitBall);

/// Density of the d2-spherical H^nu against Lebesgue: omega_nu / prod_k omega_{n_k}.
PiRational kappa(const GradedNilpotentAlgebra& alg, OmegaNormalization norm = OmegaNormalization::UnitBall);

/// Constant multiplying the Gram determinant of the hc-differential in J^SR.
PiRational jsr_constant(const MapDimensions& d, const MeasureConvention& conv);

/// Displayed closed forms, for comparison with jsr_constant.
PiRational displayed_h1_to_r(OmegaNormalization norm = OmegaNormalization::UnitBall);
PiRational displayed_hn_to_rk(int n, int k, OmegaNormalization norm = OmegaNormalization::UnitBall);
PiRational displayed_group_to_r(const GradedNilpotentAlgebra& alg, OmegaNormalization norm = OmegaNormalization::UnitBall);

/// Gram determinant of the assembled hc-differential; 0 when its numerical rank is below N~.
double hc_gram(const DifferentialPair& pair);

double coarea_factor_sr(const PolynomialContactMap& map, const Vec& x, const MeasureConvention& conv);

/// gram_row of D phi(x) in the frames.
double coarea_factor_riemannian(const PolynomialContactMap& map, const Vec& x);

/// alpha(x) = alpha_constant * D(hc) / D(full); DomainError unless x is Regular.
double measure_density_alpha(const PolynomialContactMap& map, const Vec& x, OmegaNormalization norm = OmegaNormalization::UnitBall);

/// prod omega_{n_k - n~_k} * D(D phi) / D(hc) * r^{nu - nu~}; the metric factor is 1 for orthonormal frames.
double level_set_prediction(const PolynomialContactMap& map, const Vec& x, double r,
                            OmegaNormalization norm = OmegaNormalization::UnitBall);

struct MeasureEstimate
{
  double value = 0.0;
  double error = 0.0;
  std::size_t nodes = 0;
  int per_axis = 0;
  bool converged = false;
};

/**
 * Orthonormal kernel basis of D phi(x) ordered by the highest layer each vector reaches.
 * Column a has degree degrees[a].
 */
struct GradedKernel
{
  Mat basis;                 ///< N x (N - N~), frame coordinates
  Mat complement;            ///< N x N~, orthonormal complement
  std::vector<int> degrees;
};

GradedKernel graded_kernel(const PolynomialContactMap& map, const Vec& x);

/// Lebesgue (N - N~)-measure of ker D phi(x) intersected with Box2(0, r).
MeasureEstimate tangent_plane_box_measure(const PolynomialContactMap& map, const Vec& x, double r,
                                          const QuadratureOptions& opt = {});

/// Riemannian surface measure of phi^{-1}(phi(x)) intersected with Box2(x, r).
MeasureEstimate level_set_box_measure(const PolynomialContactMap& map, const Vec& x, double r,
                                      const QuadratureOptions& opt = {});

struct AsymptoticFit
{
  std::vector<double> radii;
  std::vector<double> values;
  double exponent = 0.0;
  double constant = 0.0;
  double r2 = 0.0;
};

/// Log-log least squares; needs >= 4 radii spanning a factor >= 8 and positive values.
AsymptoticFit exponent_fit(const std::vector<double>& radii, const std::vector<double>& values);

/// Points of the level set through x inside Box2(x, r) on a kernel grid with spacing h^deg per axis.
std::vector<Vec> level_set_cloud(const PolynomialContactMap& map, const Vec& x, double r, double h);

struct CoveringEstimate
{
  double value = 0.0;
  std::size_t balls = 0;
  double delta = 0.0;
  int alpha = 0;
  std::uint64_t seed = 0;
};

/**
 * @brief Greedy d2-ball cover of a point cloud, omega_alpha * count * delta^alpha.
 *
 * Points are swept in lexicographic order (the seed picks the direction of each axis). Each
 * ball is placed so the first uncovered point sits on its trailing boundary, which avoids the
 * overlap of centred greedy covers.
 */
CoveringEstimate covering_hausdorff_estimate(const GroupPtr& group, const std::vector<Vec>& cloud, int alpha, double delta,
                                             std::uint64_t seed);

}  // namespace carnot
