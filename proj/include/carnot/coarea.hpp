#pragma once

#include "carnot/measures.hpp"
#include "carnot/metrics.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace carnot {

/// Raised when the characteristic tube to excise exceeds the allowed share of the domain.
class ExcisionError : public std::runtime_error
{
 public:
  ExcisionError(const std::string& what, double fraction) : std::runtime_error(what), fraction_(fraction) {}
  double fraction() const { return fraction_; }

 private:
  double fraction_;
};

struct CoareaOptions
{
  QuadratureOptions lhs{.initial_nodes = 4};  ///< Gauss-Legendre ball integrator over the domain
  QuadratureOptions outer{};        ///< image-value axes
  QuadratureOptions inner{};        ///< free coordinates of each level set
  QuadratureOptions tube{};         ///< tube masses and excised volume
  int scan_resolution = 21;         ///< classification lattice per axis
  std::size_t range_samples = 4096;
  double excision_limit = 0.05;
  double balance_floor = 0.01;      ///< smallest accepted |ratio - 1| band
};

/// One outer node of the slice integral.
struct SliceRow
{
  std::vector<double> t;
  double level_measure_sr = 0.0;    ///< H^{nu - nu~} of the level inside the domain
  double level_measure_riem = 0.0;  ///< Riemannian surface measure of the same piece
  double excised_mass = 0.0;        ///< surface measure of the piece inside the excised tube
};

/// d2-tube around a finite sample set, in coordinates relative to a base point.
class SampleTube
{
 public:
  SampleTube() = default;
  SampleTube(const GroupPtr& group, std::vector<Vec> samples, double epsilon);

  bool empty() const { return samples_.empty(); }
  double epsilon() const { return eps_; }
  std::size_t size() const { return samples_.size(); }
  const std::vector<Vec>& samples() const { return samples_; }

  bool contains(const Vec& w) const;

  /// Per-axis box containing the tube: exact on layer 1, the given fallback elsewhere.
  void bounds(std::vector<double>& lo, std::vector<double>& hi) const;

 private:
  GroupPtr group_;
  std::vector<Vec> samples_;
  std::vector<double> keys_;
  int key_axis_ = -1;
  double eps_ = 0.0;
};

/**
 * @brief Characteristic points of the domain, densified along lattice neighbours.
 *
 * Returned in coordinates relative to the domain centre. Consecutive samples along each
 * lattice edge are at most epsilon / 2 apart in d2, and every sample is re-classified.
 */
std::vector<Vec> characteristic_samples(const PolynomialContactMap& map, const Box2Ball& domain, int resolution,
                                        double epsilon);

/// Convention-free integrals of one run; both constant modes are applied afterwards.
struct CoareaIntegrals
{
  std::string map_name;
  Vec center;
  double radius = 0.0;
  OmegaNormalization omega = OmegaNormalization::UnitBall;
  std::uint64_t seed = 0;
  MapDimensions dims;

  double hc_integral = 0.0;       ///< integral of D(hc differential) over the kept domain, Lebesgue
  double hc_error = 0.0;
  double pivot_integral = 0.0;    ///< integral of J_N~ * alpha over the kept domain, Lebesgue
  std::size_t lhs_nodes = 0;
  bool lhs_converged = false;

  double slice_sr = 0.0;          ///< Lebesgue integral over t of the level measures
  double slice_riem = 0.0;
  double slice_excised = 0.0;
  double slice_error = 0.0;
  std::size_t rhs_nodes = 0;
  bool rhs_converged = false;
  std::size_t newton_failures = 0;

  std::vector<int> dependent;     ///< coordinates solved for on each level set
  std::vector<double> t_lo, t_hi;
  std::vector<SliceRow> slices;

  double domain_volume = 0.0;
  double chi_epsilon = 0.0;
  std::size_t chi_samples = 0;
  double chi_excised_volume = 0.0;
  std::size_t census_total = 0, census_characteristic = 0, census_degenerate = 0;
  double z_fraction = 0.0;        ///< lattice share of degenerate points (masked, not excised)
};

struct VerificationReport
{
  CoareaIntegrals raw;
  MeasureConvention convention;
  double jsr = 0.0, kappa = 0.0, kappa_target = 0.0, alpha = 0.0;
  double lhs = 0.0, rhs = 0.0, ratio = 0.0;
  double lhs_error = 0.0, rhs_error = 0.0;
  double fubini_rhs = 0.0, fubini_difference = 0.0;
  double band = 0.0;

  /// Balanced runs must balance within the band; both conventions require converged quadrature.
  bool passed() const;
};

struct IntegralEstimate
{
  double value = 0.0;
  double error = 0.0;
  std::size_t nodes = 0;
};

/// Left side: kappa * J^SR constant * Lebesgue integral of D(hc differential) over the domain.
IntegralEstimate lhs_integral(const PolynomialContactMap& map, const Box2Ball& domain, const MeasureConvention& conv,
                              const CoareaOptions& opt = {});

/// Right side by slicing in the image values; ExcisionError when the characteristic tube is too large.
IntegralEstimate rhs_integral(const PolynomialContactMap& map, const Box2Ball& domain, const MeasureConvention& conv,
                              std::uint64_t seed, const CoareaOptions& opt = {});

CoareaIntegrals coarea_integrals(const PolynomialContactMap& map, const Box2Ball& domain, OmegaNormalization omega,
                                 std::uint64_t seed, const CoareaOptions& opt = {});

VerificationReport make_report(const CoareaIntegrals& raw, const MeasureConvention& conv, const CoareaOptions& opt = {});

VerificationReport verify(const PolynomialContactMap& map, const Box2Ball& domain, const MeasureConvention& conv,
                          std::uint64_t seed, const CoareaOptions& opt = {});

struct TubeMass
{
  double epsilon = 0.0;
  double lhs_mass = 0.0;
  double rhs_mass = 0.0;
  std::size_t samples = 0;
};

/// Both sides restricted to d2-tubes around the sampled characteristic set; zeros when it is empty.
std::vector<TubeMass> characteristic_contribution(const PolynomialContactMap& map, const Box2Ball& domain,
                                                  const std::vector<double>& epsilons, const MeasureConvention& conv,
                                                  std::uint64_t seed, const CoareaOptions& opt = {});

}  // namespace carnot
