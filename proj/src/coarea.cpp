#include "carnot/coarea.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>

namespace carnot {

namespace {

/// Domain box in relative coordinates: |w_i| < r^{deg_i}.
void domain_bounds(const GradedNilpotentAlgebra& alg, double r, std::vector<double>& lo, std::vector<double>& hi)
{
  const int n = alg.dimension();
  lo.assign(static_cast<std::size_t>(n), 0.0);
  hi.assign(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    hi[static_cast<std::size_t>(i)] = std::pow(r, alg.degree(i));
    lo[static_cast<std::size_t>(i)] = -hi[static_cast<std::size_t>(i)];
  }
}

/// Coordinate Jacobian of w -> phi(c . w), using dL_c = F(c w) F(w)^{-1}.
Mat relative_jacobian(const PolynomialContactMap& map, const Vec& y, const Vec& w)
{
  const auto& grp = *map.source();
  const Mat a = map.jacobian(y) * grp.frame(y);
  const Mat fw = grp.frame(w);
  return fw.transpose().triangularView<Eigen::UnitUpper>().solve(a.transpose()).transpose();
}

double alpha_at(const DifferentialPair& pair, double alpha_c)
{
  const double full = gram_row(pair.full);
  if (!(full > 0.0)) return 0.0;
  return alpha_c * hc_gram(pair) / full;
}

std::vector<std::vector<int>> subsets(int n, int k)
{
  std::vector<std::vector<int>> out;
  std::vector<bool> pick(static_cast<std::size_t>(n), false);
  std::fill(pick.begin(), pick.begin() + k, true);
  do {
    std::vector<int> s;
    for (int i = 0; i < n; ++i)
      if (pick[static_cast<std::size_t>(i)]) s.push_back(i);
    out.push_back(s);
  } while (std::prev_permutation(pick.begin(), pick.end()));
  return out;
}

enum class TubeMode
{
  Excise,   ///< points inside the tube are outside the support
  TubeOnly  ///< only points inside the tube are in the support
};

/// Level sets of w -> phi(c w) as graphs over the free coordinates.
class LevelSlicer
{
 public:
  LevelSlicer(const PolynomialContactMap& map, const Vec& center, double r, std::vector<int> dependent,
              const SampleTube& tube, TubeMode mode, double alpha_c)
      : map_(map), alg_(map.source()->algebra()), c_(center), r_(r), dep_(std::move(dependent)), tube_(tube),
        mode_(mode), alpha_c_(alpha_c)
  {
    const int n = alg_.dimension();
    std::vector<bool> is_dep(static_cast<std::size_t>(n), false);
    for (int d : dep_) is_dep[static_cast<std::size_t>(d)] = true;
    for (int i = 0; i < n; ++i)
      if (!is_dep[static_cast<std::size_t>(i)]) free_.push_back(i);
  }

  const std::vector<int>& free_axes() const { return free_; }
  std::size_t failures() const { return failures_.load(); }

  /// (alpha dA, dA, excised dA) at the level point with free coordinates u, or nullopt outside.
  std::optional<std::array<double, 3>> point(const double* t, const double* u) const
  {
    const int n = alg_.dimension(), m = static_cast<int>(dep_.size());
    Vec w = Vec::Zero(n);
    for (std::size_t a = 0; a < free_.size(); ++a) w(free_[a]) = u[a];
    // Free coordinates alone may already leave the domain.
    for (int k = 1; k <= alg_.depth(); ++k) {
      double s = 0.0;
      for (int i = alg_.layer_offset(k); i < alg_.layer_offset(k) + alg_.layer_dim(k); ++i) s += w(i) * w(i);
      if (std::sqrt(s) >= std::pow(r_, k)) return std::nullopt;
    }
    Vec target(m);
    for (int j = 0; j < m; ++j) target(j) = t[j];
    const double tol = 1e-12 * std::max(1.0, target.cwiseAbs().maxCoeff());
    const auto& grp = *map_.source();

    Vec y = grp.product(c_, w);
    Vec g = map_.evaluate(y) - target;
    double res = g.cwiseAbs().maxCoeff();
    Mat jw = relative_jacobian(map_, y, w);
    bool ok = res <= tol;
    for (int it = 0; it < 50 && !ok; ++it) {
      Mat jd(m, m);
      for (int j = 0; j < m; ++j) jd.col(j) = jw.col(dep_[static_cast<std::size_t>(j)]);
      const Vec step = jd.fullPivLu().solve(g);
      if (!step.allFinite()) break;
      double lambda = 1.0;
      for (int back = 0; back < 12; ++back) {
        Vec trial = w;
        for (int j = 0; j < m; ++j) trial(dep_[static_cast<std::size_t>(j)]) -= lambda * step(j);
        const Vec ty = grp.product(c_, trial);
        const Vec tg = map_.evaluate(ty) - target;
        const double tres = tg.cwiseAbs().maxCoeff();
        if (tres < res || back == 11) {
          w = trial;
          y = ty;
          g = tg;
          res = tres;
          break;
        }
        lambda *= 0.5;
      }
      jw = relative_jacobian(map_, y, w);
      ok = res <= tol;
    }
    if (!ok) {
      if (d2_norm(alg_, w) < r_) ++failures_;
      return std::nullopt;
    }
    if (d2_norm(alg_, w) >= r_) return std::nullopt;
    const bool in_tube = !tube_.empty() && tube_.contains(w);
    if ((mode_ == TubeMode::TubeOnly) != in_tube) return std::nullopt;

    // Tangent vectors of the graph: free unit vectors corrected along the dependent coordinates.
    Mat jd(m, m);
    for (int j = 0; j < m; ++j) jd.col(j) = jw.col(dep_[static_cast<std::size_t>(j)]);
    const auto lu = jd.fullPivLu();
    Mat tangent = Mat::Zero(n, static_cast<Eigen::Index>(free_.size()));
    for (std::size_t a = 0; a < free_.size(); ++a) {
      tangent(free_[a], static_cast<Eigen::Index>(a)) = 1.0;
      const Vec corr = lu.solve(jw.col(free_[a]));
      for (int j = 0; j < m; ++j) tangent(dep_[static_cast<std::size_t>(j)], static_cast<Eigen::Index>(a)) = -corr(j);
    }
    const double area = free_.empty() ? 1.0 : gram_col(grp.frame(w).triangularView<Eigen::UnitLower>().solve(tangent));
    const DifferentialPair pair = differential_pair(map_, y);
    return std::array<double, 3>{alpha_at(pair, alpha_c_) * area, area, in_tube ? area : 0.0};
  }

 private:
  const PolynomialContactMap& map_;
  const GradedNilpotentAlgebra& alg_;
  Vec c_;
  double r_;
  std::vector<int> dep_, free_;
  const SampleTube& tube_;
  TubeMode mode_;
  double alpha_c_;
  mutable std::atomic<std::size_t> failures_{0};
};

struct SliceIntegral
{
  std::array<double, 3> value{};
  std::array<double, 3> error{};
  std::size_t nodes = 0;
  bool converged = true;
  std::size_t failures = 0;
  std::vector<SliceRow> rows;
};

/// Widens each axis by 2.5% per side so support boundaries fall inside the box and get clipped.
void pad(std::vector<double>& lo, std::vector<double>& hi)
{
  for (std::size_t i = 0; i < lo.size(); ++i) {
    const double m = 0.025 * (hi[i] - lo[i]);
    lo[i] -= m;
    hi[i] += m;
  }
}

/// Outer integral over t of inner level integrals; rows at the final outer midpoints. With
/// `excised`, each row also carries the surface measure of its level inside the tube.
SliceIntegral slice_integral(const LevelSlicer& slicer, const std::vector<double>& t_lo, const std::vector<double>& t_hi,
                             std::vector<double> free_lo, std::vector<double> free_hi, const CoareaOptions& opt,
                             const LevelSlicer* excised = nullptr)
{
  pad(free_lo, free_hi);
  using Key = std::vector<double>;
  std::map<Key, std::array<double, 3>> memo;
  std::mutex memo_mutex;
  std::atomic<std::size_t> nodes{0};
  std::atomic<bool> inner_converged{true};
  const std::size_t m = t_lo.size();

  const Integrand<3> outer = [&](const double* t) -> std::optional<std::array<double, 3>> {
    std::optional<std::array<double, 3>> out;
    if (free_lo.empty()) {
      out = slicer.point(t, nullptr);
      ++nodes;
    } else {
      const Integrand<3> inner = [&](const double* u) { return slicer.point(t, u); };
      const auto q = refine_nested<3>(inner, free_lo, free_hi, opt.inner);
      nodes += q.nodes;
      if (!q.converged) inner_converged = false;
      if (!q.empty) out = q.value;
    }
    std::lock_guard<std::mutex> lock(memo_mutex);
    memo[Key(t, t + m)] = out.value_or(std::array<double, 3>{});
    return out;
  };
  // Cheap membership for boundary bisection: any node of the first inner grid on the level.
  const Support level_nonempty = [&](const double* t) {
    if (free_lo.empty()) return slicer.point(t, nullptr).has_value();
    const std::size_t k = free_lo.size();
    const int n = opt.inner.initial_nodes;
    std::size_t total = 1;
    for (std::size_t a = 0; a < k; ++a) total *= static_cast<std::size_t>(n);
    std::vector<double> u(k);
    for (std::size_t flat = 0; flat < total; ++flat) {
      std::size_t rest = flat;
      for (std::size_t a = 0; a < k; ++a) {
        const auto i = static_cast<double>(rest % static_cast<std::size_t>(n));
        rest /= static_cast<std::size_t>(n);
        u[a] = free_lo[a] + (i + 0.5) * (free_hi[a] - free_lo[a]) / n;
      }
      if (slicer.point(t, u.data())) return true;
    }
    return false;
  };
  const auto q = refine_nested<3>(outer, t_lo, t_hi, opt.outer, &level_nonempty);

  SliceIntegral out;
  out.value = q.value;
  out.error = q.error;
  out.nodes = nodes.load();
  out.converged = q.converged && inner_converged.load();
  out.failures = slicer.failures();

  // Rows at the midpoints of the final outer grid, in lexicographic index order.
  const int n = q.per_axis;
  std::size_t total = 1;
  for (std::size_t a = 0; a < m; ++a) total *= static_cast<std::size_t>(n);
  for (std::size_t flat = 0; flat < total; ++flat) {
    Key t(m);
    std::size_t rest = flat;
    for (std::size_t a = m; a-- > 0;) {
      const std::size_t i = rest % static_cast<std::size_t>(n);
      rest /= static_cast<std::size_t>(n);
      const double h = (t_hi[a] - t_lo[a]) / n;
      t[a] = t_lo[a] + (static_cast<double>(i) + 0.5) * h;
    }
    std::array<double, 3> v{};
    if (auto it = memo.find(t); it != memo.end()) {
      v = it->second;
    } else if (auto p = outer(t.data())) {
      v = *p;
    }
    out.rows.push_back({t, v[0], v[1], v[2]});
  }
  if (excised) {
    double cell = 1.0;
    for (std::size_t a = 0; a < m; ++a) cell *= (t_hi[a] - t_lo[a]) / n;
    parallel_for(out.rows.size(), [&](std::size_t k) {
      auto& row = out.rows[k];
      if (free_lo.empty()) {
        if (auto p = excised->point(row.t.data(), nullptr)) row.excised_mass = (*p)[1];
        return;
      }
      const Integrand<3> inner = [&](const double* u) { return excised->point(row.t.data(), u); };
      row.excised_mass = refine_nested<3>(inner, free_lo, free_hi, opt.inner).value[1];
    });
    KahanSum total;
    for (const auto& row : out.rows) total.add(row.excised_mass * cell);
    out.value[2] = total.value();
  }
  return out;
}

/// Dependent coordinates maximizing the smallest normalized minor over sample points.
std::vector<int> choose_dependent(const PolynomialContactMap& map, const Box2Ball& domain, std::uint64_t seed)
{
  const auto& grp = *map.source();
  const int n = grp.dimension(), m = map.target_dim();
  const Vec c = domain.center().coords();
  std::vector<Vec> rel;
  for (const auto& p : box2_lattice(Box2Ball(GroupPoint::identity(domain.group()), domain.radius()), 5)) rel.push_back(p);
  for (const auto& p : box2_samples(Box2Ball(GroupPoint::identity(domain.group()), domain.radius()), 256, seed))
    rel.push_back(p.coords());
  std::vector<Mat> jacs;
  for (const auto& w : rel) {
    Mat j = relative_jacobian(map, grp.product(c, w), w);
    const double scale = j.norm();
    if (scale > 0) jacs.push_back(j / scale);
  }
  std::vector<int> best;
  double best_score = -1.0;
  for (const auto& s : subsets(n, m)) {
    double score = std::numeric_limits<double>::infinity();
    for (const auto& j : jacs) {
      Mat sub(m, m);
      for (int a = 0; a < m; ++a) sub.col(a) = j.col(s[static_cast<std::size_t>(a)]);
      score = std::min(score, std::abs(sub.determinant()));
    }
    if (score > best_score) {
      best_score = score;
      best = s;
    }
  }
  if (!(best_score > 1e-10))
    throw DomainError("level sets of '" + map.name() + "' are not graphs over any coordinate choice on the domain");
  return best;
}

/// Image-value range of the domain from lattice and random samples, padded by 5% per side.
void image_range(const PolynomialContactMap& map, const Box2Ball& domain, std::uint64_t seed, const CoareaOptions& opt,
                 std::vector<double>& lo, std::vector<double>& hi)
{
  const int m = map.target_dim();
  lo.assign(static_cast<std::size_t>(m), std::numeric_limits<double>::infinity());
  hi.assign(static_cast<std::size_t>(m), -std::numeric_limits<double>::infinity());
  auto take = [&](const Vec& y) {
    const Vec v = map.evaluate(y);
    for (int j = 0; j < m; ++j) {
      lo[static_cast<std::size_t>(j)] = std::min(lo[static_cast<std::size_t>(j)], v(j));
      hi[static_cast<std::size_t>(j)] = std::max(hi[static_cast<std::size_t>(j)], v(j));
    }
  };
  for (const auto& p : box2_lattice(domain, 9)) take(p);
  for (const auto& p : box2_samples(domain, opt.range_samples, seed)) take(p.coords());
  for (int j = 0; j < m; ++j) {
    const auto uj = static_cast<std::size_t>(j);
    const double pad = 0.05 * (hi[uj] - lo[uj]);
    lo[uj] -= pad;
    hi[uj] += pad;
  }
}

double tube_volume(const GradedNilpotentAlgebra& alg, double r, const SampleTube& tube, const QuadratureOptions& opt)
{
  if (tube.empty()) return 0.0;
  std::vector<double> lo, hi;
  domain_bounds(alg, r, lo, hi);
  tube.bounds(lo, hi);
  pad(lo, hi);
  const Integrand<1> f = [&](const double* s) -> std::optional<std::array<double, 1>> {
    const Vec w = Eigen::Map<const Eigen::VectorXd>(s, alg.dimension());
    if (d2_norm(alg, w) < r && tube.contains(w)) return std::array<double, 1>{1.0};
    return std::nullopt;
  };
  return refine_nested<1>(f, lo, hi, opt).value[0];
}

}  // namespace

SampleTube::SampleTube(const GroupPtr& group, std::vector<Vec> samples, double epsilon)
    : group_(group), samples_(std::move(samples)), eps_(epsilon)
{
  if (!(epsilon > 0.0)) throw std::invalid_argument("tube radius must be positive");
  if (samples_.empty()) return;
  const auto& alg = group_->algebra();
  // Key on the coordinate with the widest spread whose offset bound is available.
  double best = -1.0;
  for (int i = 0; i < alg.layer_dim(1); ++i) {
    double lo = samples_[0](i), hi = lo;
    for (const auto& s : samples_) {
      lo = std::min(lo, s(i));
      hi = std::max(hi, s(i));
    }
    if (hi - lo > best) {
      best = hi - lo;
      key_axis_ = i;
    }
  }
  std::sort(samples_.begin(), samples_.end(), [&](const Vec& a, const Vec& b) { return a(key_axis_) < b(key_axis_); });
  for (const auto& s : samples_) keys_.push_back(s(key_axis_));
}

bool SampleTube::contains(const Vec& w) const
{
  if (samples_.empty()) return false;
  const auto& alg = group_->algebra();
  const auto first = std::upper_bound(keys_.begin(), keys_.end(), w(key_axis_) - eps_) - keys_.begin();
  const auto last = std::lower_bound(keys_.begin(), keys_.end(), w(key_axis_) + eps_) - keys_.begin();
  const int n1 = alg.layer_dim(1);
  for (auto q = first; q < last; ++q) {
    const Vec& s = samples_[static_cast<std::size_t>(q)];
    bool near = true;
    for (int i = 0; i < n1 && near; ++i) near = std::abs(w(i) - s(i)) < eps_;
    if (!near) continue;
    if (d2_norm(alg, group_->product(-s, w)) < eps_) return true;
  }
  return false;
}

void SampleTube::bounds(std::vector<double>& lo, std::vector<double>& hi) const
{
  if (samples_.empty()) return;
  const auto& alg = group_->algebra();
  for (int i = 0; i < alg.layer_dim(1); ++i) {
    double a = samples_[0](i), b = a;
    for (const auto& s : samples_) {
      a = std::min(a, s(i));
      b = std::max(b, s(i));
    }
    lo[static_cast<std::size_t>(i)] = std::max(lo[static_cast<std::size_t>(i)], a - eps_);
    hi[static_cast<std::size_t>(i)] = std::min(hi[static_cast<std::size_t>(i)], b + eps_);
  }
}

std::vector<Vec> characteristic_samples(const PolynomialContactMap& map, const Box2Ball& domain, int resolution,
                                        double epsilon)
{
  if (!(epsilon > 0.0)) throw std::invalid_argument("sample spacing must be positive");
  const auto& grp = *map.source();
  const auto& alg = grp.algebra();
  const int n = alg.dimension();
  const Vec c = domain.center().coords();
  const ScanCensus census = scan_grid(map, domain, resolution);
  std::vector<Vec> grid;
  for (const auto& p : census.characteristic_points) grid.push_back(grp.product(-c, p));

  std::vector<double> step(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) step[static_cast<std::size_t>(i)] = 2.0 * std::pow(domain.radius(), alg.degree(i)) / (resolution - 1);

  std::vector<Vec> out = grid;
  for (std::size_t a = 0; a < grid.size(); ++a)
    for (std::size_t b = a + 1; b < grid.size(); ++b) {
      const Vec d = grid[b] - grid[a];
      bool neighbour = true;
      for (int i = 0; i < n && neighbour; ++i) neighbour = std::abs(d(i)) <= 1.01 * step[static_cast<std::size_t>(i)];
      if (!neighbour) continue;
      int pieces = 1;
      for (int k = 1; k <= alg.depth(); ++k) {
        const double len = d.segment(alg.layer_offset(k), alg.layer_dim(k)).norm();
        pieces = std::max(pieces, static_cast<int>(std::ceil(len / std::pow(0.5 * epsilon, k))));
      }
      pieces = std::min(pieces, 100000);
      for (int j = 1; j < pieces; ++j) {
        const Vec w = grid[a] + (static_cast<double>(j) / pieces) * d;
        const PointClass pc = classify_pair(map, differential_pair(map, grp.product(c, w)));
        if (pc.kind == PointKind::Characteristic) out.push_back(w);
      }
    }
  return out;
}

CoareaIntegrals coarea_integrals(const PolynomialContactMap& map, const Box2Ball& domain, OmegaNormalization omega,
                                 std::uint64_t seed, const CoareaOptions& opt)
{
  if (domain.group() != map.source() && domain.group()->dimension() != map.source_dim())
    throw AlgebraMismatchError("domain and map source differ");
  const auto& grp = *map.source();
  const auto& alg = grp.algebra();
  const auto dims = MapDimensions::of(alg, map.target()->algebra());
  const double alpha_c = alpha_constant(dims, omega).value();
  const double r = domain.radius();

  CoareaIntegrals out;
  out.map_name = map.name();
  out.center = domain.center().coords();
  out.radius = r;
  out.omega = omega;
  out.seed = seed;
  out.dims = dims;
  out.domain_volume = box2_lebesgue_volume(alg, r);

  const ScanCensus census = scan_grid(map, domain, opt.scan_resolution);
  out.census_total = census.total;
  out.census_characteristic = census.characteristic;
  out.census_degenerate = census.degenerate;
  out.z_fraction = census.total ? static_cast<double>(census.degenerate) / census.total : 0.0;

  SampleTube tube;
  if (census.characteristic > 0) {
    out.chi_epsilon = 2.0 * 2.0 * r / (opt.scan_resolution - 1);
    tube = SampleTube(map.source(), characteristic_samples(map, domain, opt.scan_resolution, out.chi_epsilon),
                      out.chi_epsilon);
    out.chi_samples = tube.size();
    out.chi_excised_volume = tube_volume(alg, r, tube, opt.tube);
    const double fraction = out.chi_excised_volume / out.domain_volume;
    if (fraction > opt.excision_limit) {
      std::ostringstream os;
      os << "characteristic tube covers " << 100 * fraction << "% of the domain (limit " << 100 * opt.excision_limit
         << "%); the coarea comparison would not be trustworthy";
      throw ExcisionError(os.str(), fraction);
    }
  }

  const Vec c = out.center;
  const Integrand<2> lhs = [&](const double* s) -> std::optional<std::array<double, 2>> {
    const Vec w = Eigen::Map<const Eigen::VectorXd>(s, alg.dimension());
    if (!tube.empty() && tube.contains(w)) return std::nullopt;
    const DifferentialPair pair = differential_pair(map, grp.product(c, w));
    return std::array<double, 2>{hc_gram(pair), gram_row(pair.full) * alpha_at(pair, alpha_c)};
  };
  const auto ql = refine_box2_ball<2>(alg, r, lhs, opt.lhs);
  out.hc_integral = ql.value[0];
  out.pivot_integral = ql.value[1];
  out.hc_error = ql.error[0];
  out.lhs_nodes = ql.nodes;
  out.lhs_converged = ql.converged;

  image_range(map, domain, seed, opt, out.t_lo, out.t_hi);
  bool flat = false;
  for (std::size_t j = 0; j < out.t_lo.size(); ++j) flat |= !(out.t_hi[j] > out.t_lo[j]);
  if (flat) {
    out.rhs_converged = true;
    return out;
  }
  out.dependent = choose_dependent(map, domain, seed);
  const LevelSlicer slicer(map, c, r, out.dependent, tube, TubeMode::Excise, alpha_c);
  std::vector<double> lo, hi, free_lo, free_hi;
  domain_bounds(alg, r, lo, hi);
  for (int i : slicer.free_axes()) {
    free_lo.push_back(lo[static_cast<std::size_t>(i)]);
    free_hi.push_back(hi[static_cast<std::size_t>(i)]);
  }
  const LevelSlicer inside(map, c, r, out.dependent, tube, TubeMode::TubeOnly, alpha_c);
  const SliceIntegral si = slice_integral(slicer, out.t_lo, out.t_hi, free_lo, free_hi, opt, tube.empty() ? nullptr : &inside);
  out.slice_sr = si.value[0];
  out.slice_riem = si.value[1];
  out.slice_excised = si.value[2];
  out.slice_error = si.error[0];
  out.rhs_nodes = si.nodes;
  out.rhs_converged = si.converged;
  out.newton_failures = si.failures;
  out.slices = si.rows;
  return out;
}

bool VerificationReport::passed() const
{
  if (!raw.lhs_converged || !raw.rhs_converged) return false;
  if (convention.mode != ConstantMode::Balanced) return true;
  if (lhs == 0.0 && rhs == 0.0) return true;
  return std::isfinite(ratio) && std::abs(ratio - 1.0) <= band;
}

VerificationReport make_report(const CoareaIntegrals& raw, const MeasureConvention& conv, const CoareaOptions& opt)
{
  if (conv.omega != raw.omega) throw std::invalid_argument("report normalization differs from the integrals'");
  const auto& dims = raw.dims;
  auto density = [&](int nu, const std::vector<int>& layers) {
    PiRational den;
    for (int nk : layers) den = den * omega(nk, conv.omega);
    return (omega(nu, conv.omega) / den).value();
  };
  VerificationReport rep;
  rep.raw = raw;
  rep.convention = conv;
  rep.jsr = jsr_constant(dims, conv).value();
  rep.kappa = density(dims.nu, dims.n);
  rep.kappa_target = density(dims.target_nu, dims.target_n);
  rep.alpha = alpha_constant(dims, conv.omega).value();
  rep.lhs = rep.kappa * rep.jsr * raw.hc_integral;
  rep.rhs = rep.kappa_target * raw.slice_sr;
  rep.lhs_error = rep.kappa * rep.jsr * raw.hc_error;
  rep.rhs_error = rep.kappa_target * raw.slice_error;
  rep.fubini_rhs = rep.kappa_target * raw.pivot_integral;
  rep.ratio = rep.lhs != 0.0 ? rep.rhs / rep.lhs : std::numeric_limits<double>::quiet_NaN();
  rep.fubini_difference = rep.fubini_rhs != 0.0 ? std::abs(rep.rhs / rep.fubini_rhs - 1.0) : std::abs(rep.rhs);
  const double combined = (rep.lhs != 0.0 ? rep.lhs_error / std::abs(rep.lhs) : 0.0) +
                          (rep.rhs != 0.0 ? rep.rhs_error / std::abs(rep.rhs) : 0.0);
  rep.band = std::max(opt.balance_floor, combined);
  return rep;
}

VerificationReport verify(const PolynomialContactMap& map, const Box2Ball& domain, const MeasureConvention& conv,
                          std::uint64_t seed, const CoareaOptions& opt)
{
  const CoareaIntegrals raw = coarea_integrals(map, domain, conv.omega, seed, opt);
  return make_report(raw, conv, opt);
}

IntegralEstimate lhs_integral(const PolynomialContactMap& map, const Box2Ball& domain, const MeasureConvention& conv,
                              const CoareaOptions& opt)
{
  const auto& grp = *map.source();
  const auto& alg = grp.algebra();
  const auto dims = MapDimensions::of(alg, map.target()->algebra());
  const double scale = kappa(alg, conv.omega).value() * jsr_constant(dims, conv).value();
  const Vec c = domain.center().coords();
  const Integrand<1> f = [&](const double* s) -> std::optional<std::array<double, 1>> {
    const Vec w = Eigen::Map<const Eigen::VectorXd>(s, alg.dimension());
    return std::array<double, 1>{hc_gram(differential_pair(map, grp.product(c, w)))};
  };
  const auto q = refine_box2_ball<1>(alg, domain.radius(), f, opt.lhs);
  if (!q.converged) throw std::runtime_error("left-side quadrature did not converge within the node cap");
  return {scale * q.value[0], scale * q.error[0], q.nodes};
}

IntegralEstimate rhs_integral(const PolynomialContactMap& map, const Box2Ball& domain, const MeasureConvention& conv,
                              std::uint64_t seed, const CoareaOptions& opt)
{
  const CoareaIntegrals raw = coarea_integrals(map, domain, conv.omega, seed, opt);
  const double k = kappa(map.target()->algebra(), conv.omega).value();
  return {k * raw.slice_sr, k * raw.slice_error, raw.rhs_nodes};
}

std::vector<TubeMass> characteristic_contribution(const PolynomialContactMap& map, const Box2Ball& domain,
                                                  const std::vector<double>& epsilons, const MeasureConvention& conv,
                                                  std::uint64_t seed, const CoareaOptions& opt)
{
  std::vector<TubeMass> out;
  for (double e : epsilons) out.push_back({e, 0.0, 0.0, 0});
  if (epsilons.empty()) return out;
  const auto& grp = *map.source();
  const auto& alg = grp.algebra();
  const auto dims = MapDimensions::of(alg, map.target()->algebra());
  const double alpha_c = alpha_constant(dims, conv.omega).value();
  const double lhs_scale = kappa(alg, conv.omega).value() * jsr_constant(dims, conv).value();
  const double rhs_scale = kappa(map.target()->algebra(), conv.omega).value();
  const double r = domain.radius();
  const Vec c = domain.center().coords();

  const double smallest = *std::min_element(epsilons.begin(), epsilons.end());
  const std::vector<Vec> samples = characteristic_samples(map, domain, opt.scan_resolution, smallest);
  if (samples.empty()) return out;

  std::vector<double> t_lo, t_hi;
  image_range(map, domain, seed, opt, t_lo, t_hi);
  const std::vector<int> dependent = choose_dependent(map, domain, seed);

  for (auto& tm : out) {
    const SampleTube tube(map.source(), samples, tm.epsilon);
    tm.samples = tube.size();
    std::vector<double> lo, hi;
    domain_bounds(alg, r, lo, hi);
    tube.bounds(lo, hi);
    std::vector<double> box_lo = lo, box_hi = hi;
    pad(box_lo, box_hi);
    const Integrand<1> lhs = [&](const double* s) -> std::optional<std::array<double, 1>> {
      const Vec w = Eigen::Map<const Eigen::VectorXd>(s, alg.dimension());
      if (!(d2_norm(alg, w) < r) || !tube.contains(w)) return std::nullopt;
      return std::array<double, 1>{hc_gram(differential_pair(map, grp.product(c, w)))};
    };
    tm.lhs_mass = lhs_scale * refine_nested<1>(lhs, box_lo, box_hi, opt.tube).value[0];

    const LevelSlicer slicer(map, c, r, dependent, tube, TubeMode::TubeOnly, alpha_c);
    std::vector<double> free_lo, free_hi;
    for (int i : slicer.free_axes()) {
      free_lo.push_back(lo[static_cast<std::size_t>(i)]);
      free_hi.push_back(hi[static_cast<std::size_t>(i)]);
    }
    bool flat = false;
    for (std::size_t j = 0; j < t_lo.size(); ++j) flat |= !(t_hi[j] > t_lo[j]);
    if (!flat) tm.rhs_mass = rhs_scale * slice_integral(slicer, t_lo, t_hi, free_lo, free_hi, opt).value[0];
  }
  return out;
}

}  // namespace carnot
