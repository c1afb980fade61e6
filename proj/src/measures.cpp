#include "carnot/measures.hpp"

#include "carnot/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

namespace carnot {

std::string to_string(ConstantMode mode) { return mode == ConstantMode::PaperLiteral ? "paper" : "balanced"; }

ConstantMode constant_mode_from_string(const std::string& s)
{
  if (s == "paper" || s == "PaperLiteral") return ConstantMode::PaperLiteral;
  if (s == "balanced" || s == "Balanced") return ConstantMode::Balanced;
  throw std::invalid_argument("unknown convention '" + s + "' (expected paper or balanced)");
}

MapDimensions MapDimensions::of(const GradedNilpotentAlgebra& source, const GradedNilpotentAlgebra& target)
{
  MapDimensions d;
  d.N = source.dimension();
  d.target_N = target.dimension();
  d.nu = source.hausdorff_dimension();
  d.target_nu = target.hausdorff_dimension();
  const int depth = std::max(source.depth(), target.depth());
  for (int k = 1; k <= depth; ++k) {
    d.n.push_back(source.layer_dim(k));
    d.target_n.push_back(target.layer_dim(k));
  }
  return d;
}

PiRational regular_constant(const MapDimensions& d, OmegaNormalization norm)
{
  PiRational out;
  for (std::size_t k = 0; k < d.n.size(); ++k) {
    const int diff = d.n[k] - d.target_n[k];
    if (diff < 0)
      throw DomainError("layer " + std::to_string(k + 1) + " of the target is larger than the source layer");
    out = out * omega(diff, norm);
  }
  return out;
}

PiRational alpha_constant(const MapDimensions& d, OmegaNormalization norm)
{
  return omega(d.nu - d.target_nu, norm) / regular_constant(d, norm);
}

PiRational kappa(const GradedNilpotentAlgebra& alg, OmegaNormalization norm)
{
  return omega(alg.hausdorff_dimension(), norm) / box2_unit_volume(alg, norm);
}

PiRational jsr_constant(const MapDimensions& d, const MeasureConvention& conv)
{
  const auto norm = conv.omega;
  PiRational source_top = omega(d.N, norm), target_top = omega(d.target_N, norm);
  if (conv.mode == ConstantMode::Balanced) {
    source_top = PiRational{};
    target_top = PiRational{};
    for (int nk : d.n) source_top = source_top * omega(nk, norm);
    for (int nk : d.target_n) target_top = target_top * omega(nk, norm);
  }
  return source_top / omega(d.nu, norm) * (omega(d.target_nu, norm) / target_top) * alpha_constant(d, norm);
}

PiRational displayed_h1_to_r(OmegaNormalization norm)
{
  return omega(3, norm) * omega(3, norm) / (omega(4, norm) * PiRational{Rational(4), 0});
}

PiRational displayed_hn_to_rk(int n, int k, OmegaNormalization norm)
{
  return omega(2 * n + 1, norm) * omega(2 * n + 2 - k, norm) /
         (omega(2 * n + 2, norm) * omega(2 * n - k, norm) * PiRational{Rational(2), 0});
}

PiRational displayed_group_to_r(const GradedNilpotentAlgebra& alg, OmegaNormalization norm)
{
  PiRational den = omega(alg.hausdorff_dimension(), norm) * omega(alg.layer_dim(1) - 1, norm);
  for (int k = 2; k <= alg.depth(); ++k) den = den * omega(alg.layer_dim(k), norm);
  return omega(alg.dimension(), norm) * omega(alg.hausdorff_dimension() - 1, norm) / den;
}

double hc_gram(const DifferentialPair& pair)
{
  const double tau = rank_threshold(pair.full);
  for (const auto& b : pair.blocks) {
    if (b.rows() == 0) continue;
    if (b.cols() < b.rows()) return 0.0;
    Eigen::JacobiSVD<Mat> svd(b);
    const auto& sv = svd.singularValues();
    if (sv.size() < b.rows() || !(sv(b.rows() - 1) > tau)) return 0.0;
  }
  return gram_row(pair.hc());
}

double coarea_factor_sr(const PolynomialContactMap& map, const Vec& x, const MeasureConvention& conv)
{
  const auto d = MapDimensions::of(map.source()->algebra(), map.target()->algebra());
  return hc_gram(differential_pair(map, x)) * jsr_constant(d, conv).value();
}

double coarea_factor_riemannian(const PolynomialContactMap& map, const Vec& x)
{
  return gram_row(riemannian_differential(map, x));
}

namespace {

void require_regular(const PolynomialContactMap& map, const DifferentialPair& pair, const char* what)
{
  const PointClass pc = classify_pair(map, pair);
  if (pc.kind != PointKind::Regular)
    throw DomainError(std::string(what) + " needs a Regular point; got " + to_string(pc.kind));
}

}  // namespace

double measure_density_alpha(const PolynomialContactMap& map, const Vec& x, OmegaNormalization norm)
{
  const DifferentialPair pair = differential_pair(map, x);
  require_regular(map, pair, "alpha");
  const auto d = MapDimensions::of(map.source()->algebra(), map.target()->algebra());
  return alpha_constant(d, norm).value() * hc_gram(pair) / gram_row(pair.full);
}

double level_set_prediction(const PolynomialContactMap& map, const Vec& x, double r, OmegaNormalization norm)
{
  const DifferentialPair pair = differential_pair(map, x);
  require_regular(map, pair, "level-set prediction");
  const auto d = MapDimensions::of(map.source()->algebra(), map.target()->algebra());
  return regular_constant(d, norm).value() * gram_row(pair.full) / hc_gram(pair) * std::pow(r, d.nu - d.target_nu);
}

GradedKernel graded_kernel(const PolynomialContactMap& map, const Vec& x)
{
  const auto& alg = map.source()->algebra();
  const int n = alg.dimension(), m = map.target_dim();
  const Eigen::MatrixXd full = riemannian_differential(map, x);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(full, Eigen::ComputeFullV);
  const double tau = svd.singularValues().size() ? kRankRelTol * svd.singularValues()(0) : 0.0;
  int rank = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) rank += svd.singularValues()(i) > tau && tau > 0;
  if (rank < m) throw DomainError("differential is rank deficient; no transversal parametrization");

  GradedKernel out;
  out.complement = svd.matrixV().leftCols(m);
  std::vector<Eigen::VectorXd> basis;
  for (int k = 1; k <= alg.depth() && static_cast<int>(basis.size()) < n - m; ++k) {
    int higher = 0;
    for (int i = 0; i < n; ++i) higher += alg.degree(i) > k;
    Eigen::MatrixXd stacked = Eigen::MatrixXd::Zero(m + higher, n);
    stacked.topRows(m) = full;
    int row = m;
    for (int i = 0; i < n; ++i)
      if (alg.degree(i) > k) stacked(row++, i) = 1.0;
    Eigen::JacobiSVD<Eigen::MatrixXd> ksvd(stacked, Eigen::ComputeFullV);
    const auto& sv = ksvd.singularValues();
    int krank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) krank += sv(i) > 1e-10 * std::max(1.0, sv(0));
    for (int c = krank; c < n; ++c) {
      Eigen::VectorXd v = ksvd.matrixV().col(c);
      for (int pass = 0; pass < 2; ++pass)
        for (const auto& b : basis) v -= b.dot(v) * b;
      const double norm = v.norm();
      if (norm < 1e-8) continue;
      basis.push_back(v / norm);
      out.degrees.push_back(k);
    }
  }
  out.basis = Mat(n, n - m);
  for (std::size_t a = 0; a < basis.size(); ++a) out.basis.col(static_cast<Eigen::Index>(a)) = basis[a];
  return out;
}

namespace {

/// Extent of t * v inside Box2(0, r): min over layers of r^k / |v_k|.
double own_extent(const GradedNilpotentAlgebra& alg, const Vec& v, double r)
{
  double best = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= alg.depth(); ++k) {
    const double norm = v.segment(alg.layer_offset(k), alg.layer_dim(k)).norm();
    if (norm > 1e-14) best = std::min(best, std::pow(r, k) / norm);
  }
  return best;
}

/// Newton solve for the transverse part of a level-set graph over the kernel.
class LevelSetGraph
{
 public:
  LevelSetGraph(const PolynomialContactMap& map, const Vec& x, GradedKernel kernel)
      : map_(map), x_(x), phi_x_(map.evaluate(x)), k_(std::move(kernel))
  {
  }

  const GradedKernel& kernel() const { return k_; }

  enum class Status
  {
    Converged,
    Failed
  };

  /// Solves psi(K s + T tau) = 0; fills w and the transverse Jacobian products.
  Status solve(const double* s, Vec& w, Mat& jpsi) const
  {
    const int n = map_.source_dim(), m = map_.target_dim();
    const int d = n - m;
    Vec base = Vec::Zero(n);
    for (int a = 0; a < d; ++a) base += s[a] * k_.basis.col(a);
    Vec tau = Vec::Zero(m);
    w = base;
    double res = residual(w, jpsi);
    const double tol = 1e-12 * std::max(1.0, phi_x_.cwiseAbs().maxCoeff());
    for (int it = 0; it < 50; ++it) {
      if (res <= tol) return Status::Converged;
      const Mat jt = jpsi * k_.complement;
      const Vec step = jt.fullPivLu().solve(value_);
      if (!step.allFinite()) return Status::Failed;
      double lambda = 1.0;
      for (int back = 0; back < 12; ++back) {
        const Vec trial_tau = tau - lambda * step;
        Vec trial_w = base + k_.complement * trial_tau;
        Mat trial_j;
        const double trial_res = residual(trial_w, trial_j);
        if (trial_res < res || back == 11) {
          tau = trial_tau;
          w = trial_w;
          jpsi = trial_j;
          res = trial_res;
          break;
        }
        lambda *= 0.5;
      }
    }
    return res <= tol ? Status::Converged : Status::Failed;
  }

  /// Surface element of the graph at the solved point, in frame coordinates at w.
  double area_element(const Vec& w, const Mat& jpsi) const
  {
    const Mat jt = jpsi * k_.complement;
    const Mat tangent = k_.basis - k_.complement * jt.fullPivLu().solve(jpsi * k_.basis);
    const Mat fw = map_.source()->frame(w);
    return gram_col(fw.triangularView<Eigen::UnitLower>().solve(tangent));
  }

 private:
  double residual(const Vec& w, Mat& jpsi) const
  {
    const auto& grp = *map_.source();
    const Vec y = grp.product(x_, w);
    value_ = map_.evaluate(y) - phi_x_;
    const Mat a = map_.jacobian(y) * grp.frame(y);
    const Mat fw = grp.frame(w);
    jpsi = fw.transpose().triangularView<Eigen::UnitUpper>().solve(a.transpose()).transpose();
    return value_.cwiseAbs().maxCoeff();
  }

  const PolynomialContactMap& map_;
  Vec x_;
  Vec phi_x_;
  GradedKernel k_;
  mutable Vec value_;
};

template <class MakeIntegrand>
MeasureEstimate guarded_kernel_integral(const GradedNilpotentAlgebra& alg, const GradedKernel& kernel, double r,
                                        const QuadratureOptions& opt, MakeIntegrand&& make)
{
  const int d = static_cast<int>(kernel.basis.cols());
  if (d == 0) return {1.0, 0.0, 1, 0, true};
  std::vector<double> extent(static_cast<std::size_t>(d));
  for (int a = 0; a < d; ++a) extent[static_cast<std::size_t>(a)] = own_extent(alg, kernel.basis.col(a), r);
  for (int attempt = 0; attempt < 12; ++attempt) {
    std::vector<double> lo(extent.size()), hi(extent.size());
    for (std::size_t a = 0; a < extent.size(); ++a) {
      lo[a] = -extent[a];
      hi[a] = extent[a];
    }
    const Integrand<1> f = make();
    const auto q = refine_nested<1>(f, lo, hi, opt);
    bool grown = false;
    for (std::size_t a = 0; a < extent.size(); ++a)
      if (q.touched[a]) {
        extent[a] *= 1.5;
        grown = true;
      }
    if (!grown) return {q.value[0], q.error[0], q.nodes, q.per_axis, q.converged};
  }
  throw std::runtime_error("kernel parametrization extents did not stabilise");
}

}  // namespace

MeasureEstimate tangent_plane_box_measure(const PolynomialContactMap& map, const Vec& x, double r, const QuadratureOptions& opt)
{
  if (!(r > 0.0)) throw std::invalid_argument("radius must be positive");
  const auto& alg = map.source()->algebra();
  const GradedKernel kernel = graded_kernel(map, x);
  const int d = static_cast<int>(kernel.basis.cols());
  return guarded_kernel_integral(alg, kernel, r, opt, [&] {
    return Integrand<1>([&, d](const double* s) -> std::optional<std::array<double, 1>> {
      Vec w = Vec::Zero(alg.dimension());
      for (int a = 0; a < d; ++a) w += s[a] * kernel.basis.col(a);
      if (d2_norm(alg, w) < r) return std::array<double, 1>{1.0};
      return std::nullopt;
    });
  });
}

MeasureEstimate level_set_box_measure(const PolynomialContactMap& map, const Vec& x, double r, const QuadratureOptions& opt)
{
  if (!(r > 0.0)) throw std::invalid_argument("radius must be positive");
  const auto& alg = map.source()->algebra();
  {
    const DifferentialPair pair = differential_pair(map, x);
    require_regular(map, pair, "level-set measure");
  }
  const LevelSetGraph graph(map, x, graded_kernel(map, x));
  const int d = static_cast<int>(graph.kernel().basis.cols());
  return guarded_kernel_integral(alg, graph.kernel(), r, opt, [&] {
    return Integrand<1>([&, d](const double* s) -> std::optional<std::array<double, 1>> {
      Vec w;
      Mat jpsi;
      const auto status = graph.solve(s, w, jpsi);
      const double dist = d2_norm(alg, w);
      if (status == LevelSetGraph::Status::Failed) {
        if (dist >= r) return std::nullopt;
        std::ostringstream os;
        os << "level-set Newton did not converge at kernel node (";
        for (int a = 0; a < d; ++a) os << (a ? ", " : "") << s[a];
        os << "); radius " << r << " is too large for a graph parametrization";
        throw std::runtime_error(os.str());
      }
      if (dist >= r) return std::nullopt;
      return std::array<double, 1>{graph.area_element(w, jpsi)};
    });
  });
}

AsymptoticFit exponent_fit(const std::vector<double>& radii, const std::vector<double>& values)
{
  if (radii.size() != values.size()) throw std::invalid_argument("radii and values differ in length");
  if (radii.size() < 4) throw std::invalid_argument("exponent fit needs at least 4 radii");
  const auto [mn, mx] = std::minmax_element(radii.begin(), radii.end());
  if (!(*mn > 0.0)) throw std::invalid_argument("radii must be positive");
  if (*mx / *mn < 8.0 * (1 - 1e-12)) throw std::invalid_argument("radii must span a factor of at least 8");
  for (double v : values)
    if (!(v > 0.0)) throw std::invalid_argument("exponent fit needs positive values");
  const std::size_t n = radii.size();
  double sx = 0, sy = 0;
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    lx[i] = std::log(radii[i]);
    ly[i] = std::log(values[i]);
    sx += lx[i];
    sy += ly[i];
  }
  const double mx_ = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx_) * (lx[i] - mx_);
    sxy += (lx[i] - mx_) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  AsymptoticFit fit;
  fit.radii = radii;
  fit.values = values;
  fit.exponent = sxy / sxx;
  const double intercept = my - fit.exponent * mx_;
  fit.constant = std::exp(intercept);
  double ss_res = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = ly[i] - (intercept + fit.exponent * lx[i]);
    ss_res += e * e;
  }
  fit.r2 = syy > 0 ? std::max(0.0, 1.0 - ss_res / syy) : 1.0;
  return fit;
}

std::vector<Vec> level_set_cloud(const PolynomialContactMap& map, const Vec& x, double r, double h)
{
  if (!(h > 0.0) || !(r > 0.0)) throw std::invalid_argument("cloud spacing and radius must be positive");
  const auto& grp = *map.source();
  const auto& alg = grp.algebra();
  const LevelSetGraph graph(map, x, graded_kernel(map, x));
  const auto& kernel = graph.kernel();
  const int d = static_cast<int>(kernel.basis.cols());
  std::vector<double> extent(static_cast<std::size_t>(d)), step(static_cast<std::size_t>(d));
  std::vector<int> count(static_cast<std::size_t>(d));
  for (int a = 0; a < d; ++a) {
    extent[static_cast<std::size_t>(a)] = 1.5 * own_extent(alg, kernel.basis.col(a), r);
    step[static_cast<std::size_t>(a)] = std::pow(h, kernel.degrees[static_cast<std::size_t>(a)]);
    count[static_cast<std::size_t>(a)] = std::max(1, static_cast<int>(std::ceil(2 * extent[static_cast<std::size_t>(a)] / step[static_cast<std::size_t>(a)])));
  }
  std::size_t total = 1;
  for (int c : count) total *= static_cast<std::size_t>(c);
  std::vector<std::optional<Vec>> found(total);
  parallel_for(total, [&](std::size_t flat) {
    std::vector<double> s(static_cast<std::size_t>(d));
    std::size_t rest = flat;
    for (int a = d - 1; a >= 0; --a) {
      const auto ua = static_cast<std::size_t>(a);
      const std::size_t i = rest % static_cast<std::size_t>(count[ua]);
      rest /= static_cast<std::size_t>(count[ua]);
      s[ua] = -extent[ua] + (static_cast<double>(i) + 0.5) * step[ua];
    }
    Vec w;
    Mat j;
    if (graph.solve(s.data(), w, j) == LevelSetGraph::Status::Converged && d2_norm(alg, w) < r) found[flat] = grp.product(x, w);
  });
  std::vector<Vec> out;
  for (auto& p : found)
    if (p) out.push_back(*p);
  return out;
}

CoveringEstimate covering_hausdorff_estimate(const GroupPtr& group, const std::vector<Vec>& cloud, int alpha, double delta,
                                             std::uint64_t seed)
{
  if (cloud.empty()) throw std::invalid_argument("covering estimate of an empty cloud");
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
  const auto& grp = *group;
  const auto& alg = grp.algebra();
  const int n = alg.dimension();

  std::vector<double> lo(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity()), hi(static_cast<std::size_t>(n), -std::numeric_limits<double>::infinity());
  for (const auto& p : cloud)
    for (int i = 0; i < n; ++i) {
      lo[static_cast<std::size_t>(i)] = std::min(lo[static_cast<std::size_t>(i)], p(i));
      hi[static_cast<std::size_t>(i)] = std::max(hi[static_cast<std::size_t>(i)], p(i));
    }
  std::vector<bool> varies(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    varies[ui] = hi[ui] - lo[ui] > 1e-12 * std::max(1.0, std::abs(hi[ui]) + std::abs(lo[ui]));
  }

  std::mt19937_64 rng(seed);
  std::vector<double> sign(static_cast<std::size_t>(n));
  for (auto& s : sign) s = (rng() & 1u) ? 1.0 : -1.0;

  // Sweep key: the widest layer-1 axis first (its relative difference is exact), then the rest.
  int lead = 0;
  for (int i = 0; i < alg.layer_dim(1); ++i)
    if (hi[static_cast<std::size_t>(i)] - lo[static_cast<std::size_t>(i)] > hi[static_cast<std::size_t>(lead)] - lo[static_cast<std::size_t>(lead)]) lead = i;
  std::vector<int> key_axes{lead};
  for (int i = 0; i < n; ++i)
    if (i != lead) key_axes.push_back(i);

  std::vector<std::size_t> order(cloud.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    for (int i : key_axes) {
      const double ka = sign[static_cast<std::size_t>(i)] * cloud[a](i), kb = sign[static_cast<std::size_t>(i)] * cloud[b](i);
      if (ka != kb) return ka < kb;
    }
    return a < b;
  });
  std::vector<double> lead_key(order.size());
  for (std::size_t q = 0; q < order.size(); ++q) lead_key[q] = sign[static_cast<std::size_t>(lead)] * cloud[order[q]](lead);

  Vec tau = Vec::Zero(n);
  for (int k = 1; k <= alg.depth(); ++k) {
    int m = 0;
    for (int i = alg.layer_offset(k); i < alg.layer_offset(k) + alg.layer_dim(k); ++i) m += varies[static_cast<std::size_t>(i)];
    if (m == 0) continue;
    const double len = std::pow(delta, k) * (1.0 - 1e-9) / std::sqrt(static_cast<double>(m));
    for (int i = alg.layer_offset(k); i < alg.layer_offset(k) + alg.layer_dim(k); ++i)
      if (varies[static_cast<std::size_t>(i)]) tau(i) = sign[static_cast<std::size_t>(i)] * len;
  }

  std::vector<char> covered(order.size(), 0);
  std::size_t next = 0, balls = 0;
  for (;;) {
    while (next < order.size() && covered[next]) ++next;
    if (next == order.size()) break;
    const Vec center = grp.product(cloud[order[next]], tau);
    const Vec center_inv = grp.inverse(center);
    const double ck = sign[static_cast<std::size_t>(lead)] * center(lead);
    const auto first = std::lower_bound(lead_key.begin(), lead_key.end(), ck - delta) - lead_key.begin();
    const auto last = std::upper_bound(lead_key.begin(), lead_key.end(), ck + delta) - lead_key.begin();
    for (auto q = static_cast<std::size_t>(first); q < static_cast<std::size_t>(last); ++q) {
      if (covered[q]) continue;
      if (d2_norm(alg, grp.product(center_inv, cloud[order[q]])) < delta) covered[q] = 1;
    }
    if (!covered[next]) covered[next] = 1;  // guards against rounding at the boundary
    ++balls;
  }
  CoveringEstimate out;
  out.balls = balls;
  out.delta = delta;
  out.alpha = alpha;
  out.seed = seed;
  out.value = omega_value(alpha) * static_cast<double>(balls) * std::pow(delta, alpha);
  return out;
}

}  // namespace carnot
