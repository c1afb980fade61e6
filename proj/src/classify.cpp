#include "carnot/classify.hpp"

#include "carnot/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace carnot {

std::string to_string(PointKind kind)
{
  switch (kind) {
    case PointKind::Degenerate: return "Degenerate";
    case PointKind::Characteristic: return "Characteristic";
    case PointKind::Regular: return "Regular";
  }
  return "?";
}

namespace {

struct RankInfo
{
  int rank = 0;
  bool marginal = false;
};

bool in_marginal_band(double s, double tau) { return tau > 0.0 && s >= tau / 10.0 && s <= tau * 10.0; }

RankInfo rank_of(const Mat& a, double tau)
{
  RankInfo out;
  if (a.rows() == 0 || a.cols() == 0) return out;
  Eigen::JacobiSVD<Mat> svd(a);
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
    const double s = svd.singularValues()(i);
    if (s > tau && s > 0.0) ++out.rank;
    out.marginal |= in_marginal_band(s, tau);
  }
  return out;
}

double binomial(int n, int k)
{
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}

Mat select_columns(const Mat& full, const std::vector<int>& cols)
{
  Mat out(full.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) out.col(static_cast<Eigen::Index>(c)) = full.col(cols[c]);
  return out;
}

}  // namespace

double rank_threshold(const Mat& full)
{
  if (full.size() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(full);
  return kRankRelTol * svd.singularValues()(0);
}

Nu0Result nu0_greedy(const Mat& full, std::span<const int> source_degrees, double threshold)
{
  Nu0Result out;
  const int m = static_cast<int>(full.rows()), n = static_cast<int>(full.cols());
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return source_degrees[static_cast<std::size_t>(a)] < source_degrees[static_cast<std::size_t>(b)]; });
  if (m == 0) {
    out.value = 0;
    return out;
  }
  int rank = 0;
  for (int c : order) {
    std::vector<int> trial = out.witness;
    trial.push_back(c);
    const RankInfo info = rank_of(select_columns(full, trial), threshold);
    out.marginal |= info.marginal;
    if (info.rank > rank) {
      rank = info.rank;
      out.witness = trial;
      if (rank == m) break;
    }
  }
  if (rank == m) {
    int sum = 0;
    for (int c : out.witness) sum += source_degrees[static_cast<std::size_t>(c)];
    out.value = sum;
  } else {
    out.witness.clear();
  }
  return out;
}

Nu0Result nu0(const Mat& full, std::span<const int> source_degrees, double threshold, bool allow_enumeration)
{
  const int m = static_cast<int>(full.rows()), n = static_cast<int>(full.cols());
  if (!allow_enumeration || binomial(n, m) > kMaxNu0Subsets) return nu0_greedy(full, source_degrees, threshold);
  Nu0Result out;
  out.enumerated = true;
  if (m == 0) {
    out.value = 0;
    return out;
  }
  // Gosper-free subset walk in lexicographic order; keep the best degree sum.
  std::vector<int> idx(static_cast<std::size_t>(m));
  std::iota(idx.begin(), idx.end(), 0);
  int lower_bound = 0;
  {
    std::vector<int> sorted(source_degrees.begin(), source_degrees.end());
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < m; ++i) lower_bound += sorted[static_cast<std::size_t>(i)];
  }
  for (;;) {
    int sum = 0;
    for (int c : idx) sum += source_degrees[static_cast<std::size_t>(c)];
    if (!out.value || sum < *out.value) {
      const RankInfo info = rank_of(select_columns(full, idx), threshold);
      out.marginal |= info.marginal;
      if (info.rank == m) {
        out.value = sum;
        out.witness = idx;
        if (sum == lower_bound) break;
      }
    }
    int pos = m - 1;
    while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == n - m + pos) --pos;
    if (pos < 0) break;
    ++idx[static_cast<std::size_t>(pos)];
    for (int q = pos + 1; q < m; ++q) idx[static_cast<std::size_t>(q)] = idx[static_cast<std::size_t>(q) - 1] + 1;
  }
  return out;
}

std::optional<int> nu0(const PolynomialContactMap& map, const Vec& x)
{
  const Mat full = riemannian_differential(map, x);
  return nu0(full, map.source()->algebra().degrees(), rank_threshold(full)).value;
}

PointClass classify_pair(const PolynomialContactMap& map, const DifferentialPair& pair)
{
  const auto& tgt = map.target()->algebra();
  const int target_dim = tgt.dimension();
  PointClass out;
  const double tau = rank_threshold(pair.full);
  const RankInfo full = rank_of(pair.full, tau);
  out.rank_full = full.rank;
  out.marginal = full.marginal;
  bool all_onto = true;
  for (const auto& b : pair.blocks) {
    const RankInfo info = rank_of(b, tau);
    out.rank_hc += info.rank;
    out.marginal |= info.marginal;
    all_onto &= info.rank == b.rows();
  }
  const Nu0Result nu = nu0(pair.full, map.source()->algebra().degrees(), tau);
  out.marginal |= nu.marginal;
  out.nu0 = nu.value;
  out.witness = nu.witness;

  if (out.rank_full < target_dim) {
    out.surjectivity_route = PointKind::Degenerate;
  } else {
    out.surjectivity_route = all_onto ? PointKind::Regular : PointKind::Characteristic;
  }
  if (!nu.value)
    out.nu0_route = PointKind::Degenerate;
  else
    out.nu0_route = *nu.value == tgt.hausdorff_dimension() ? PointKind::Regular : PointKind::Characteristic;
  out.routes_agree = out.nu0_route == out.surjectivity_route;
  out.kind = out.surjectivity_route;
  return out;
}

PointClass classify_point(const PolynomialContactMap& map, const Vec& x)
{
  const PointClass pc = classify_pair(map, differential_pair(map, x));
  if (!pc.routes_agree && !pc.marginal)
    throw ClassificationConflict("classification routes disagree at a non-marginal point: surjectivity says " +
                                 to_string(pc.surjectivity_route) + ", nu0 says " + to_string(pc.nu0_route));
  return pc;
}

std::vector<Vec> box2_lattice(const Box2Ball& ball, int resolution)
{
  if (resolution < 2) throw std::invalid_argument("resolution must be at least 2");
  const auto& grp = *ball.group();
  const auto& alg = grp.algebra();
  const int n = alg.dimension();
  std::vector<double> axis(static_cast<std::size_t>(resolution));
  for (int i = 0; i < resolution; ++i) axis[static_cast<std::size_t>(i)] = -1.0 + 2.0 * i / (resolution - 1);
  std::vector<Vec> out;
  std::vector<int> counter(static_cast<std::size_t>(n), 0);
  Vec w(n);
  for (;;) {
    bool inside = true;
    for (int k = 1; k <= alg.depth() && inside; ++k) {
      const double rk = std::pow(ball.radius(), k);
      double sq = 0.0;
      for (int i = alg.layer_offset(k); i < alg.layer_offset(k) + alg.layer_dim(k); ++i) {
        w(i) = rk * axis[static_cast<std::size_t>(counter[static_cast<std::size_t>(i)])];
        sq += w(i) * w(i);
      }
      inside = std::sqrt(sq) < rk * (1.0 - 1e-12);
    }
    if (inside) out.push_back(grp.product(ball.center().coords(), w));
    int d = n - 1;
    while (d >= 0 && ++counter[static_cast<std::size_t>(d)] == resolution) counter[static_cast<std::size_t>(d--)] = 0;
    if (d < 0) break;
  }
  return out;
}

ScanCensus scan_grid(const PolynomialContactMap& map, const Box2Ball& box, int resolution)
{
  const std::vector<Vec> points = box2_lattice(box, resolution);
  std::vector<PointClass> classes(points.size());
  std::vector<bool> first_block_onto(points.size()), lemma_ii(points.size(), true);
  const auto& tgt = map.target()->algebra();
  const auto& src = map.source()->algebra();
  parallel_for(points.size(), [&](std::size_t p) {
    const DifferentialPair pair = differential_pair(map, points[p]);
    classes[p] = classify_pair(map, pair);
    const double tau = rank_threshold(pair.full);
    first_block_onto[p] = rank_of(pair.blocks.front(), tau).rank == pair.blocks.front().rows();
    const auto& pc = classes[p];
    if (pc.nu0 && *pc.nu0 == tgt.hausdorff_dimension()) {
      const Nu0Result g = nu0_greedy(pair.full, src.degrees(), tau);
      int max_deg = 0;
      for (int c : g.witness) max_deg = std::max(max_deg, src.degree(c));
      lemma_ii[p] = g.value && *g.value == *pc.nu0 && max_deg <= tgt.depth();
    }
  });
  ScanCensus census;
  census.total = points.size();
  for (std::size_t p = 0; p < points.size(); ++p) {
    const auto& pc = classes[p];
    switch (pc.kind) {
      case PointKind::Degenerate:
        ++census.degenerate;
        census.degenerate_points.push_back(points[p]);
        break;
      case PointKind::Characteristic:
        ++census.characteristic;
        census.characteristic_points.push_back(points[p]);
        census.characteristic_nu0.push_back(pc.nu0.value_or(-1));
        break;
      case PointKind::Regular: ++census.regular; break;
    }
    census.marginal += pc.marginal;
    if (!pc.routes_agree) (pc.marginal ? census.marginal_disagreements : census.disagreements)++;
    if (pc.kind != PointKind::Degenerate && pc.nu0 && *pc.nu0 < tgt.hausdorff_dimension()) ++census.lemma_sum_i_failures;
    if (!lemma_ii[p]) ++census.lemma_sum_ii_failures;
    if (!first_block_onto[p] && pc.kind == PointKind::Regular) ++census.first_block_failures;
    if (first_block_onto[p] && pc.kind != PointKind::Regular && !pc.marginal)
      ++census.block_propagation_failures;
  }
  return census;
}

}  // namespace carnot
