#include "carnot/group.hpp"

#include <cmath>
#include <functional>
#include <random>

namespace carnot {

namespace {

using SymPoly = Polynomial<Rational>;
using SymVec = std::vector<SymPoly>;

struct RationalEntry
{
  int i, j, k;
  Rational c;
};

SymVec sym_bracket(const SymVec& p, const SymVec& q, const std::vector<RationalEntry>& entries, std::size_t nvars)
{
  SymVec out(p.size(), SymPoly(nvars));
  for (const auto& e : entries) {
    const auto& pi = p[static_cast<std::size_t>(e.i)];
    const auto& pj = p[static_cast<std::size_t>(e.j)];
    const auto& qi = q[static_cast<std::size_t>(e.i)];
    const auto& qj = q[static_cast<std::size_t>(e.j)];
    if ((pi.is_zero() || qj.is_zero()) && (pj.is_zero() || qi.is_zero())) continue;
    out[static_cast<std::size_t>(e.k)] += (pi * qj - pj * qi) * e.c;
  }
  return out;
}

SymVec add(SymVec a, const SymVec& b)
{
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
  return a;
}

SymVec scale(SymVec a, const Rational& s)
{
  for (auto& p : a) p *= s;
  return a;
}

// All compositions of `total` into `parts` positive integers.
void compositions(int total, int parts, std::vector<int>& current, std::vector<std::vector<int>>& out)
{
  if (parts == 0) {
    if (total == 0) out.push_back(current);
    return;
  }
  for (int first = 1; first <= total - (parts - 1); ++first) {
    current.push_back(first);
    compositions(total - first, parts - 1, current, out);
    current.pop_back();
  }
}

}  // namespace

Rational rational_from_double(double v)
{
  if (!std::isfinite(v)) throw std::invalid_argument("non-finite structure constant");
  if (v == 0.0) return Rational(0);
  // Continued-fraction convergents; accept the first one within a few ulps.
  long double x = std::fabs(static_cast<long double>(v));
  long long p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  long double rem = x;
  for (int iter = 0; iter < 40; ++iter) {
    const long double a = std::floor(rem);
    if (a > 1e15L) break;
    const long long ai = static_cast<long long>(a);
    const long long p2 = ai * p1 + p0, q2 = ai * q1 + q0;
    if (q2 > 1000000000000LL || p2 < 0 || q2 <= 0) break;
    p0 = p1;
    q0 = q1;
    p1 = p2;
    q1 = q2;
    const double approx = static_cast<double>(static_cast<long double>(p1) / static_cast<long double>(q1));
    if (std::fabs(approx - std::fabs(v)) <= 4 * std::numeric_limits<double>::epsilon() * std::fabs(v)) {
      Rational r(p1);
      r /= q1;
      return v < 0 ? -r : r;
    }
    const long double frac = rem - a;
    if (frac <= 0) break;
    rem = 1.0L / frac;
  }
  return Rational(v);
}

BchTable BchTable::build(const GradedNilpotentAlgebra& alg)
{
  const int depth = alg.depth();
  if (depth > kMaxBchDepth)
    throw UnsupportedDepthError("BCH table supports depth <= " + std::to_string(kMaxBchDepth) + ", got " + std::to_string(depth));

  BchTable table;
  const int n = alg.dimension();
  table.n_ = n;
  const std::size_t nvars = static_cast<std::size_t>(2 * n);

  std::vector<RationalEntry> entries;
  for (const auto& e : alg.structure_constants()) entries.push_back({e.i, e.j, e.k, rational_from_double(e.c)});

  SymVec x(static_cast<std::size_t>(n)), y(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    x[static_cast<std::size_t>(i)] = SymPoly::variable(nvars, static_cast<std::size_t>(i));
    y[static_cast<std::size_t>(i)] = SymPoly::variable(nvars, static_cast<std::size_t>(n + i));
  }
  const SymVec sum_xy = add(x, y);
  const SymVec diff_xy = add(x, scale(y, Rational(-1)));

  // Recursion for the homogeneous BCH pieces Z_m (m = number of letters):
  // (m+1) Z_{m+1} = 1/2 [X - Y, Z_m] + sum_{p>=1, 2p<=m} B_{2p}/(2p)! sum_{k_1+..+k_2p=m} [Z_k1, [.., [Z_k2p, X + Y]..]]
  const std::array<Rational, 3> bernoulli_over_factorial{Rational(0), Rational(1, 12), Rational(-1, 720)};
  std::vector<SymVec> pieces(static_cast<std::size_t>(depth) + 1);
  pieces[1] = sum_xy;
  for (int m = 1; m < depth; ++m) {
    SymVec next = scale(sym_bracket(diff_xy, pieces[static_cast<std::size_t>(m)], entries, nvars), Rational(1, 2));
    for (int p = 1; 2 * p <= m; ++p) {
      if (p >= static_cast<int>(bernoulli_over_factorial.size())) throw UnsupportedDepthError("BCH coefficient table exhausted");
      std::vector<std::vector<int>> comps;
      std::vector<int> cur;
      compositions(m, 2 * p, cur, comps);
      for (const auto& ks : comps) {
        SymVec nested = sum_xy;
        for (auto it = ks.rbegin(); it != ks.rend(); ++it) nested = sym_bracket(pieces[static_cast<std::size_t>(*it)], nested, entries, nvars);
        next = add(next, scale(nested, bernoulli_over_factorial[static_cast<std::size_t>(p)]));
      }
    }
    pieces[static_cast<std::size_t>(m) + 1] = scale(next, Rational(1, m + 1));
  }

  table.z_.assign(static_cast<std::size_t>(n), SymPoly(nvars));
  for (int m = 1; m <= depth; ++m) table.z_ = add(table.z_, pieces[static_cast<std::size_t>(m)]);

  table.frame_.reserve(static_cast<std::size_t>(n * n));
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      table.frame_.push_back(table.z_[static_cast<std::size_t>(j)].derivative(static_cast<std::size_t>(n + i)).zero_and_drop(static_cast<std::size_t>(n), static_cast<std::size_t>(n)));

  table.z_eval_ = CompiledPolynomials(table.z_);
  table.frame_eval_ = CompiledPolynomials(table.frame_);
  return table;
}

bool BchTable::homogeneous(const GradedNilpotentAlgebra& alg) const
{
  for (int i = 0; i < n_; ++i) {
    for (const auto& [m, c] : z_[static_cast<std::size_t>(i)].terms()) {
      int weight = 0;
      for (int v = 0; v < 2 * n_; ++v) weight += m[static_cast<std::size_t>(v)] * alg.degree(v % n_);
      if (weight != alg.degree(i)) return false;
    }
  }
  return true;
}

void BchTable::product(const double* x, const double* y, double* z) const
{
  double xy[2 * kMaxDim];
  for (int i = 0; i < n_; ++i) {
    xy[i] = x[i];
    xy[n_ + i] = y[i];
  }
  z_eval_.evaluate(xy, z);
}

void BchTable::frame(const double* x, Mat& out) const
{
  double values[kMaxDim * kMaxDim];
  frame_eval_.evaluate(x, values);
  out.resize(n_, n_);
  for (int j = 0; j < n_; ++j)
    for (int i = 0; i < n_; ++i) out(j, i) = values[j * n_ + i];
}

CarnotGroup::CarnotGroup(GradedNilpotentAlgebra alg) : alg_(std::move(alg)), bch_(BchTable::build(alg_)) {}

std::shared_ptr<const CarnotGroup> CarnotGroup::create(GradedNilpotentAlgebra alg)
{
  return std::shared_ptr<const CarnotGroup>(new CarnotGroup(std::move(alg)));
}

Vec CarnotGroup::product(const Vec& x, const Vec& y) const
{
  if (x.size() != dimension() || y.size() != dimension()) throw std::invalid_argument("product: dimension mismatch");
  Vec z(dimension());
  bch_.product(x.data(), y.data(), z.data());
  return z;
}

Vec CarnotGroup::dilation(const Vec& x, double r) const
{
  if (!(r > 0.0)) throw std::invalid_argument("dilation factor must be positive");
  Vec out = x;
  for (int i = 0; i < dimension(); ++i) out(i) *= std::pow(r, alg_.degree(i));
  return out;
}

Mat CarnotGroup::frame(const Vec& x) const
{
  if (x.size() != dimension()) throw std::invalid_argument("frame: dimension mismatch");
  Mat out;
  bch_.frame(x.data(), out);
  return out;
}

GroupPoint::GroupPoint(GroupPtr group, Vec coords) : group_(std::move(group)), coords_(std::move(coords))
{
  if (!group_) throw std::invalid_argument("group point needs a group");
  if (coords_.size() != group_->dimension()) throw std::invalid_argument("group point has wrong number of coordinates");
  if (!coords_.allFinite()) throw std::invalid_argument("group point coordinates must be finite");
}

GroupPoint GroupPoint::identity(GroupPtr group)
{
  const int n = group->dimension();
  return GroupPoint(std::move(group), Vec::Zero(n));
}

void require_same_group(const GroupPoint& a, const GroupPoint& b)
{
  if (a.group() != b.group())
    throw AlgebraMismatchError("points belong to different groups (" + a.group()->algebra().name() + " vs " +
                               b.group()->algebra().name() + ")");
}

GroupPoint product(const GroupPoint& x, const GroupPoint& y)
{
  require_same_group(x, y);
  return GroupPoint(x.group(), x.group()->product(x.coords(), y.coords()));
}

GroupPoint inverse(const GroupPoint& x) { return GroupPoint(x.group(), x.group()->inverse(x.coords())); }

GroupPoint dilation(const GroupPoint& x, double r) { return GroupPoint(x.group(), x.group()->dilation(x.coords(), r)); }

Mat left_invariant_frame(const GroupPoint& x) { return x.group()->frame(x.coords()); }

bool GroupSelfTest::passed() const
{
  return associativity_residual <= 1e-9 && inverse_residual <= 1e-12 && dilation_residual <= 1e-12 &&
         frame_identity_residual == 0.0 && homogeneous && frame_brackets_exact;
}

GroupSelfTest run_group_selftest(const CarnotGroup& group, int samples, std::uint64_t seed)
{
  GroupSelfTest out;
  out.algebra = group.algebra().name();
  out.samples = samples;
  out.seed = seed;
  const int n = group.dimension();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(-2.0, 2.0);
  std::uniform_real_distribution<double> radius(0.1, 2.0);
  auto draw = [&] {
    Vec v(n);
    for (int i = 0; i < n; ++i) v(i) = coord(rng);
    return v;
  };
  for (int s = 0; s < samples; ++s) {
    const Vec x = draw(), y = draw(), z = draw();
    const Vec left = group.product(group.product(x, y), z);
    const Vec right = group.product(x, group.product(y, z));
    out.associativity_residual = std::max(out.associativity_residual, (left - right).norm());
    out.inverse_residual = std::max(out.inverse_residual, group.product(x, group.inverse(x)).norm());
    const double r = radius(rng);
    const Vec a = group.dilation(group.product(x, y), r);
    const Vec b = group.product(group.dilation(x, r), group.dilation(y, r));
    out.dilation_residual = std::max(out.dilation_residual, (a - b).norm() / (1.0 + a.norm()) * 1e-3);
  }
  out.frame_identity_residual = (group.frame(Vec::Zero(n)) - Mat::Identity(n, n)).cwiseAbs().maxCoeff();
  out.homogeneous = group.bch().homogeneous(group.algebra());

  // [X_a, X_b] must equal sum_k c_abk X_k as polynomial vector fields.
  const auto& f = group.bch().frame_polynomials();
  auto field = [&](int j, int i) -> const Polynomial<Rational>& { return f[static_cast<std::size_t>(j * n + i)]; };
  bool exact = true;
  for (int a = 0; a < n && exact; ++a)
    for (int b = a + 1; b < n && exact; ++b)
      for (int j = 0; j < n && exact; ++j) {
        Polynomial<Rational> lhs(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
          lhs += field(i, a) * field(j, b).derivative(static_cast<std::size_t>(i));
          lhs -= field(i, b) * field(j, a).derivative(static_cast<std::size_t>(i));
        }
        Polynomial<Rational> rhs(static_cast<std::size_t>(n));
        for (int k = 0; k < n; ++k) {
          const double c = group.algebra().constant(a, b, k);
          if (c != 0.0) rhs += field(j, k) * rational_from_double(c);
        }
        exact = lhs == rhs;
      }
  out.frame_brackets_exact = exact;
  return out;
}

}  // namespace carnot
