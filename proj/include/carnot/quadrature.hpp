#pragma once

#include "carnot/algebra.hpp"
#include "carnot/parallel.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace carnot {

struct QuadratureOptions
{
  int initial_nodes = 16;          ///< per axis, first grid
  double rel_tol = 5e-3;           ///< stop when successive grids differ by less than this
  std::size_t max_nodes = 1u << 24;
  int inner_bisections = 12;       ///< support-boundary bisection steps on the innermost axis
  int outer_bisections = 6;        ///< same on outer axes, where each probe is a full inner integral
};

template <std::size_t K>
struct QuadratureResult
{
  std::array<double, K> value{};
  std::array<double, K> error{};  ///< difference to the previous grid
  std::size_t nodes = 0;           ///< integrand evaluations on the final grid
  int per_axis = 0;
  bool converged = false;
  bool empty = true;               ///< no node of the final grid was in the support
  std::vector<bool> touched;       ///< per axis: the support extends to the box edge
};

template <std::size_t K>
using Integrand = std::function<std::optional<std::array<double, K>>(const double* s)>;

/// Optional cheap support test for the innermost axis; defaults to evaluating the integrand.
using Support = std::function<bool(const double* s)>;

/// Gauss-Legendre nodes and weights on [-1, 1].
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n)
{
  std::vector<double> x(static_cast<std::size_t>(n)), w(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      const double p = std::legendre(n, z), pm = std::legendre(n - 1, z);
      dp = n * (z * p - pm) / (z * z - 1.0);
      const double dz = p / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    const double p = std::legendre(n, z), pm = std::legendre(n - 1, z);
    dp = n * (z * p - pm) / (z * z - 1.0);
    x[static_cast<std::size_t>(i)] = z;
    w[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  return {x, w};
}

namespace detail {

template <std::size_t K>
bool converged_pair(const std::array<double, K>& a, const std::array<double, K>& b, double tol,
                    std::array<double, K>& err)
{
  bool ok = true;
  for (std::size_t k = 0; k < K; ++k) {
    err[k] = std::abs(a[k] - b[k]);
    const double scale = std::max(std::abs(a[k]), std::abs(b[k]));
    if (scale == 0.0) continue;
    ok &= err[k] <= tol * scale;
  }
  return ok;
}

template <std::size_t K>
class NestedMidpoint
{
 public:
  using Val = std::array<double, K>;

  NestedMidpoint(const Integrand<K>& f, std::span<const double> lo, std::span<const double> hi, int n,
                 const QuadratureOptions& opt, const Support* support)
      : f_(f), lo_(lo.begin(), lo.end()), hi_(hi.begin(), hi.end()), n_(n), opt_(opt), support_(support),
        touched_(lo.size())
  {
    for (auto& t : touched_) t = false;
  }

  std::optional<Val> run()
  {
    std::vector<double> s(lo_.size());
    return integrate(0, s.data());
  }

  std::size_t evaluations() const { return evals_.load(); }
  std::vector<bool> touched() const
  {
    std::vector<bool> out;
    for (const auto& t : touched_) out.push_back(t.load());
    return out;
  }

 private:
  int dims() const { return static_cast<int>(lo_.size()); }
  double node(int axis, int i) const
  {
    const auto a = static_cast<std::size_t>(axis);
    return lo_[a] + (i + 0.5) * (hi_[a] - lo_[a]) / n_;
  }

  std::optional<Val> eval(int axis, double* s) const
  {
    if (axis + 1 == dims()) {
      ++evals_;
      return f_(s);
    }
    return integrate(axis + 1, s);
  }

  /// Whether the sub-integral over the axes after `axis` has support: a short-circuit grid scan.
  bool supported(int axis, double* s) const
  {
    if (axis + 1 == dims()) {
      ++evals_;
      return support_ ? (*support_)(s) : f_(s).has_value();
    }
    std::vector<double> local(s, s + dims());
    for (int i = 0; i < n_; ++i) {
      local[static_cast<std::size_t>(axis) + 1] = node(axis + 1, i);
      if (supported(axis + 1, local.data())) return true;
    }
    return false;
  }

  std::optional<Val> integrate(int axis, double* s) const
  {
    const int d = dims();
    const auto ax = static_cast<std::size_t>(axis);
    const double lo = lo_[ax], hi = hi_[ax];
    const double h = (hi - lo) / n_;
    std::vector<std::optional<Val>> g(static_cast<std::size_t>(n_));
    if (axis == 0 && d > 1) {
      parallel_for(static_cast<std::size_t>(n_), [&](std::size_t i) {
        std::vector<double> local(s, s + d);
        local[0] = node(0, static_cast<int>(i));
        g[i] = eval(0, local.data());
      });
    } else {
      for (int i = 0; i < n_; ++i) {
        s[axis] = node(axis, i);
        g[static_cast<std::size_t>(i)] = eval(axis, s);
      }
    }

    const int steps = axis + 1 == d ? opt_.inner_bisections : opt_.outer_bisections;
    auto inside = [&](double at) {
      std::vector<double> local(s, s + d);
      local[ax] = at;
      return supported(axis, local.data());
    };
    auto sample = [&](double at) {
      std::vector<double> local(s, s + d);
      local[ax] = at;
      return eval(axis, local.data());
    };
    auto boundary = [&](double out_t, double in_t) {
      for (int b = 0; b < steps; ++b) {
        const double mid = 0.5 * (out_t + in_t);
        (inside(mid) ? in_t : out_t) = mid;
      }
      return 0.5 * (out_t + in_t);
    };
    // Clipped cell [b, far] with the boundary at b: samples at a/2 and a/4 from b fix a local
    // power law f ~ c * dist^p, integrated exactly over the cell.
    auto end_cell = [&](double b, double far, const Val& fallback) {
      const double a = std::abs(far - b), dir = far > b ? 1.0 : -1.0;
      const auto half = sample(b + dir * 0.5 * a);
      const auto quarter = sample(b + dir * 0.25 * a);
      Val out{};
      for (std::size_t k = 0; k < K; ++k) {
        if (!half) {
          out[k] = 0.5 * a * fallback[k];
          continue;
        }
        const double fh = (*half)[k];
        double p = 0.0;
        if (fh != 0.0) {
          const double fq = quarter ? (*quarter)[k] : 0.0;
          p = fq / fh > 0.0 ? std::clamp(std::log(fh / fq) / std::log(2.0), 0.0, 3.0) : 3.0;
        }
        out[k] = fh * a * std::pow(2.0, p) / (p + 1.0);
      }
      return out;
    };

    Val sum{};
    bool any = false;
    int i = 0;
    while (i < n_) {
      if (!g[static_cast<std::size_t>(i)]) {
        ++i;
        continue;
      }
      int j = i;
      while (j + 1 < n_ && g[static_cast<std::size_t>(j) + 1]) ++j;
      const double ti = node(axis, i), tj = node(axis, j);
      // Runs reaching the first or last cell are clipped unless the support extends to the box edge.
      const bool open_left = i == 0 && inside(lo), open_right = j == n_ - 1 && inside(hi);
      if (open_left || open_right) touched_[ax] = true;
      const double left = open_left ? lo : boundary(i == 0 ? lo : ti - h, ti);
      const double right = open_right ? hi : boundary(j == n_ - 1 ? hi : tj + h, tj);
      if (i == j) {
        if (open_left && open_right) {
          for (std::size_t k = 0; k < K; ++k) sum[k] += (right - left) * (*g[static_cast<std::size_t>(i)])[k];
        } else if (open_left || open_right) {
          const Val v = end_cell(open_left ? right : left, open_left ? lo : hi, *g[static_cast<std::size_t>(i)]);
          for (std::size_t k = 0; k < K; ++k) sum[k] += v[k];
        } else {
          // Both ends clipped inside one cell: midpoint of the clipped interval.
          const auto v = sample(0.5 * (left + right));
          const Val& f = v ? *v : *g[static_cast<std::size_t>(i)];
          for (std::size_t k = 0; k < K; ++k) sum[k] += (right - left) * f[k];
        }
      } else {
        for (int q = i; q <= j; ++q) {
          const Val& f = *g[static_cast<std::size_t>(q)];
          const double tq = node(axis, q);
          Val v;
          if (q == i && !open_left)
            v = end_cell(left, tq + 0.5 * h, f);
          else if (q == j && !open_right)
            v = end_cell(right, tq - 0.5 * h, f);
          else
            for (std::size_t k = 0; k < K; ++k) v[k] = h * f[k];
          for (std::size_t k = 0; k < K; ++k) sum[k] += v[k];
        }
      }
      any = true;
      i = j + 1;
    }
    if (!any) return std::nullopt;
    return sum;
  }

  const Integrand<K>& f_;
  std::vector<double> lo_, hi_;
  int n_;
  QuadratureOptions opt_;
  const Support* support_;
  mutable std::vector<std::atomic<bool>> touched_;
  mutable std::atomic<std::size_t> evals_{0};
};

}  // namespace detail

/**
 * @brief Midpoint rule on nested axes with support-boundary clipping.
 *
 * Where the integrand returns nullopt the point is outside the support. Along every axis the
 * first and last cell of each supported run are clipped at the boundary located by bisection,
 * so indicator-type integrands converge at second order.
 */
template <std::size_t K>
QuadratureResult<K> nested_midpoint(const Integrand<K>& f, std::span<const double> lo, std::span<const double> hi, int n,
                                    const QuadratureOptions& opt = {}, const Support* support = nullptr)
{
  if (lo.size() != hi.size() || lo.empty()) throw std::invalid_argument("quadrature box has no axes");
  detail::NestedMidpoint<K> q(f, lo, hi, n, opt, support);
  QuadratureResult<K> out;
  const auto v = q.run();
  out.value = v.value_or(std::array<double, K>{});
  out.empty = !v;
  out.nodes = q.evaluations();
  out.per_axis = n;
  out.touched = q.touched();
  return out;
}

/// Grid doubling of nested_midpoint until the relative change drops below opt.rel_tol.
template <std::size_t K>
QuadratureResult<K> refine_nested(const Integrand<K>& f, std::span<const double> lo, std::span<const double> hi,
                                  const QuadratureOptions& opt = {}, const Support* support = nullptr)
{
  const double dims = static_cast<double>(lo.size());
  int n = std::max(2, opt.initial_nodes);
  QuadratureResult<K> prev = nested_midpoint<K>(f, lo, hi, n, opt, support);
  for (;;) {
    if (std::pow(2.0 * n, dims) > static_cast<double>(opt.max_nodes)) {
      prev.converged = false;
      return prev;
    }
    n *= 2;
    QuadratureResult<K> cur = nested_midpoint<K>(f, lo, hi, n, opt, support);
    cur.converged = detail::converged_pair(cur.value, prev.value, opt.rel_tol, cur.error);
    if (cur.converged) return cur;
    prev = cur;
  }
}

/**
 * @brief Integral over Box2(0, r) in relative coordinates via nested sine substitution per layer.
 *
 * Gauss-Legendre nodes in every angle. Each layer ball of radius r^k is parametrized by x_j = b_j sin(theta_j) with
 * b_j = sqrt(R^2 - sum_{i<j} x_i^2); the integrand sees relative coordinates w. nullopt counts as 0.
 */
template <std::size_t K>
QuadratureResult<K> box2_ball_integral(const GradedNilpotentAlgebra& alg, double r, const Integrand<K>& f, int n)
{
  const int dim = alg.dimension();
  std::vector<double> radius(static_cast<std::size_t>(dim));
  std::vector<bool> first(static_cast<std::size_t>(dim));
  for (int k = 1; k <= alg.depth(); ++k)
    for (int i = 0; i < alg.layer_dim(k); ++i) {
      radius[static_cast<std::size_t>(alg.layer_offset(k) + i)] = std::pow(r, k);
      first[static_cast<std::size_t>(alg.layer_offset(k) + i)] = i == 0;
    }
  const auto [nodes, weights] = gauss_legendre(n);
  std::vector<double> sin_t(static_cast<std::size_t>(n)), cos_t(static_cast<std::size_t>(n)), wt(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i) {
    const double th = 0.5 * M_PI * nodes[i];
    sin_t[i] = std::sin(th);
    cos_t[i] = std::cos(th);
    wt[i] = 0.5 * M_PI * weights[i];
  }
  std::vector<std::array<double, K>> partial(static_cast<std::size_t>(n));
  std::atomic<bool> any_support{false};
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t outer) {
    std::vector<int> idx(static_cast<std::size_t>(dim), 0);
    idx[0] = static_cast<int>(outer);
    std::array<double, K> acc{};
    std::array<KahanSum, K> kahan;
    bool any = false;
    double w[64];
    for (;;) {
      double jac = 1.0, rem2 = 0.0;
      for (int a = 0; a < dim; ++a) {
        if (first[static_cast<std::size_t>(a)]) rem2 = radius[static_cast<std::size_t>(a)] * radius[static_cast<std::size_t>(a)];
        const double b = std::sqrt(std::max(0.0, rem2));
        w[a] = b * sin_t[static_cast<std::size_t>(idx[static_cast<std::size_t>(a)])];
        jac *= b * cos_t[static_cast<std::size_t>(idx[static_cast<std::size_t>(a)])] * wt[static_cast<std::size_t>(idx[static_cast<std::size_t>(a)])];
        rem2 -= w[a] * w[a];
      }
      if (auto v = f(w)) {
        for (std::size_t k = 0; k < K; ++k) kahan[k].add(jac * (*v)[k]);
        any = true;
      }
      int a = dim - 1;
      while (a >= 1 && ++idx[static_cast<std::size_t>(a)] == n) idx[static_cast<std::size_t>(a--)] = 0;
      if (a < 1) break;
    }
    for (std::size_t k = 0; k < K; ++k) acc[k] = kahan[k].value();
    partial[outer] = acc;
    if (any) any_support = true;
  });
  QuadratureResult<K> out;
  for (std::size_t k = 0; k < K; ++k) {
    KahanSum s;
    for (const auto& p : partial) s.add(p[k]);
    out.value[k] = s.value();
  }
  out.nodes = static_cast<std::size_t>(std::pow(double(n), dim));
  out.empty = !any_support;
  out.per_axis = n;
  return out;
}

template <std::size_t K>
QuadratureResult<K> refine_box2_ball(const GradedNilpotentAlgebra& alg, double r, const Integrand<K>& f,
                                     const QuadratureOptions& opt = {})
{
  const double dims = alg.dimension();
  int n = std::max(2, opt.initial_nodes);
  QuadratureResult<K> prev = box2_ball_integral<K>(alg, r, f, n);
  for (;;) {
    if (std::pow(2.0 * n, dims) > static_cast<double>(opt.max_nodes)) return prev;
    n *= 2;
    QuadratureResult<K> cur = box2_ball_integral<K>(alg, r, f, n);
    cur.converged = detail::converged_pair(cur.value, prev.value, opt.rel_tol, cur.error);
    if (cur.converged) return cur;
    prev = cur;
  }
}

}  // namespace carnot
