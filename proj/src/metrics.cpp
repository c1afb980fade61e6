#include "carnot/metrics.hpp"

#include "carnot/parallel.hpp"

#include <cmath>
#include <stdexcept>

namespace carnot {

double d2_norm(const GradedNilpotentAlgebra& alg, const Vec& w)
{
  double best = 0.0;
  for (int k = 1; k <= alg.depth(); ++k) {
    const double norm = w.segment(alg.layer_offset(k), alg.layer_dim(k)).norm();
    best = std::max(best, k == 1 ? norm : std::pow(norm, 1.0 / k));
  }
  return best;
}

double d2(const GroupPoint& x, const GroupPoint& g)
{
  require_same_group(x, g);
  const auto& grp = *x.group();
  return d2_norm(grp.algebra(), grp.product(grp.inverse(g.coords()), x.coords()));
}

double rho(const GroupPoint& x, const GroupPoint& g)
{
  require_same_group(x, g);
  const auto& grp = *x.group();
  return grp.product(grp.inverse(g.coords()), x.coords()).cwiseAbs().maxCoeff();
}

Box2Ball::Box2Ball(GroupPoint center, double radius) : center_(std::move(center)), radius_(radius)
{
  if (!(radius > 0.0) || !std::isfinite(radius)) throw std::invalid_argument("Box2 radius must be positive and finite");
}

bool box2_contains(const Box2Ball& ball, const GroupPoint& p) { return d2(p, ball.center()) < ball.radius(); }

Vec box2_sample_relative(const GradedNilpotentAlgebra& alg, double r, std::mt19937_64& rng)
{
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Vec w(alg.dimension());
  for (int k = 1; k <= alg.depth(); ++k) {
    const int nk = alg.layer_dim(k), off = alg.layer_offset(k);
    double norm = 0.0;
    do {
      for (int i = 0; i < nk; ++i) w(off + i) = gauss(rng);
      norm = w.segment(off, nk).norm();
    } while (norm == 0.0);
    const double radius = std::pow(r, k) * std::pow(unif(rng), 1.0 / nk);
    w.segment(off, nk) *= radius / norm;
  }
  return w;
}

GroupPoint box2_sample(const Box2Ball& ball, std::uint64_t seed)
{
  return box2_samples(ball, 1, seed).front();
}

std::vector<GroupPoint> box2_samples(const Box2Ball& ball, std::size_t count, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  const auto& grp = *ball.group();
  std::vector<GroupPoint> out;
  out.reserve(count);
  while (out.size() < count) {
    const Vec w = box2_sample_relative(grp.algebra(), ball.radius(), rng);
    // Boundary draws have probability zero but are rejected to keep the ball open.
    if (d2_norm(grp.algebra(), w) >= ball.radius()) continue;
    out.emplace_back(ball.group(), grp.product(ball.center().coords(), w));
  }
  return out;
}

PiRational box2_unit_volume(const GradedNilpotentAlgebra& alg, OmegaNormalization norm)
{
  PiRational v;
  for (int k = 1; k <= alg.depth(); ++k) v = v * omega(alg.layer_dim(k), norm);
  return v;
}

double box2_lebesgue_volume(const GradedNilpotentAlgebra& alg, double r)
{
  if (!(r > 0.0)) throw std::invalid_argument("radius must be positive");
  return box2_unit_volume(alg).value() * std::pow(r, alg.hausdorff_dimension());
}

std::uint64_t stream_key(std::uint64_t seed, std::uint64_t index)
{
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

TriangleProbe quasi_triangle_probe(const GroupPtr& group, double r0, std::size_t sample_count, std::uint64_t seed)
{
  if (!(r0 > 0.0)) throw std::invalid_argument("r0 must be positive");
  const auto& grp = *group;
  const auto& alg = grp.algebra();
  std::vector<double> ratio(sample_count, 1.0);
  parallel_for(sample_count, [&](std::size_t s) {
    std::mt19937_64 rng(stream_key(seed, s));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double r = r0 * (1.0 - unif(rng));
    const double xi = r0 * (1.0 - unif(rng));
    const Vec v = box2_sample_relative(alg, 1.0, rng);
    const Vec x = grp.product(v, box2_sample_relative(alg, r, rng));
    const Vec z = grp.product(x, box2_sample_relative(alg, xi, rng));
    const double dist = d2_norm(alg, grp.product(grp.inverse(v), z));
    ratio[s] = std::max(1.0, (dist - r) / xi);
  });
  TriangleProbe out;
  out.samples = sample_count;
  out.seed = seed;
  out.r0 = r0;
  for (double q : ratio) out.c_estimate = std::max(out.c_estimate, q);
  return out;
}

}  // namespace carnot
