#pragma once

#include "carnot/group.hpp"
#include "carnot/omega.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace carnot {

/// max_k |w_k|^{1/k} for relative coordinates w.
double d2_norm(const GradedNilpotentAlgebra& alg, const Vec& w);

/// d2(x, g) computed from w = g^{-1} x.
double d2(const GroupPoint& x, const GroupPoint& g);

/// max_i |w_i| for w = g^{-1} x.
double rho(const GroupPoint& x, const GroupPoint& g);

/// Open d2 ball; in relative coordinates the product of Euclidean balls B^{n_k}(r^k).
class Box2Ball
{
 public:
  Box2Ball(GroupPoint center, double radius);

  const GroupPoint& center() const { return center_; }
  double radius() const { return radius_; }
  const GroupPtr& group() const { return center_.group(); }

 private:
  GroupPoint center_;
  double radius_;
};

bool box2_contains(const Box2Ball& ball, const GroupPoint& p);

/// Relative coordinates of a uniform point of Box2(0, r).
Vec box2_sample_relative(const GradedNilpotentAlgebra& alg, double r, std::mt19937_64& rng);

/// One uniform sample, deterministic in the seed.
GroupPoint box2_sample(const Box2Ball& ball, std::uint64_t seed);

/// `count` uniform samples from one seeded stream.
std::vector<GroupPoint> box2_samples(const Box2Ball& ball, std::size_t count, std::uint64_t seed);

/// prod_k omega_{n_k} (exact); Lebesgue volume of Box2(x, 1).
PiRational box2_unit_volume(const GradedNilpotentAlgebra& alg, OmegaNormalization norm = OmegaNormalization::UnitBall);

double box2_lebesgue_volume(const GradedNilpotentAlgebra& alg, double r);

struct TriangleProbe
{
  double c_estimate = 1.0;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  double r0 = 0.0;
};

/**
 * @brief Lower bound for the constant C in d2(v, z) <= r + C xi.
 *
 * Sample s draws r, xi ~ U(0, r0], v ~ Box2(0, 1), x ~ Box2(v, r), z ~ Box2(x, xi) from a
 * stream keyed by (seed, s), so any prefix of the sample sequence is reproducible and the
 * running maximum is nondecreasing in sample_count.
 */
TriangleProbe quasi_triangle_probe(const GroupPtr& group, double r0, std::size_t sample_count, std::uint64_t seed);

/// Per-sample stream key; splitmix64 of seed and index.
std::uint64_t stream_key(std::uint64_t seed, std::uint64_t index);

}  // namespace carnot
