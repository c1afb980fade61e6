#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace carnot {

/// Worker count used by parallel loops; 0 restores hardware concurrency.
void set_thread_count(int n);
int thread_count();

/// Runs fn(i) for i in [0, count) on contiguous index chunks. Results must be stored per index.
/// Calls made from inside a worker run serially.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

/// Neumaier-compensated sum in index order.
double compensated_sum(std::span<const double> values);

/// Streaming compensated accumulator.
class KahanSum
{
 public:
  void add(double v);
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace carnot
