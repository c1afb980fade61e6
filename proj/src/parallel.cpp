#include "carnot/parallel.hpp"

#include <atomic>
#include <cmath>
#include <thread>
#include <vector>

namespace carnot {

namespace {
std::atomic<int> g_threads{0};
thread_local bool t_in_worker = false;
}

void set_thread_count(int n) { g_threads = n < 0 ? 0 : n; }

int thread_count()
{
  const int n = g_threads.load();
  if (n > 0) return n;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn)
{
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(thread_count()), count);
  if (workers <= 1 || t_in_worker) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::vector<std::exception_ptr> errors(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = count * w / workers, hi = count * (w + 1) / workers;
    pool.emplace_back([&, w, lo, hi] {
      t_in_worker = true;
      try {
        for (std::size_t i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

void KahanSum::add(double v)
{
  const double t = sum_ + v;
  if (std::abs(sum_) >= std::abs(v))
    comp_ += (sum_ - t) + v;
  else
    comp_ += (v - t) + sum_;
  sum_ = t;
}

double compensated_sum(std::span<const double> values)
{
  KahanSum s;
  for (double v : values) s.add(v);
  return s.value();
}

}  // namespace carnot
