#pragma once

#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <utility>
#include <vector>

namespace covdist::internal {

// Pairwise (cascade) summation of f(i) over i in [0, n).  Used everywhere a
// result must be independent of chunking/thread count and accumulate with
// O(log n) rounding growth: Monte Carlo reductions, contour sums, the
// bilinear overlap form.
template <typename T, typename F>
T pairwise_sum(std::size_t begin, std::size_t end, F&& f) {
  const std::size_t n = end - begin;
  if (n == 0) return T{};
  if (n <= 16) {
    T acc = f(begin);
    for (std::size_t i = begin + 1; i < end; ++i) acc += f(i);
    return acc;
  }
  const std::size_t mid = begin + n / 2;
  T left = pairwise_sum<T>(begin, mid, f);
  T right = pairwise_sum<T>(mid, end, std::forward<F>(f));
  return left + right;
}

template <typename T, typename F>
T pairwise_sum(std::size_t n, F&& f) {
  return pairwise_sum<T>(0, n, std::forward<F>(f));
}

// Worker-count budget: hardware concurrency, clamped by the COVDIST_THREADS
// environment variable (values < 1 mean serial) and by the amount of work.
inline int thread_budget(std::size_t work) {
  int budget = static_cast<int>(std::thread::hardware_concurrency());
  if (budget < 1) budget = 1;
  if (const char* env = std::getenv("COVDIST_THREADS")) {
    const int cap = std::atoi(env);
    budget = (cap < 1) ? 1 : cap;
  }
  if (static_cast<std::size_t>(budget) > work) budget = static_cast<int>(work);
  return budget < 1 ? 1 : budget;
}

// Run body(i) for i in [0, n) on the budgeted worker pool.  Scheduling is a
// shared atomic counter; the body must write only to per-index slots so the
// result is identical for any worker count.
template <typename F>
void parallel_for(std::size_t n, F&& body) {
  const int workers = thread_budget(n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex err_mutex;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n || failed.load()) return;
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mutex);
          if (!first_error) first_error = std::current_exception();
          failed.store(true);
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace covdist::internal
