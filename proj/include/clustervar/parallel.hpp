#ifndef CLUSTERVAR_PARALLEL_HPP
#define CLUSTERVAR_PARALLEL_HPP

#include <omp.h>

#include <cstddef>
#include <exception>
#include <span>
#include <vector>

namespace clustervar {

/// Worker count for the data-parallel kernels. workers == 1 is the serial
/// reference path; workers <= 0 means "whatever OpenMP would use".
///
/// Kernels compute independent per-item terms into a vector and then reduce
/// them with pairwise_sum in index order, so the result is bit-identical for
/// every worker count.
struct Exec {
  int workers = 0;

  static Exec serial() { return Exec{1}; }
  int resolved() const { return workers > 0 ? workers : omp_get_max_threads(); }
};

/// Reads CLUSTERVAR_THREADS; returns 0 when unset or malformed.
int workers_from_env();

/// out[i] = fn(i) for i in [0, count). The first exception thrown by any
/// item (lowest index) is rethrown after the loop.
template <typename T, typename Fn>
std::vector<T> parallel_map(std::size_t count, Exec exec, Fn&& fn) {
  std::vector<T> out(count);
  std::vector<std::exception_ptr> errors(count);
  const auto n = static_cast<long>(count);
  const int workers = exec.resolved();
#pragma omp parallel for schedule(dynamic) num_threads(workers) if (workers > 1)
  for (long i = 0; i < n; ++i) {
    try {
      out[static_cast<std::size_t>(i)] = fn(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

/// Pairwise (tree) summation in index order. T needs operator+ and a copy
/// constructor; items must be non-empty.
template <typename T>
T pairwise_sum(std::span<const T> items) {
  if (items.size() == 1) return items[0];
  const std::size_t half = items.size() / 2;
  T left = pairwise_sum(items.first(half));
  left += pairwise_sum(items.subspan(half));
  return left;
}

template <typename T>
T pairwise_sum(const std::vector<T>& items) {
  return pairwise_sum(std::span<const T>(items));
}

}  // namespace clustervar

#endif  // CLUSTERVAR_PARALLEL_HPP
