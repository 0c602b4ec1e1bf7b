#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace dropshape {

/// Caps the number of worker threads used by the evaluators (0 = hardware concurrency).
void set_thread_count(int n);
int thread_count();

/// Runs body(i) for i in [0, n). Each index is processed exactly once; the order in which
/// indices run is unspecified, so body must only write to per-index storage.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

/// Evaluates f(i) for all i and returns the values; sums over the result in index order
/// are independent of the thread count.
std::vector<double> parallel_map(std::size_t n, const std::function<double(std::size_t)>& f);

/// Neumaier-compensated sum in index order.
double ordered_sum(const std::vector<double>& v);

}  // namespace dropshape
