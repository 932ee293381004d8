#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace q1d {

/// 0 means hardware concurrency.
unsigned resolve_threads(unsigned requested);

/// Runs fn(i) for i in [0, n) on up to `threads` workers; rethrows the
/// first exception (lowest index) after all workers join.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

/// Pairwise sum in index order, independent of thread count.
double pairwise_sum(const std::vector<double>& v);

}  // namespace q1d
