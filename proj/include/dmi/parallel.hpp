#pragma once

#include <cstddef>
#include <functional>

namespace dmi
{

// Worker count from DMI_NUM_THREADS, falling back to hardware concurrency.
std::size_t thread_count();

// Calls fn(i) for i in [0, n). Each index is visited exactly once; callers
// write results into per-index slots so output never depends on scheduling.
// Exceptions thrown by fn are rethrown (the one with the lowest index wins).
// Nested calls from inside a worker run serially.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

// Pairwise summation; result is independent of thread count.
double pairwise_sum(const double* v, std::size_t n);

} // namespace dmi
