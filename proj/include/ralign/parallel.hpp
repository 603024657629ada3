#pragma once

#include <cstddef>
#include <functional>

namespace ralign::parallel {

/// Number of worker threads used by the kernels. 0 selects hardware concurrency.
void set_thread_count(std::size_t threads);
std::size_t thread_count();

/// Calls body(i) for every i in [0, count). Iterations are split into contiguous
/// blocks, one per worker. Callers must make body(i) depend only on i so the
/// result does not depend on the number of workers.
void for_each_index(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace ralign::parallel
