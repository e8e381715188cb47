#pragma once

#include <cstddef>
#include <functional>

namespace mzlab {

/// Worker count from MZLAB_THREADS; unset or 0 means hardware concurrency.
int thread_count();

/// Calls body(i) for i in [0, n).  Each index is visited exactly once; the
/// caller must make iterations write disjoint outputs.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace mzlab
