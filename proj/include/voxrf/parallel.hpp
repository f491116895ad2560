#pragma once

#include <condition_variable>
#include <cstdlib>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace voxrf {

// Number of worker threads. Reads VOXRF_THREADS once; falls back to the
// hardware count. Results never depend on this value, only wall time does:
// all parallel work is merged in a fixed order afterwards.
int thread_count();

// Runs fn(begin, end) over disjoint index ranges covering [0, n). With one
// thread the call runs inline on the caller.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace voxrf
