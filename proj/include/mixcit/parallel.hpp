#pragma once

#include <cstddef>
#include <functional>

namespace mixcit {

// Worker cap: MIXCIT_THREADS when set, otherwise all hardware threads.
std::size_t thread_budget();

// Runs fn(0), ..., fn(count-1) across up to `threads` workers. Callers must
// write results to disjoint, pre-sized slots so the schedule cannot affect
// the output. The first exception thrown by any fn is rethrown after join.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn,
                  std::size_t threads = 0);

}  // namespace mixcit
