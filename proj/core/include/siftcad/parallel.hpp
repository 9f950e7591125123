#pragma once

#include <cstddef>
#include <functional>

namespace siftcad {

/// Process-wide cap on worker threads (1 = run inline). Defaults to 1.
void set_thread_count(std::size_t n);
std::size_t thread_count();

/// Calls body(i) for i in [0, n). Iterations must be independent; each
/// writes only its own output so results do not depend on the schedule.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace siftcad
