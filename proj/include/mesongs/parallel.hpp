#pragma once

#include <cstddef>
#include <functional>

namespace mesongs {

// Upper bound on worker threads used by the codec (1 = run inline). Defaults
// to the hardware concurrency.
void set_thread_count(unsigned threads);
unsigned thread_count();

// Runs fn(i) for i in [0, count). Each index must write only its own output
// slot; callers reduce afterwards in index order.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace mesongs
