#pragma once

#include <cstddef>
#include <functional>

namespace locmix {

/// Caps the worker count used by parallel_for (0 = hardware concurrency).
void set_thread_limit(std::size_t threads);
std::size_t thread_limit();

/// Runs task(i) for i in [0, count). Tasks must write only to their own
/// output slot; callers reduce in index order so results do not depend on
/// scheduling. The first exception thrown by any task is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& task);

}  // namespace locmix
