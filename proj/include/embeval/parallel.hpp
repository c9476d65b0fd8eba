#pragma once

#include <cstddef>
#include <functional>

namespace embeval {

// Runs fn(0) .. fn(count-1) on up to `workers` threads. Work items must be
// independent; the first exception thrown by any item is rethrown on the
// calling thread after all workers have joined.
void parallel_for(std::size_t count, int workers,
                  const std::function<void(std::size_t)>& fn);

}  // namespace embeval
