#pragma once

#include <cstddef>
#include <functional>

namespace percept {

// Runs fn(i) for i in [0, count) on up to `workers` threads. Exceptions are
// captured and the first one rethrown after all threads join. With
// workers <= 1 the loop runs inline.
void parallel_for(std::size_t count, int workers,
                  const std::function<void(std::size_t)>& fn);

}  // namespace percept
