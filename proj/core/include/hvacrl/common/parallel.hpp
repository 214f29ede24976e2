#pragma once

#include <functional>

namespace hvacrl {

// Runs fn(i) for i in [0, count) on up to `workers` threads. Any exception is
// rethrown on the calling thread after all workers join; the index of the
// first failing task (lowest i) wins. workers <= 1 runs inline.
void parallel_for(int count, int workers, const std::function<void(int)>& fn);

}  // namespace hvacrl
