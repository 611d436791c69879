#ifndef SLICEFIND_PARALLEL_HPP
#define SLICEFIND_PARALLEL_HPP

#include <cstddef>
#include <functional>

namespace slicefind {

/// Worker cap: SLICEFIND_THREADS when set (clamped to >= 1), hardware
/// concurrency otherwise.
int thread_cap();

/// Run fn(i) for i in [0, n). Work is split into contiguous chunks across
/// at most thread_cap() threads; results must be written into per-index
/// slots so the outcome is independent of scheduling. Exceptions from
/// workers are rethrown on the calling thread (first one wins).
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

} // namespace slicefind

#endif
