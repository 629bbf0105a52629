#pragma once

#include <cstddef>
#include <functional>

namespace constyle {

// Runs fn(0..n-1) on up to `threads` workers. Items must be independent;
// any exception is rethrown on the calling thread after the pool drains.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

// --threads default: CONSTYLE_FORGE_THREADS env var, else hardware concurrency.
int default_thread_count();

}  // namespace constyle
