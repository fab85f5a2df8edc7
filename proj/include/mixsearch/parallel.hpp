#pragma once

#include <cstddef>
#include <functional>

namespace mixsearch {

// 0 means: MIXSEARCH_THREADS if set, else hardware concurrency.
unsigned resolve_threads(unsigned requested);

// Calls fn(i) for i in [0, n) over contiguous static chunks. Exceptions from
// workers are rethrown on the calling thread (first one wins).
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

}  // namespace mixsearch
