#pragma once

#include <cstddef>
#include <functional>

namespace shapefilt {

/// Worker count used by parallel_for; 1 runs everything on the caller.
void set_thread_count(unsigned n);
unsigned thread_count();

/// Splits [begin, end) into contiguous static chunks, one per worker. Each
/// chunk must write only to locations owned by its indices, which keeps the
/// result independent of the worker count.
void parallel_for(std::size_t begin, std::size_t end,
                  const std::function<void(std::size_t, std::size_t)>& body);

} // namespace shapefilt
