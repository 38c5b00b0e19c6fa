#pragma once

#include <cstddef>
#include <functional>

namespace admitml {

// Runs f(i) for i in [0, n). May use multiple threads; results must be written
// to pre-assigned slots so the outcome is independent of scheduling. Nested
// calls run serially to avoid oversubscription.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& f);

// Caps worker threads (0 restores the hardware default). Intended for tests
// and benchmarking; determinism never depends on this value.
void set_max_threads(unsigned n);
unsigned max_threads();

}  // namespace admitml
