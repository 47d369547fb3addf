#pragma once

#include <cstddef>
#include <functional>

namespace mwlab {

// Worker count used by sweeps; 0 or 1 runs inline.
void set_default_jobs(int jobs);
int default_jobs();

// Runs body(i) for i in [0, count). Exceptions are rethrown on the caller (first one wins).
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body, int jobs = -1);

}  // namespace mwlab
