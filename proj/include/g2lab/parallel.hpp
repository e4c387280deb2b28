#pragma once
// Static-partition parallel loop. The worker count comes from G2LAB_THREADS
// (default: hardware concurrency). Callers write into per-index slots and
// reduce afterwards in index order, so results never depend on scheduling.
#include <cstddef>
#include <functional>

namespace g2lab {

int thread_count();
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace g2lab
