#pragma once

#include <cstddef>
#include <functional>

namespace mgeom {

/// Worker count: MANIFOLD_GEOM_THREADS when set and positive, otherwise the
/// hardware concurrency (0 means auto).
std::size_t worker_count();

/// Runs body(i) for i in [0, n). Each index is visited exactly once; callers
/// write results into per-index slots, so the output does not depend on
/// scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace mgeom
