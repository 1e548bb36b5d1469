#pragma once

#include <cstddef>
#include <functional>

namespace qpqc {

/// Worker count from QPQC_WORKERS, falling back to hardware concurrency.
int default_workers();

/// Runs fn(i) for i in [0, n) on up to `workers` threads, default_workers()
/// when workers <= 0. Each index is executed exactly once; callers write
/// results into per-index slots and reduce afterwards in index order, so
/// results never depend on scheduling.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

}  // namespace qpqc
