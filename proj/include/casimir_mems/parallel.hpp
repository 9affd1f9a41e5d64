#pragma once

#include <cstddef>
#include <functional>

namespace casimir_mems {

/// Worker cap: CASIMIR_MEMS_THREADS when set to a positive integer, else the
/// hardware concurrency (at least 1).
std::size_t max_threads() noexcept;

/// Runs body(i) for i in [0, n) on up to max_threads() threads. Each index
/// runs exactly once; the first exception thrown is rethrown after all
/// workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace casimir_mems
