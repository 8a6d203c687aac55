#pragma once

#include <cstddef>
#include <functional>

namespace folia {

/// Worker count: FOLIA_THREADS if set and positive, else the hardware
/// concurrency (at least 1).
std::size_t thread_budget();

/// Runs body(i) for i in [0, count) on up to thread_budget() threads. Each
/// index is visited exactly once; the first exception thrown is rethrown
/// after all workers finish.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace folia
