#pragma once

#include <cstddef>
#include <functional>

namespace soliton_forge {

/// Worker count for internal loops: SOLITON_FORGE_THREADS if set (>= 1),
/// otherwise the hardware concurrency.
int worker_count();

/// Runs body(i) for i in [0, n). Iterations must be independent; exceptions
/// from any worker are rethrown on the calling thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace soliton_forge
