#pragma once

#include <cstddef>
#include <functional>

namespace topomap {

/// Worker count used by parallel loops. Initialized from TOPOMAP_THREADS,
/// falling back to the hardware concurrency.
int num_threads();
void set_num_threads(int n);

/**
 * @brief Runs `body(begin, end)` over [0, count) split into fixed chunks of
 * `grain` items.
 *
 * Chunk boundaries depend only on `count` and `grain`, never on the worker
 * count, so a body that writes chunk-local results gives bit-identical output
 * for any thread setting.
 */
void parallel_for(std::size_t count, std::size_t grain,
                  const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace topomap
