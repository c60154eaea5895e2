#pragma once

#include <cstddef>
#include <functional>

namespace cyclesem {

// Worker count for parallel_blocks. 0 restores the hardware default.
void set_num_threads(int n);
int num_threads();

// Runs fn(block) for block = 0..num_blocks-1 on the worker pool.
// Blocks must be independent; the block decomposition is chosen by the
// caller and never depends on the worker count, so results are byte-identical
// for any pool size.
void parallel_blocks(size_t num_blocks, const std::function<void(size_t)>& fn);

}  // namespace cyclesem
