//
// Project chemlm
// SPDX-License-Identifier: Apache-2.0
//

#ifndef CHEMLM_PARALLEL_H_
#define CHEMLM_PARALLEL_H_

#include <cstddef>
#include <functional>

namespace chemlm {

// CHEMLM_THREADS if set to a positive integer, else hardware concurrency.
int thread_count();

// Calls fn(i) for i in [0, n) on up to `threads` workers with static
// contiguous chunks. fn must only write to per-index state; callers reduce
// afterwards in index order, so results do not depend on the thread count.
// The first exception thrown by fn is rethrown after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)> &fn,
                  int threads = thread_count());

}  // namespace chemlm

#endif  // CHEMLM_PARALLEL_H_
