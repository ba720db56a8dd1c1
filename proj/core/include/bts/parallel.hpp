#pragma once

#include <cstddef>
#include <functional>

namespace bts {

/// Worker count used when a caller passes 0: $BTS_WORKERS if set, otherwise
/// std::thread::hardware_concurrency().
std::size_t default_workers();

/// Splits [0, count) into contiguous blocks and runs fn(begin, end, worker)
/// for each block on its own thread. The first exception thrown by any block
/// is rethrown after all threads join.
void parallel_blocks(
    std::size_t count, std::size_t workers,
    const std::function<void(std::size_t, std::size_t, std::size_t)>& fn);

template <class Fn>
void parallel_for(std::size_t count, std::size_t workers, Fn&& fn) {
  parallel_blocks(count, workers,
                  [&](std::size_t begin, std::size_t end, std::size_t) {
                    for (std::size_t i = begin; i < end; ++i) fn(i);
                  });
}

}  // namespace bts
