#pragma once
#include <tbb/global_control.h>
#include <tbb/parallel_for.h>

#include <cstddef>
#include <memory>
#include <vector>

namespace lz {

// Ordered parallel map; threads <= 0 means library default.
template <class T, class F>
std::vector<T> parallel_map(std::size_t n, int threads, F&& f) {
  std::vector<T> out(n);
  if (threads == 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) out[i] = f(i);
    return out;
  }
  std::unique_ptr<tbb::global_control> cap;
  if (threads > 1)
    cap = std::make_unique<tbb::global_control>(tbb::global_control::max_allowed_parallelism,
                                                std::size_t(threads));
  tbb::parallel_for(std::size_t(0), n, [&](std::size_t i) { out[i] = f(i); });
  return out;
}

}  // namespace lz
