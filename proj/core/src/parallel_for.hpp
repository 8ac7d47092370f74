#pragma once

#include <algorithm>
#include <thread>
#include <vector>

namespace ptc::detail {

// Static chunking over [0, count); fn(i) must write only to slot i so
// the result is identical for any thread count.
template <typename Fn>
void parallel_for(int count, const Fn& fn) {
  unsigned threads = std::thread::hardware_concurrency();
  if (threads <= 1 || count < 64) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  threads = std::min<unsigned>(threads, 8);
  std::vector<std::thread> pool;
  const int chunk =
      (count + static_cast<int>(threads) - 1) / static_cast<int>(threads);
  for (unsigned t = 0; t < threads; ++t) {
    const int lo = static_cast<int>(t) * chunk;
    const int hi = std::min(count, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (int i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace ptc::detail
