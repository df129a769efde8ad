#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace ot {

// Worker cap: min(OT_NUM_THREADS, hardware_concurrency). Results never depend
// on the cap because work is partitioned by fixed-size chunks and reduced in
// chunk order, not by thread id.
inline int thread_cap() {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  if (const char* env = std::getenv("OT_NUM_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1 && v < static_cast<long>(hw)) return static_cast<int>(v);
  }
  return static_cast<int>(hw);
}

// Runs fn(i) for i in [0, n). Chunk boundaries depend only on n and
// chunk_size, so any per-chunk outputs can be combined in chunk order to give
// results independent of the number of workers.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                         std::size_t chunk_size = 1) {
  if (n == 0) return;
  const int workers = std::min<std::size_t>(thread_cap(), (n + chunk_size - 1) / chunk_size);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next_chunk{0};
  const std::size_t n_chunks = (n + chunk_size - 1) / chunk_size;
  auto body = [&]() {
    for (;;) {
      const std::size_t c = next_chunk.fetch_add(1);
      if (c >= n_chunks) break;
      const std::size_t lo = c * chunk_size;
      const std::size_t hi = std::min(n, lo + chunk_size);
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (int w = 1; w < workers; ++w) pool.emplace_back(body);
  body();
  for (auto& t : pool) t.join();
}

}  // namespace ot
