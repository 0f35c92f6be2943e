#pragma once

#include <cstddef>
#include <cstdlib>
#include <thread>
#include <vector>

namespace placefm {

// Resolves a --threads request: values >= 1 are taken as-is, anything else
// falls back to the PLACEFM_THREADS environment variable, then to 1.
inline int resolve_thread_count(int requested) {
  if (requested >= 1) {
    return requested;
  }
  if (const char* env = std::getenv("PLACEFM_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) {
      return n;
    }
  }
  return 1;
}

// Runs fn(i) for i in [begin, end) over static contiguous chunks. Each index
// must write only its own outputs; chunking never changes results, so thread
// count 1 and N produce identical data.
template <typename Fn>
void parallel_for(std::size_t begin, std::size_t end, int threads, Fn&& fn) {
  const std::size_t count = end > begin ? end - begin : 0;
  if (count == 0) {
    return;
  }
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(threads < 1 ? 1 : threads), count);
  if (workers <= 1) {
    for (std::size_t i = begin; i < end; ++i) {
      fn(i);
    }
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (count + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = begin + w * chunk;
    const std::size_t hi = std::min(end, lo + chunk);
    if (lo >= hi) {
      break;
    }
    pool.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i) {
        fn(i);
      }
    });
  }
  for (auto& t : pool) {
    t.join();
  }
}

}  // namespace placefm
