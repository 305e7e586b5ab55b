#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace hfevd {

/// Worker count used by the engines. Initialized from HFEVD_THREADS when set,
/// otherwise from std::thread::hardware_concurrency().
int thread_count() noexcept;
void set_thread_count(int threads) noexcept;

/// Paths per work unit. Fixed so that partial sums, and therefore results,
/// do not depend on the number of workers.
inline constexpr std::size_t kChunkSize = 4096;

inline std::size_t chunk_count(std::size_t total, std::size_t chunk = kChunkSize) {
  return (total + chunk - 1) / chunk;
}

/// Runs fn(chunk_id, begin, end) for every chunk of [0, total). Chunks are
/// handed out round-robin; callers reduce per-chunk results in chunk order.
/// The first exception (by chunk id) is rethrown after all workers join.
template <typename Fn>
void parallel_chunks(std::size_t total, Fn&& fn, std::size_t chunk = kChunkSize) {
  const std::size_t chunks = chunk_count(total, chunk);
  if (chunks == 0) return;
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(std::max(1, thread_count())), chunks);

  std::vector<std::exception_ptr> errors(chunks);
  auto body = [&](std::size_t worker) {
    for (std::size_t c = worker; c < chunks; c += workers) {
      try {
        const std::size_t begin = c * chunk;
        fn(c, begin, std::min(total, begin + chunk));
      } catch (...) {
        errors[c] = std::current_exception();
      }
    }
  };

  if (workers == 1) {
    body(0);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(body, w);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace hfevd
