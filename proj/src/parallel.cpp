#include "hfevd/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace hfevd {

namespace {

int initial_threads() {
  if (const char* env = std::getenv("HFEVD_THREADS")) {
    try {
      const int v = std::stoi(env);
      if (v > 0) return v;
    } catch (...) {
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

std::atomic<int>& threads_setting() {
  static std::atomic<int> value{initial_threads()};
  return value;
}

}  // namespace

int thread_count() noexcept { return threads_setting().load(std::memory_order_relaxed); }

void set_thread_count(int threads) noexcept {
  threads_setting().store(threads > 0 ? threads : 1, std::memory_order_relaxed);
}

}  // namespace hfevd
