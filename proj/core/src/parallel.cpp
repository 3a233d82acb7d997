#include "blind_lmmse/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace blmmse {

namespace {
// Set on worker threads so nested parallel_for calls run inline.
thread_local bool in_parallel_region = false;
}  // namespace

std::size_t worker_count(std::size_t jobs) {
  std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("BLIND_LMMSE_THREADS")) {
    try {
      const long requested = std::stol(env);
      // An explicit count wins over the hardware hint, oversubscribing if asked.
      if (requested >= 1) hw = static_cast<std::size_t>(requested);
    } catch (const std::exception&) {
      // Malformed values are ignored.
    }
  }
  return std::max<std::size_t>(1, std::min(hw, jobs));
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = in_parallel_region ? 1 : worker_count(count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto run = [&] {
    const bool outer = in_parallel_region;
    in_parallel_region = true;
    struct Reset {
      bool value;
      ~Reset() { in_parallel_region = value; }
    } reset{outer};
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(count);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(run);
  run();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace blmmse
