#pragma once

#include <cstdlib>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace fsg {

// Worker cap for data-parallel loops. FSG_THREADS overrides hardware
// concurrency; values below 1 or unparsable values are rejected loudly rather
// than silently clamped so a typo in a job script does not change behaviour.
inline int thread_limit() {
  const char* env = std::getenv("FSG_THREADS");
  if (env == nullptr || *env == '\0') {
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
  }
  char* end = nullptr;
  long v = std::strtol(env, &end, 10);
  if (end == env || *end != '\0' || v < 1)
    throw std::invalid_argument("FSG_THREADS must be a positive integer, got '" + std::string(env) + "'");
  return static_cast<int>(v);
}

// Static-chunked parallel loop over [begin, end). The body must write only to
// slots owned by its index so the result is identical for any thread count.
// Runs inline when one worker suffices.
template <typename Body>
void parallel_for(int begin, int end, const Body& body, int workers = 0) {
  if (end <= begin) return;
  if (workers <= 0) workers = thread_limit();
  const int count = end - begin;
  if (workers > count) workers = count;
  if (workers <= 1) {
    for (int i = begin; i < end; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::exception_ptr first_error;
  std::mutex error_lock;
  for (int w = 0; w < workers; ++w) {
    const int lo = begin + static_cast<int>(static_cast<long long>(count) * w / workers);
    const int hi = begin + static_cast<int>(static_cast<long long>(count) * (w + 1) / workers);
    pool.emplace_back([&, lo, hi] {
      try {
        for (int i = lo; i < hi; ++i) body(i);
      } catch (...) {
        std::lock_guard<std::mutex> guard(error_lock);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace fsg
