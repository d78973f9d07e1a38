#pragma once

// Deterministic fork-join helper. Work items are partitioned statically and
// write only to their own output slots, so results cannot depend on the
// worker count.

#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace mistaken {

// Job-count resolution: explicit request > MISTAKEN_LAB_JOBS > hardware.
inline int resolve_jobs(int requested = 0) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("MISTAKEN_LAB_JOBS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

template <typename Fn>
void parallel_for(int n, int jobs, Fn&& fn) {
  if (n <= 0) return;
  jobs = resolve_jobs(jobs);
  if (jobs > n) jobs = n;
  if (jobs <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> workers;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(jobs));
  for (int w = 0; w < jobs; ++w) {
    workers.emplace_back([&, w] {
      try {
        for (int i = w; i < n; i += jobs) fn(i);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : workers) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace mistaken
