#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace stepmap {

struct JobError : std::runtime_error {
  JobError(int idx, const std::string& msg) : std::runtime_error(msg), index(idx) {}
  int index;
};

// Runs f(i) for i in [0, n) on up to `workers` threads (<=0 means hardware
// concurrency). Jobs must write results into caller-owned storage by index so
// outputs never depend on scheduling. Returns one exception slot per job.
inline std::vector<std::exception_ptr> run_jobs(int n, int workers,
                                                const std::function<void(int)>& f) {
  std::vector<std::exception_ptr> errors(static_cast<size_t>(n > 0 ? n : 0));
  if (n <= 0) return errors;
  if (workers <= 0) workers = static_cast<int>(std::thread::hardware_concurrency());
  if (workers < 1) workers = 1;
  if (workers > n) workers = n;

  if (workers == 1) {
    for (int i = 0; i < n; ++i) {
      try {
        f(i);
      } catch (...) {
        errors[static_cast<size_t>(i)] = std::current_exception();
      }
    }
    return errors;
  }

  std::atomic<int> next{0};
  auto body = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n) return;
      try {
        f(i);
      } catch (...) {
        errors[static_cast<size_t>(i)] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(workers));
  for (int w = 0; w < workers; ++w) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  return errors;
}

// Throwing variant: rethrows the lowest failed index as JobError (wrapping the
// original message) so callers get a deterministic error identity.
inline void run_jobs_or_throw(int n, int workers, const std::function<void(int)>& f) {
  const auto errors = run_jobs(n, workers, f);
  for (int i = 0; i < n; ++i) {
    if (!errors[static_cast<size_t>(i)]) continue;
    try {
      std::rethrow_exception(errors[static_cast<size_t>(i)]);
    } catch (const std::exception& e) {
      throw JobError(i, "job " + std::to_string(i) + ": " + e.what());
    } catch (...) {
      throw JobError(i, "job " + std::to_string(i) + ": unknown error");
    }
  }
}

}  // namespace stepmap
