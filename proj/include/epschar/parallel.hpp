#pragma once
// Static range partition over a bounded number of threads. Each index is
// handled by exactly one worker, so results written per index are
// independent of the schedule.

#include <algorithm>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace epschar {

inline void parallel_for(uint64_t count, int jobs, const std::function<void(uint64_t begin, uint64_t end)>& body) {
  const uint64_t workers = std::clamp<uint64_t>(static_cast<uint64_t>(std::max(jobs, 1)), 1, std::max<uint64_t>(count, 1));
  if (workers == 1) {
    body(0, count);
    return;
  }
  std::vector<std::thread> pool;
  std::exception_ptr err;
  std::mutex mu;
  const uint64_t chunk = (count + workers - 1) / workers;
  for (uint64_t w = 0; w < workers; ++w) {
    const uint64_t b = w * chunk, e = std::min(count, b + chunk);
    if (b >= e) break;
    pool.emplace_back([&, b, e] {
      try {
        body(b, e);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!err) err = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace epschar
