#include "ccyopt/parallel.hpp"

#include <atomic>
#include <mutex>

namespace ccyopt {

namespace {
int g_default_workers = 0;
}

int default_workers() {
  if (g_default_workers > 0) return g_default_workers;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void set_default_workers(int workers) { g_default_workers = workers; }

void parallel_for(Index count, const std::function<void(Index)>& body, int workers) {
  if (workers <= 0) workers = default_workers();
  if (count <= 0) return;
  if (workers == 1 || count == 1) {
    for (Index i = 0; i < count; ++i) body(i);
    return;
  }
  workers = static_cast<int>(std::min<Index>(workers, count));
  std::atomic<Index> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(workers));
  for (int t = 0; t < workers; ++t) {
    pool.emplace_back([&]() {
      while (true) {
        const Index i = next.fetch_add(1);
        if (i >= count) break;
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace ccyopt
