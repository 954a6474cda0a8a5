#include "magplate/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

namespace magplate {

namespace {
std::atomic<int> g_threads{1};
}

void set_thread_count(int n) { g_threads = std::max(1, n); }
int thread_count() { return g_threads; }

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body) {
  std::size_t t = std::min<std::size_t>(std::size_t(g_threads.load()), n);
  if (t <= 1) {
    if (n) body(0, n);
    return;
  }
  std::vector<std::thread> pool;
  std::size_t chunk = (n + t - 1) / t;
  for (std::size_t b = 0; b < n; b += chunk) pool.emplace_back(body, b, std::min(n, b + chunk));
  for (auto& th : pool) th.join();
}

}  // namespace magplate
