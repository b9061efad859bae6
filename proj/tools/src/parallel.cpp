#include "sepnmf/cli/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace sepnmf::cli {

void parallel_for(Index n, unsigned jobs, const std::function<void(Index)>& body) {
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  const Index workers = std::min<Index>(jobs, n);
  std::vector<std::exception_ptr> errors(n);
  if (workers <= 1) {
    for (Index i = 0; i < n; ++i) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    std::atomic<Index> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (Index w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (Index i = next++; i < n; i = next++) {
          try {
            body(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
    for (std::thread& t : pool) t.join();
  }
  for (const std::exception_ptr& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace sepnmf::cli
