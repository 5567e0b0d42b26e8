#include "refbm/parallel.hpp"

#include <thread>

namespace refbm {

unsigned default_thread_count() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1u : hw;
}

void parallel_for(std::size_t n, unsigned threads,
                  const std::function<void(std::size_t)>& body) {
  parallel_for_with_state(
      n, threads, [] { return 0; },
      [&](int&, std::size_t i) { body(i); });
}

} // namespace refbm
