#pragma once

#include <cstddef>
#include <functional>

namespace refbm {

/// Number of worker threads to use when the caller passes 0.
unsigned default_thread_count();

/// Runs body(i) for i in [0, n) on up to `threads` workers. Work items are
/// claimed dynamically, so completion order is unspecified; callers write
/// results into per-index slots and reduce afterwards.
void parallel_for(std::size_t n, unsigned threads,
                  const std::function<void(std::size_t)>& body);

/// Same, but each worker owns one instance of State created by make_state().
template <class MakeState, class Body>
void parallel_for_with_state(std::size_t n, unsigned threads,
                             MakeState make_state, Body body);

} // namespace refbm

#include "refbm/parallel_impl.hpp"
