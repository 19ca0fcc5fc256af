#pragma once

// Element-parallel loops. Results are written to per-index slots and reduced
// sequentially by the caller, so the outcome does not depend on thread count.

#include <cstddef>
#include <exception>

namespace gfe {

/// Caps the number of worker threads (values < 1 mean "all available").
void set_thread_count(int threads);
int thread_count();
/// Applies the GFE_THREADS environment variable if it is set.
void configure_threads_from_env();

namespace detail {
void parallel_for_impl(std::ptrdiff_t n, void (*body)(void*, std::ptrdiff_t), void* context);
}

/// Runs f(i) for i in [0, n). The first exception thrown by any f(i) is rethrown.
template <typename F>
void parallel_for(std::size_t n, F&& f) {
  auto trampoline = [](void* ctx, std::ptrdiff_t i) { (*static_cast<F*>(ctx))(static_cast<std::size_t>(i)); };
  detail::parallel_for_impl(static_cast<std::ptrdiff_t>(n), trampoline, &f);
}

}  // namespace gfe
