#include "gfe/parallel.hpp"

#include <cstdlib>
#include <string>

#ifdef GFE_HAVE_OPENMP
#include <omp.h>
#endif

#include "gfe/errors.hpp"

namespace gfe {

namespace {
int g_threads = 0;
}

void set_thread_count(int threads) {
  g_threads = threads < 1 ? 0 : threads;
#ifdef GFE_HAVE_OPENMP
  if (g_threads > 0) omp_set_num_threads(g_threads);
#endif
}

int thread_count() {
#ifdef GFE_HAVE_OPENMP
  return g_threads > 0 ? g_threads : omp_get_max_threads();
#else
  return 1;
#endif
}

void configure_threads_from_env() {
  const char* env = std::getenv("GFE_THREADS");
  if (!env || !*env) return;
  try {
    set_thread_count(std::stoi(env));
  } catch (const std::exception&) {
    throw ConfigError(std::string("GFE_THREADS must be an integer, got '") + env + "'");
  }
}

namespace detail {

void parallel_for_impl(std::ptrdiff_t n, void (*body)(void*, std::ptrdiff_t), void* context) {
  std::exception_ptr error;
#ifdef GFE_HAVE_OPENMP
#pragma omp parallel for schedule(dynamic, 16) num_threads(thread_count())
#endif
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      body(context, i);
    } catch (...) {
#ifdef GFE_HAVE_OPENMP
#pragma omp critical(gfe_parallel_error)
#endif
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace detail

}  // namespace gfe
