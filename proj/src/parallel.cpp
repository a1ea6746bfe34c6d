#include "afft/parallel.hpp"

#include <cstdlib>
#include <string>

#include <omp.h>

namespace afft {

void configure_threads_from_env() {
  const char* env = std::getenv("AFFT_THREADS");
  if (!env || !*env) return;
  try {
    const int n = std::stoi(env);
    if (n > 0) omp_set_num_threads(n);
  } catch (const std::exception&) {
    // Unparseable values fall back to the runtime default.
  }
}

int worker_count() { return omp_get_max_threads(); }

}  // namespace afft
