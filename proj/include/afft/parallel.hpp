#pragma once

namespace afft {

/// Selects between the plain-loop reference path and the OpenMP path of a
/// kernel. Both produce identical results; the serial one is kept for tests
/// and benchmarks.
enum class Exec { Serial, Parallel };

/// Worker count used by Parallel kernels. Honours AFFT_THREADS (0 or unset = auto).
int worker_count();

/// Re-reads AFFT_THREADS and applies it to the OpenMP runtime.
void configure_threads_from_env();

}  // namespace afft
