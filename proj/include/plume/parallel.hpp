#pragma once

/// Execution-policy switch shared by the batched kernels. Every parallel
/// kernel in this library has a serial twin that runs the identical chunked
/// algorithm, so results are bit-for-bit equal across policies and thread
/// counts; the serial path doubles as the reference implementation in tests
/// and benchmarks.

#ifdef _OPENMP
#include <omp.h>
#endif

namespace plume {

enum class ExecPolicy {
    Serial,    ///< reference implementation, single thread
    Parallel,  ///< OpenMP worksharing when compiled in, else same as Serial
};

/// Fixed reduction granularity: partial sums are accumulated per chunk of
/// this many samples and the chunk results are combined in index order,
/// which makes floating-point reductions independent of the thread count.
inline constexpr int kReductionChunk = 64;

inline int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace plume
