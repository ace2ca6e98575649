#pragma once

#include <omp.h>

namespace fbmavg::detail {

// Thread count for an OpenMP region; non-positive requests the runtime default.
inline int resolve_threads(int requested) {
    return requested > 0 ? requested : omp_get_max_threads();
}

}  // namespace fbmavg::detail
