#pragma once

#include "rdlab/kernels.hpp"

namespace rdlab::kernels {

namespace scalar {
extern const Table kTable;
}

#if defined(RDLAB_ENABLE_AVX2)
namespace avx2 {
extern const Table kTable;
}
#endif

}  // namespace rdlab::kernels
