#pragma once

#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace fusedrive {

// Full-resolution segmentation tensors are tens of megabytes. glibc would hand
// each one back to the kernel on free and fault it in again on the next step,
// so keep large blocks on the heap instead.
inline void configure_allocator() {
#if defined(__GLIBC__)
  mallopt(M_MMAP_THRESHOLD, 32 * 1024 * 1024);
  mallopt(M_TRIM_THRESHOLD, 1024 * 1024 * 1024);
  mallopt(M_TOP_PAD, 256 * 1024 * 1024);
#endif
}

}  // namespace fusedrive
