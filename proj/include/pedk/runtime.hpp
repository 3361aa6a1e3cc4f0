#pragma once

#include <mutex>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace pedk {

// Keeps large activation buffers on the heap instead of returning them to
// the OS after every layer; fresh mappings cost a page fault per 4 KiB.
inline void tune_allocator() {
#if defined(__GLIBC__)
  static std::once_flag once;
  std::call_once(once, [] {
    mallopt(M_MMAP_THRESHOLD, 256 << 20);
    mallopt(M_TRIM_THRESHOLD, 512 << 20);
  });
#endif
}

}  // namespace pedk
