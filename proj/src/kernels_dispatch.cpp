#include <cstdlib>
#include <cstring>

#include "rham/kernels.hpp"

namespace rham::kernels {

const Ops* avx2_ops_impl();  // defined in kernels_avx2.cpp

const Ops* avx2_ops() {
#if defined(__x86_64__)
  if (!__builtin_cpu_supports("avx2")) return nullptr;
  return avx2_ops_impl();
#else
  return nullptr;
#endif
}

const Ops& active_ops() {
  static const Ops* selected = [] {
    const char* env = std::getenv("RHAM_KERNELS");
    if (env != nullptr && std::strcmp(env, "scalar") == 0) return &scalar_ops();
    if (const Ops* v = avx2_ops()) return v;
    return &scalar_ops();
  }();
  return *selected;
}

}  // namespace rham::kernels
