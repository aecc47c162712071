#include "molpool/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace molpool::kernels {

const KernelTable* avx2_table_impl();  // defined in kernels_avx2.cpp

namespace {

bool cpu_has_avx2_fma() {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* select() {
  const KernelTable* best =
      cpu_has_avx2_fma() ? avx2_table_impl() : nullptr;
  if (const char* env = std::getenv("MOLPOOL_KERNELS")) {
    if (std::strcmp(env, "scalar") == 0) return &scalar();
    if (std::strcmp(env, "avx2") == 0 && best) return best;
  }
  return best ? best : &scalar();
}

}  // namespace

const KernelTable* avx2() {
  return cpu_has_avx2_fma() ? avx2_table_impl() : nullptr;
}

const KernelTable& active() {
  static const KernelTable* chosen = select();
  return *chosen;
}

}  // namespace molpool::kernels
