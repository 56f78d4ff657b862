// Copyright 2026 The ssmtrack Authors. Apache 2.0 License.
#include <cstdlib>
#include <string_view>

#include "ssmtrack/simd/kernels.hpp"

namespace ssmtrack::simd {

#if defined(SSMTRACK_HAVE_AVX2)
namespace avx2 {
extern const KernelSet<double> kAvx2Double;
extern const KernelSet<float> kAvx2Float;
}  // namespace avx2
#endif

namespace {

bool cpu_has_avx2() {
#if defined(SSMTRACK_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

bool forced_scalar() {
  const char* env = std::getenv("SSMTRACK_ISA");
  return env != nullptr && std::string_view(env) == "scalar";
}

bool use_avx2() {
  static const bool enabled = cpu_has_avx2() && !forced_scalar();
  return enabled;
}

}  // namespace

template <>
const KernelSet<double>* avx2_kernels<double>() {
#if defined(SSMTRACK_HAVE_AVX2)
  if (cpu_has_avx2()) return &avx2::kAvx2Double;
#endif
  return nullptr;
}

template <>
const KernelSet<float>* avx2_kernels<float>() {
#if defined(SSMTRACK_HAVE_AVX2)
  if (cpu_has_avx2()) return &avx2::kAvx2Float;
#endif
  return nullptr;
}

template <typename T>
const KernelSet<T>& active_kernels() {
  if (use_avx2()) return *avx2_kernels<T>();
  return scalar_kernels<T>();
}

template const KernelSet<float>& active_kernels<float>();
template const KernelSet<double>& active_kernels<double>();

std::string_view active_isa() { return use_avx2() ? "avx2" : "scalar"; }

}  // namespace ssmtrack::simd
