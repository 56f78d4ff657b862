// Copyright 2026 The ssmtrack Authors. Apache 2.0 License.
#pragma once

// Hot inner loops behind a per-ISA function table. The scalar table is the
// reference; vector tables must agree with it up to floating-point
// reassociation (see tests/unit/test_kernels.cpp).

#include <cstddef>
#include <string_view>

namespace ssmtrack::simd {

// |delta * A| below this switches the drive term to the first-order limit delta * B.
inline constexpr double kEulerThreshold = 1e-6;

template <typename T>
struct ScanStepArgs {
  std::size_t channels = 0;  // D
  std::size_t state = 0;     // N
  const T* delta = nullptr;  // [D]
  const T* x = nullptr;      // [D]
  const T* A = nullptr;      // [D x N], realized (negative) values
  const T* B = nullptr;      // [N]
  const T* C = nullptr;      // [N]
  T* h = nullptr;            // [D x N], updated in place
  T* y = nullptr;            // [D], overwritten
};

template <typename T>
struct KernelSet {
  std::string_view isa;
  T (*dot)(const T* a, const T* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(T alpha, const T* x, T* y, std::size_t n);
  void (*vexp)(const T* in, T* out, std::size_t n);
  // One time step of discretize + recurrence + output contraction, all channels.
  void (*scan_step)(const ScanStepArgs<T>& args);
};

template <typename T>
const KernelSet<T>& scalar_kernels();

// nullptr when the binary was built without AVX2 support or the CPU lacks AVX2/FMA.
template <typename T>
const KernelSet<T>* avx2_kernels();

// Chosen once per process. SSMTRACK_ISA=scalar forces the reference table.
template <typename T>
const KernelSet<T>& active_kernels();

std::string_view active_isa();

}  // namespace ssmtrack::simd
