// Copyright 2026 The ssmtrack Authors. Apache 2.0 License.
#include <cmath>

#include "ssmtrack/simd/kernels.hpp"

namespace ssmtrack::simd {
namespace {

template <typename T>
T dot_scalar(const T* a, const T* b, std::size_t n) {
  T acc = 0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

template <typename T>
void axpy_scalar(T alpha, const T* x, T* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

template <typename T>
void vexp_scalar(const T* in, T* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = std::exp(in[i]);
}

template <typename T>
void scan_step_scalar(const ScanStepArgs<T>& s) {
  const T euler = static_cast<T>(kEulerThreshold);
  for (std::size_t d = 0; d < s.channels; ++d) {
    const T dt = s.delta[d];
    const T xd = s.x[d];
    const T* a_row = s.A + d * s.state;
    T* h_row = s.h + d * s.state;
    T acc = 0;
    for (std::size_t n = 0; n < s.state; ++n) {
      const T z = dt * a_row[n];
      const T abar = std::exp(z);
      const T gain = std::abs(z) < euler ? dt : std::expm1(z) / a_row[n];
      h_row[n] = abar * h_row[n] + gain * s.B[n] * xd;
      acc += s.C[n] * h_row[n];
    }
    s.y[d] = acc;
  }
}

template <typename T>
const KernelSet<T> kScalar{"scalar", &dot_scalar<T>, &axpy_scalar<T>, &vexp_scalar<T>,
                           &scan_step_scalar<T>};

}  // namespace

template <>
const KernelSet<float>& scalar_kernels<float>() {
  return kScalar<float>;
}
template <>
const KernelSet<double>& scalar_kernels<double>() {
  return kScalar<double>;
}

}  // namespace ssmtrack::simd
