// Copyright 2026 The ssmtrack Authors. Apache 2.0 License.
//
// AVX2 + FMA kernels. This translation unit is compiled with -mavx2 -mfma and
// must only be entered after the dispatcher has confirmed CPU support.

#include <immintrin.h>

#include <cmath>

#include "ssmtrack/simd/kernels.hpp"

namespace ssmtrack::simd::avx2 {
namespace {

// ---------------------------------------------------------------------------
// double, 4 lanes
// ---------------------------------------------------------------------------

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

inline __m256d abs_pd(__m256d v) { return _mm256_andnot_pd(_mm256_set1_pd(-0.0), v); }

// Cody-Waite reduction to |r| <= ln2/2, then a degree-13 Taylor polynomial.
// Relative error is within a few ulp of std::exp over [-708, 709].
inline __m256d exp_pd(__m256d x) {
  const __m256d underflow = _mm256_cmp_pd(x, _mm256_set1_pd(-708.0), _CMP_LT_OQ);
  x = _mm256_min_pd(_mm256_max_pd(x, _mm256_set1_pd(-708.0)), _mm256_set1_pd(709.0));
  const __m256d n = _mm256_round_pd(_mm256_mul_pd(x, _mm256_set1_pd(1.4426950408889634)),
                                    _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(n, _mm256_set1_pd(6.93147180369123816490e-01), x);
  r = _mm256_fnmadd_pd(n, _mm256_set1_pd(1.90821492927058770002e-10), r);

  __m256d p = _mm256_set1_pd(1.0 / 6227020800.0);  // 1/13!
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 479001600.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 39916800.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 3628800.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 362880.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 40320.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 5040.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 720.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 120.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 24.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 6.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(0.5));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0));

  __m256i e = _mm256_cvtepi32_epi64(_mm256_cvtpd_epi32(n));
  e = _mm256_slli_epi64(_mm256_add_epi64(e, _mm256_set1_epi64x(1023)), 52);
  const __m256d result = _mm256_mul_pd(p, _mm256_castsi256_pd(e));
  return _mm256_blendv_pd(result, _mm256_setzero_pd(), underflow);
}

// expm1 with the series near zero and exp(z) - 1 elsewhere; callers pass exp(z).
inline __m256d expm1_pd(__m256d z, __m256d exp_z) {
  // z * (1 + z/2 * (1 + z/3 * (... (1 + z/11))))
  __m256d p = _mm256_set1_pd(1.0);
  for (int k = 11; k >= 2; --k) {
    p = _mm256_fmadd_pd(_mm256_mul_pd(z, _mm256_set1_pd(1.0 / k)), p, _mm256_set1_pd(1.0));
  }
  const __m256d series = _mm256_mul_pd(z, p);
  const __m256d small = _mm256_cmp_pd(abs_pd(z), _mm256_set1_pd(0.1), _CMP_LT_OQ);
  return _mm256_blendv_pd(_mm256_sub_pd(exp_z, _mm256_set1_pd(1.0)), series, small);
}

double dot_f64(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy_f64(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void vexp_f64(const double* in, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(out + i, exp_pd(_mm256_loadu_pd(in + i)));
  for (; i < n; ++i) out[i] = std::exp(in[i]);
}

void scan_step_f64(const ScanStepArgs<double>& s) {
  const __m256d euler = _mm256_set1_pd(kEulerThreshold);
  for (std::size_t d = 0; d < s.channels; ++d) {
    const double dt = s.delta[d];
    const double xd = s.x[d];
    const __m256d vdt = _mm256_set1_pd(dt);
    const __m256d vx = _mm256_set1_pd(xd);
    const double* a_row = s.A + d * s.state;
    double* h_row = s.h + d * s.state;
    __m256d acc = _mm256_setzero_pd();
    std::size_t n = 0;
    for (; n + 4 <= s.state; n += 4) {
      const __m256d a = _mm256_loadu_pd(a_row + n);
      const __m256d z = _mm256_mul_pd(vdt, a);
      const __m256d abar = exp_pd(z);
      __m256d gain = _mm256_div_pd(expm1_pd(z, abar), a);
      gain = _mm256_blendv_pd(gain, vdt, _mm256_cmp_pd(abs_pd(z), euler, _CMP_LT_OQ));
      const __m256d drive = _mm256_mul_pd(gain, _mm256_mul_pd(_mm256_loadu_pd(s.B + n), vx));
      const __m256d h = _mm256_fmadd_pd(abar, _mm256_loadu_pd(h_row + n), drive);
      _mm256_storeu_pd(h_row + n, h);
      acc = _mm256_fmadd_pd(_mm256_loadu_pd(s.C + n), h, acc);
    }
    double y = hsum(acc);
    for (; n < s.state; ++n) {
      const double z = dt * a_row[n];
      const double gain = std::abs(z) < kEulerThreshold ? dt : std::expm1(z) / a_row[n];
      h_row[n] = std::exp(z) * h_row[n] + gain * s.B[n] * xd;
      y += s.C[n] * h_row[n];
    }
    s.y[d] = y;
  }
}

// ---------------------------------------------------------------------------
// float, 8 lanes
// ---------------------------------------------------------------------------

inline float hsum(__m256 v) {
  __m128 s = _mm_add_ps(_mm256_castps256_ps128(v), _mm256_extractf128_ps(v, 1));
  s = _mm_add_ps(s, _mm_movehl_ps(s, s));
  s = _mm_add_ss(s, _mm_movehdup_ps(s));
  return _mm_cvtss_f32(s);
}

inline __m256 abs_ps(__m256 v) { return _mm256_andnot_ps(_mm256_set1_ps(-0.0f), v); }

// Cephes-style expf: two-constant reduction and a degree-7 minimax polynomial.
inline __m256 exp_ps(__m256 x) {
  const __m256 underflow = _mm256_cmp_ps(x, _mm256_set1_ps(-87.3f), _CMP_LT_OQ);
  x = _mm256_min_ps(_mm256_max_ps(x, _mm256_set1_ps(-87.3f)), _mm256_set1_ps(88.3f));
  const __m256 n = _mm256_round_ps(_mm256_mul_ps(x, _mm256_set1_ps(1.44269504088896341f)),
                                   _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256 r = _mm256_fnmadd_ps(n, _mm256_set1_ps(0.693359375f), x);
  r = _mm256_fnmadd_ps(n, _mm256_set1_ps(-2.12194440e-4f), r);
  __m256 p = _mm256_set1_ps(1.9875691500e-4f);
  p = _mm256_fmadd_ps(p, r, _mm256_set1_ps(1.3981999507e-3f));
  p = _mm256_fmadd_ps(p, r, _mm256_set1_ps(8.3334519073e-3f));
  p = _mm256_fmadd_ps(p, r, _mm256_set1_ps(4.1665795894e-2f));
  p = _mm256_fmadd_ps(p, r, _mm256_set1_ps(1.6666665459e-1f));
  p = _mm256_fmadd_ps(p, r, _mm256_set1_ps(5.0000001201e-1f));
  p = _mm256_fmadd_ps(p, _mm256_mul_ps(r, r), _mm256_add_ps(r, _mm256_set1_ps(1.0f)));
  __m256i e = _mm256_cvtps_epi32(n);
  e = _mm256_slli_epi32(_mm256_add_epi32(e, _mm256_set1_epi32(127)), 23);
  const __m256 result = _mm256_mul_ps(p, _mm256_castsi256_ps(e));
  return _mm256_blendv_ps(result, _mm256_setzero_ps(), underflow);
}

inline __m256 expm1_ps(__m256 z, __m256 exp_z) {
  __m256 p = _mm256_set1_ps(1.0f);
  for (int k = 6; k >= 2; --k) {
    p = _mm256_fmadd_ps(_mm256_mul_ps(z, _mm256_set1_ps(1.0f / static_cast<float>(k))), p,
                        _mm256_set1_ps(1.0f));
  }
  const __m256 series = _mm256_mul_ps(z, p);
  const __m256 small = _mm256_cmp_ps(abs_ps(z), _mm256_set1_ps(0.1f), _CMP_LT_OQ);
  return _mm256_blendv_ps(_mm256_sub_ps(exp_z, _mm256_set1_ps(1.0f)), series, small);
}

float dot_f32(const float* a, const float* b, std::size_t n) {
  __m256 acc0 = _mm256_setzero_ps();
  __m256 acc1 = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i), acc0);
    acc1 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i + 8), _mm256_loadu_ps(b + i + 8), acc1);
  }
  for (; i + 8 <= n; i += 8) acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i), acc0);
  float acc = hsum(_mm256_add_ps(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy_f32(float alpha, const float* x, float* y, std::size_t n) {
  const __m256 va = _mm256_set1_ps(alpha);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    _mm256_storeu_ps(y + i, _mm256_fmadd_ps(va, _mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void vexp_f32(const float* in, float* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) _mm256_storeu_ps(out + i, exp_ps(_mm256_loadu_ps(in + i)));
  for (; i < n; ++i) out[i] = std::exp(in[i]);
}

void scan_step_f32(const ScanStepArgs<float>& s) {
  const __m256 euler = _mm256_set1_ps(static_cast<float>(kEulerThreshold));
  for (std::size_t d = 0; d < s.channels; ++d) {
    const float dt = s.delta[d];
    const float xd = s.x[d];
    const __m256 vdt = _mm256_set1_ps(dt);
    const __m256 vx = _mm256_set1_ps(xd);
    const float* a_row = s.A + d * s.state;
    float* h_row = s.h + d * s.state;
    __m256 acc = _mm256_setzero_ps();
    std::size_t n = 0;
    for (; n + 8 <= s.state; n += 8) {
      const __m256 a = _mm256_loadu_ps(a_row + n);
      const __m256 z = _mm256_mul_ps(vdt, a);
      const __m256 abar = exp_ps(z);
      __m256 gain = _mm256_div_ps(expm1_ps(z, abar), a);
      gain = _mm256_blendv_ps(gain, vdt, _mm256_cmp_ps(abs_ps(z), euler, _CMP_LT_OQ));
      const __m256 drive = _mm256_mul_ps(gain, _mm256_mul_ps(_mm256_loadu_ps(s.B + n), vx));
      const __m256 h = _mm256_fmadd_ps(abar, _mm256_loadu_ps(h_row + n), drive);
      _mm256_storeu_ps(h_row + n, h);
      acc = _mm256_fmadd_ps(_mm256_loadu_ps(s.C + n), h, acc);
    }
    float y = hsum(acc);
    for (; n < s.state; ++n) {
      const float z = dt * a_row[n];
      const float gain = std::abs(z) < static_cast<float>(kEulerThreshold) ? dt : std::expm1(z) / a_row[n];
      h_row[n] = std::exp(z) * h_row[n] + gain * s.B[n] * xd;
      y += s.C[n] * h_row[n];
    }
    s.y[d] = y;
  }
}

}  // namespace

extern const KernelSet<double> kAvx2Double{"avx2", &dot_f64, &axpy_f64, &vexp_f64, &scan_step_f64};
extern const KernelSet<float> kAvx2Float{"avx2", &dot_f32, &axpy_f32, &vexp_f32, &scan_step_f32};

}  // namespace ssmtrack::simd::avx2
