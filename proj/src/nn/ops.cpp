// Copyright 2026 The ssmtrack Authors. Apache 2.0 License.
#include "ssmtrack/nn/ops.hpp"

#include <limits>

#include "ssmtrack/simd/kernels.hpp"

namespace ssmtrack::nn {

template <typename T>
Matrix<T> affine(const Matrix<T>& x, const Linear<T>& lin) {
  if (x.cols() != lin.in_features()) {
    throw ContractError("affine: input width " + std::to_string(x.cols()) + " != " +
                        std::to_string(lin.in_features()));
  }
  const auto& k = simd::active_kernels<T>();
  const std::size_t out = lin.out_features();
  Matrix<T> y(x.rows(), out);
  for (std::size_t t = 0; t < x.rows(); ++t) {
    const T* xr = x.row(t).data();
    T* yr = y.row(t).data();
    for (std::size_t o = 0; o < out; ++o) yr[o] = k.dot(lin.weight.row(o).data(), xr, x.cols()) + lin.bias[o];
  }
  return y;
}

template <typename T>
void affine_backward(const Matrix<T>& x, const Linear<T>& lin, const Matrix<T>& dy, Matrix<T>* dx,
                     Linear<T>* grad) {
  require(dy.rows() == x.rows() && dy.cols() == lin.out_features(), "affine_backward: dy shape");
  const auto& k = simd::active_kernels<T>();
  const std::size_t in = lin.in_features();
  for (std::size_t t = 0; t < x.rows(); ++t) {
    const T* xr = x.row(t).data();
    for (std::size_t o = 0; o < lin.out_features(); ++o) {
      const T g = dy(t, o);
      if (g == T(0)) continue;
      if (dx != nullptr) k.axpy(g, lin.weight.row(o).data(), dx->row(t).data(), in);
      if (grad != nullptr) {
        k.axpy(g, xr, grad->weight.row(o).data(), in);
        grad->bias[o] += g;
      }
    }
  }
}

template <typename T>
Matrix<T> rms_norm(const Matrix<T>& v, const Matrix<T>& weight, T eps) {
  require(eps > T(0), "rms_norm: eps must be positive");
  require(weight.size() == v.cols(), "rms_norm: weight size");
  Matrix<T> out(v.rows(), v.cols());
  const std::size_t d = v.cols();
  for (std::size_t t = 0; t < v.rows(); ++t) {
    T ss = 0;
    for (std::size_t i = 0; i < d; ++i) ss += v(t, i) * v(t, i);
    const T r = T(1) / std::sqrt(ss / static_cast<T>(d) + eps);
    for (std::size_t i = 0; i < d; ++i) out(t, i) = v(t, i) * r * weight[i];
  }
  return out;
}

template <typename T>
void rms_norm_backward(const Matrix<T>& v, const Matrix<T>& weight, T eps, const Matrix<T>& dy,
                       Matrix<T>* dv, Matrix<T>* dweight) {
  require(dy.same_shape(v), "rms_norm_backward: dy shape");
  const std::size_t d = v.cols();
  const T inv_d = T(1) / static_cast<T>(d);
  for (std::size_t t = 0; t < v.rows(); ++t) {
    T ss = 0;
    for (std::size_t i = 0; i < d; ++i) ss += v(t, i) * v(t, i);
    const T r = T(1) / std::sqrt(ss * inv_d + eps);
    T gwv = 0;
    for (std::size_t i = 0; i < d; ++i) gwv += dy(t, i) * weight[i] * v(t, i);
    const T coef = r * r * r * gwv * inv_d;
    for (std::size_t i = 0; i < d; ++i) {
      if (dv != nullptr) (*dv)(t, i) += dy(t, i) * weight[i] * r - coef * v(t, i);
      if (dweight != nullptr) (*dweight)[i] += dy(t, i) * v(t, i) * r;
    }
  }
}

template <typename T>
Matrix<T> causal_conv1d(const Matrix<T>& x, const DepthwiseConv<T>& conv) {
  require(conv.width() >= 1, "causal_conv1d: width must be >= 1");
  require(x.cols() == conv.channels(), "causal_conv1d: channel mismatch");
  const std::size_t len = x.rows();
  const std::size_t ch = x.cols();
  const std::size_t w = conv.width();
  Matrix<T> out(len, ch);
  for (std::size_t t = 0; t < len; ++t) {
    for (std::size_t c = 0; c < ch; ++c) {
      T acc = conv.bias[c];
      for (std::size_t k = 0; k < w; ++k) {
        // tap k reads x[t - (w - 1) + k]; negative positions are zero padding.
        const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(t + k) - static_cast<std::ptrdiff_t>(w - 1);
        if (src >= 0) acc += conv.weight(c, k) * x(static_cast<std::size_t>(src), c);
      }
      out(t, c) = acc;
    }
  }
  return out;
}

template <typename T>
void causal_conv1d_backward(const Matrix<T>& x, const DepthwiseConv<T>& conv, const Matrix<T>& dy,
                            Matrix<T>* dx, DepthwiseConv<T>* grad) {
  require(dy.same_shape(x), "causal_conv1d_backward: dy shape");
  const std::size_t w = conv.width();
  for (std::size_t t = 0; t < x.rows(); ++t) {
    for (std::size_t c = 0; c < x.cols(); ++c) {
      const T g = dy(t, c);
      if (grad != nullptr) grad->bias[c] += g;
      for (std::size_t k = 0; k < w; ++k) {
        const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(t + k) - static_cast<std::ptrdiff_t>(w - 1);
        if (src < 0) continue;
        const auto s = static_cast<std::size_t>(src);
        if (dx != nullptr) (*dx)(s, c) += g * conv.weight(c, k);
        if (grad != nullptr) grad->weight(c, k) += g * x(s, c);
      }
    }
  }
}

template <typename T>
Matrix<T> map_silu(const Matrix<T>& z) {
  Matrix<T> out(z.rows(), z.cols());
  for (std::size_t i = 0; i < z.size(); ++i) out[i] = silu(z[i]);
  return out;
}

template <typename T>
Matrix<T> hadamard(const Matrix<T>& a, const Matrix<T>& b) {
  require(a.same_shape(b), "hadamard: shape mismatch");
  Matrix<T> out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

#define SSMTRACK_INSTANTIATE(T)                                                                     \
  template Matrix<T> affine(const Matrix<T>&, const Linear<T>&);                                    \
  template void affine_backward(const Matrix<T>&, const Linear<T>&, const Matrix<T>&, Matrix<T>*,   \
                                Linear<T>*);                                                        \
  template Matrix<T> rms_norm(const Matrix<T>&, const Matrix<T>&, T);                               \
  template void rms_norm_backward(const Matrix<T>&, const Matrix<T>&, T, const Matrix<T>&,          \
                                  Matrix<T>*, Matrix<T>*);                                          \
  template Matrix<T> causal_conv1d(const Matrix<T>&, const DepthwiseConv<T>&);                      \
  template void causal_conv1d_backward(const Matrix<T>&, const DepthwiseConv<T>&, const Matrix<T>&, \
                                       Matrix<T>*, DepthwiseConv<T>*);                              \
  template Matrix<T> map_silu(const Matrix<T>&);                                                    \
  template Matrix<T> hadamard(const Matrix<T>&, const Matrix<T>&);

SSMTRACK_INSTANTIATE(float)
SSMTRACK_INSTANTIATE(double)
#undef SSMTRACK_INSTANTIATE

}  // namespace ssmtrack::nn
