// Copyright 2026 The ssmtrack Authors. Apache 2.0 License.
#pragma once

// Row-wise building blocks shared by the scan projections, the encoder block
// and the tracking head. Backward functions accumulate into their outputs.

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>

#include "ssmtrack/core/tensor.hpp"

namespace ssmtrack::nn {

// y = x W^T + b, W is out x in, b is 1 x out.
template <typename T>
struct Linear {
  using value_type = T;
  Matrix<T> weight;
  Matrix<T> bias;

  Linear() = default;
  Linear(std::size_t in, std::size_t out) : weight(out, in), bias(1, out) {}
  std::size_t in_features() const { return weight.cols(); }
  std::size_t out_features() const { return weight.rows(); }

  template <class F>
  void visit(F&& f, const std::string& prefix) {
    f(prefix + "weight", weight);
    f(prefix + "bias", bias);
  }
  template <class F>
  void visit(F&& f, const std::string& prefix) const {
    f(prefix + "weight", weight);
    f(prefix + "bias", bias);
  }
};

// Depthwise causal 1-D convolution; weight is channels x width, tap width-1 is the current step.
template <typename T>
struct DepthwiseConv {
  using value_type = T;
  Matrix<T> weight;
  Matrix<T> bias;

  DepthwiseConv() = default;
  DepthwiseConv(std::size_t channels, std::size_t width) : weight(channels, width), bias(1, channels) {}
  std::size_t channels() const { return weight.rows(); }
  std::size_t width() const { return weight.cols(); }

  template <class F>
  void visit(F&& f, const std::string& prefix) {
    f(prefix + "weight", weight);
    f(prefix + "bias", bias);
  }
  template <class F>
  void visit(F&& f, const std::string& prefix) const {
    f(prefix + "weight", weight);
    f(prefix + "bias", bias);
  }
};

template <typename T>
Matrix<T> affine(const Matrix<T>& x, const Linear<T>& lin);

template <typename T>
void affine_backward(const Matrix<T>& x, const Linear<T>& lin, const Matrix<T>& dy, Matrix<T>* dx,
                     Linear<T>* grad);

template <typename T>
Matrix<T> rms_norm(const Matrix<T>& v, const Matrix<T>& weight, T eps);

template <typename T>
void rms_norm_backward(const Matrix<T>& v, const Matrix<T>& weight, T eps, const Matrix<T>& dy,
                       Matrix<T>* dv, Matrix<T>* dweight);

template <typename T>
Matrix<T> causal_conv1d(const Matrix<T>& x, const DepthwiseConv<T>& conv);

template <typename T>
void causal_conv1d_backward(const Matrix<T>& x, const DepthwiseConv<T>& conv, const Matrix<T>& dy,
                            Matrix<T>* dx, DepthwiseConv<T>* grad);

template <typename T>
inline T sigmoid(T z) {
  if (z >= 0) return T(1) / (T(1) + std::exp(-z));
  const T e = std::exp(z);
  return e / (T(1) + e);
}

template <typename T>
inline T silu(T z) {
  return z * sigmoid(z);
}

template <typename T>
inline T silu_grad(T z) {
  const T s = sigmoid(z);
  return s * (T(1) + z * (T(1) - s));
}

// log(1 + e^z), floored at the smallest normal so the result is always > 0.
template <typename T>
inline T softplus(T z) {
  T v = z > T(20) ? z : std::log1p(std::exp(z));
  return v > std::numeric_limits<T>::min() ? v : std::numeric_limits<T>::min();
}

template <typename T>
inline T inverse_softplus(T y) {
  return y + std::log(-std::expm1(-y));
}

template <typename T>
Matrix<T> map_silu(const Matrix<T>& z);

template <typename T>
Matrix<T> hadamard(const Matrix<T>& a, const Matrix<T>& b);

}  // namespace ssmtrack::nn
