// Copyright 2026 The ssmtrack Authors. Apache 2.0 License.
#pragma once

// Selective state space scan with a diagonal, per-channel state matrix.
//
//   abar[t,d,n]  = exp(delta[t,d] * A[d,n])
//   drive[t,d,n] = (abar - 1) / A[d,n] * B[t,n] * x[t,d]     (delta * B * x when |delta*A| < 1e-6)
//   h_t          = abar_t * h_{t-1} + drive_t
//   y[t,d]       = sum_n C[t,n] * h_t[d,n]

#include <cstddef>
#include <string>

#include "ssmtrack/core/tensor.hpp"
#include "ssmtrack/simd/kernels.hpp"

namespace ssmtrack::ssm {

// Diagonal state matrix stored as log-magnitudes: A[d,n] = -exp(log_magnitude[d,n]).
template <typename T>
class StateCoefficients {
 public:
  using value_type = T;
  StateCoefficients() = default;
  // Initialized so that A[d,n] = -(n + 1).
  StateCoefficients(std::size_t channels, std::size_t state);
  // A must be strictly negative everywhere.
  static StateCoefficients from_realized(const Matrix<T>& A);

  std::size_t channels() const { return log_magnitude_.rows(); }
  std::size_t state() const { return log_magnitude_.cols(); }
  Matrix<T>& log_magnitude() { return log_magnitude_; }
  const Matrix<T>& log_magnitude() const { return log_magnitude_; }
  Matrix<T> realized() const;

  template <class F>
  void visit(F&& f, const std::string& prefix) {
    f(prefix + "A_log", log_magnitude_);
  }
  template <class F>
  void visit(F&& f, const std::string& prefix) const {
    f(prefix + "A_log", log_magnitude_);
  }

 private:
  Matrix<T> log_magnitude_;
};

template <typename T>
struct ScanInputs {
  Matrix<T> x;      // L x D
  Matrix<T> delta;  // L x D, strictly positive
  Matrix<T> B;      // L x N
  Matrix<T> C;      // L x N
  Matrix<T> A;      // D x N, realized, strictly negative
  Matrix<T> h0;     // D x N

  std::size_t length() const { return x.rows(); }
  std::size_t channels() const { return x.cols(); }
  std::size_t state() const { return A.cols(); }

  // Throws ContractError on shape problems, DomainError on non-positive delta or non-negative A.
  void validate() const;
};

// Zero initial state of the right shape.
template <typename T>
ScanInputs<T> make_scan_inputs(Matrix<T> x, Matrix<T> delta, Matrix<T> B, Matrix<T> C, Matrix<T> A);

template <typename T>
struct DiscreteTransition {
  Array3<T> abar;   // L x D x N
  Array3<T> drive;  // L x D x N, Bbar already multiplied by x
};

template <typename T>
struct ScanOutput {
  Matrix<T> y;        // L x D
  Matrix<T> h_final;  // D x N
};

template <typename T>
struct ScanGradients {
  Matrix<T> x, delta, A, B, C, h0;
};

template <typename T>
DiscreteTransition<T> zoh_discretize(const Matrix<T>& A, const Matrix<T>& delta, const Matrix<T>& B,
                                     const Matrix<T>& x);

// Single left-to-right pass, O(L * D * N); uses the process-wide kernel table.
template <typename T>
ScanOutput<T> selective_scan(const ScanInputs<T>& in);

template <typename T>
ScanOutput<T> selective_scan(const ScanInputs<T>& in, const simd::KernelSet<T>& kernels);

// Expands every hidden state as an explicit sum of products of transition
// multipliers. O(L^2) per state entry; intended for L <= 256.
template <typename T>
ScanOutput<T> selective_scan_oracle(const ScanInputs<T>& in);

// Reverse-mode gradients of (y, h_final) with cotangents (d_y, d_hfinal).
template <typename T>
ScanGradients<T> selective_scan_backward(const ScanInputs<T>& in, const Matrix<T>& d_y,
                                         const Matrix<T>& d_hfinal);

}  // namespace ssmtrack::ssm
