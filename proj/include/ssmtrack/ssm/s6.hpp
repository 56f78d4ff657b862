// Copyright 2026 The ssmtrack Authors. Apache 2.0 License.
#pragma once

// Input-dependent (selective) parameterization of the scan: delta, B and C
// are computed from the sequence itself.

#include "ssmtrack/core/random.hpp"
#include "ssmtrack/nn/ops.hpp"
#include "ssmtrack/ssm/scan.hpp"

namespace ssmtrack::ssm {

template <typename T>
struct SelectiveProjection {
  using value_type = T;
  nn::Linear<T> to_delta;  // D -> D, followed by softplus
  nn::Linear<T> to_B;      // D -> N
  nn::Linear<T> to_C;      // D -> N

  SelectiveProjection() = default;
  SelectiveProjection(std::size_t channels, std::size_t state)
      : to_delta(channels, channels), to_B(channels, state), to_C(channels, state) {}

  template <class F>
  void visit(F&& f, const std::string& prefix) {
    visit_impl(*this, f, prefix);
  }
  template <class F>
  void visit(F&& f, const std::string& prefix) const {
    visit_impl(*this, f, prefix);
  }

 private:
  template <class Self, class F>
  static void visit_impl(Self& self, F& f, const std::string& prefix) {
    self.to_delta.visit(f, prefix + "delta.");
    self.to_B.visit(f, prefix + "B.");
    self.to_C.visit(f, prefix + "C.");
  }
};

template <typename T>
struct Projected {
  Matrix<T> delta;      // softplus(delta_pre) > 0
  Matrix<T> delta_pre;  // affine output before softplus
  Matrix<T> B;
  Matrix<T> C;
};

template <typename T>
Projected<T> input_dependent_projection(const Matrix<T>& x, const SelectiveProjection<T>& proj);

// Accumulates into dx and grad (either may be null).
template <typename T>
void projection_backward(const Matrix<T>& x, const SelectiveProjection<T>& proj, const Projected<T>& fwd,
                         const Matrix<T>& d_delta, const Matrix<T>& d_B, const Matrix<T>& d_C, Matrix<T>* dx,
                         SelectiveProjection<T>* grad);

// One scan orientation's parameters.
template <typename T>
struct S6Params {
  using value_type = T;
  StateCoefficients<T> A;
  SelectiveProjection<T> proj;

  S6Params() = default;
  S6Params(std::size_t channels, std::size_t state) : A(channels, state), proj(channels, state) {}

  template <class F>
  void visit(F&& f, const std::string& prefix) {
    A.visit(f, prefix);
    proj.visit(f, prefix + "proj.");
  }
  template <class F>
  void visit(F&& f, const std::string& prefix) const {
    A.visit(f, prefix);
    proj.visit(f, prefix + "proj.");
  }
};

inline constexpr double kSelectiveInitStd = 0.45;

// Truncated-normal projections (delta scaled by 1/sqrt(channels), B and C with
// kSelectiveInitStd), zero B/C biases, and a delta bias drawn so that
// softplus(bias) is log-uniform in [0.01, 0.1].
template <typename T>
void init_s6(S6Params<T>& p, Rng& rng);

template <typename T>
Matrix<T> s6_forward(const Matrix<T>& x, const S6Params<T>& p);

// Returns dL/dx; accumulates parameter gradients (A as d/d log_magnitude) into grad.
template <typename T>
Matrix<T> s6_backward(const Matrix<T>& x, const S6Params<T>& p, const Matrix<T>& dy, S6Params<T>* grad);

}  // namespace ssmtrack::ssm
