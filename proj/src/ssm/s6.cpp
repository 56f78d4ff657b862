// Copyright 2026 The ssmtrack Authors. Apache 2.0 License.
#include "ssmtrack/ssm/s6.hpp"

#include <cmath>

namespace ssmtrack::ssm {

template <typename T>
Projected<T> input_dependent_projection(const Matrix<T>& x, const SelectiveProjection<T>& proj) {
  require(proj.to_delta.out_features() == x.cols(), "projection: delta path must map D -> D");
  require(proj.to_B.out_features() == proj.to_C.out_features(), "projection: B and C widths differ");
  Projected<T> out;
  out.delta_pre = nn::affine(x, proj.to_delta);
  out.delta = Matrix<T>(x.rows(), x.cols());
  for (std::size_t i = 0; i < out.delta.size(); ++i) out.delta[i] = nn::softplus(out.delta_pre[i]);
  out.B = nn::affine(x, proj.to_B);
  out.C = nn::affine(x, proj.to_C);
  return out;
}

template <typename T>
void projection_backward(const Matrix<T>& x, const SelectiveProjection<T>& proj, const Projected<T>& fwd,
                         const Matrix<T>& d_delta, const Matrix<T>& d_B, const Matrix<T>& d_C, Matrix<T>* dx,
                         SelectiveProjection<T>* grad) {
  Matrix<T> d_pre(d_delta.rows(), d_delta.cols());
  for (std::size_t i = 0; i < d_pre.size(); ++i) d_pre[i] = d_delta[i] * nn::sigmoid(fwd.delta_pre[i]);
  nn::affine_backward(x, proj.to_delta, d_pre, dx, grad ? &grad->to_delta : nullptr);
  nn::affine_backward(x, proj.to_B, d_B, dx, grad ? &grad->to_B : nullptr);
  nn::affine_backward(x, proj.to_C, d_C, dx, grad ? &grad->to_C : nullptr);
}

template <typename T>
void init_s6(S6Params<T>& p, Rng& rng) {
  const std::size_t ch = p.proj.to_delta.in_features();
  p.A = StateCoefficients<T>(ch, p.A.state());
  const double scale = 1.0 / std::sqrt(static_cast<double>(ch));
  fill_truncated_normal(p.proj.to_delta.weight, rng, scale);
  fill_truncated_normal(p.proj.to_B.weight, rng, kSelectiveInitStd);
  fill_truncated_normal(p.proj.to_C.weight, rng, kSelectiveInitStd);
  p.proj.to_B.bias.fill(T(0));
  p.proj.to_C.bias.fill(T(0));
  std::uniform_real_distribution<double> log_dt(std::log(0.01), std::log(0.1));
  for (std::size_t d = 0; d < ch; ++d) {
    p.proj.to_delta.bias[d] = static_cast<T>(nn::inverse_softplus(std::exp(log_dt(rng))));
  }
}

template <typename T>
Matrix<T> s6_forward(const Matrix<T>& x, const S6Params<T>& p) {
  Projected<T> pr = input_dependent_projection(x, p.proj);
  const ScanInputs<T> in = make_scan_inputs(x, std::move(pr.delta), std::move(pr.B), std::move(pr.C), p.A.realized());
  return selective_scan(in).y;
}

template <typename T>
Matrix<T> s6_backward(const Matrix<T>& x, const S6Params<T>& p, const Matrix<T>& dy, S6Params<T>* grad) {
  const Projected<T> pr = input_dependent_projection(x, p.proj);
  const Matrix<T> A = p.A.realized();
  const ScanInputs<T> in = make_scan_inputs(x, pr.delta, pr.B, pr.C, A);
  const ScanGradients<T> sg = selective_scan_backward(in, dy, Matrix<T>(x.cols(), A.cols()));
  Matrix<T> dx = sg.x;
  projection_backward(x, p.proj, pr, sg.delta, sg.B, sg.C, &dx, grad ? &grad->proj : nullptr);
  if (grad != nullptr) {
    // A = -exp(l)  =>  dA/dl = A
    auto& gl = grad->A.log_magnitude();
    for (std::size_t i = 0; i < gl.size(); ++i) gl[i] += sg.A[i] * A[i];
  }
  return dx;
}

#define SSMTRACK_INSTANTIATE(T)                                                                              \
  template Projected<T> input_dependent_projection(const Matrix<T>&, const SelectiveProjection<T>&);         \
  template void projection_backward(const Matrix<T>&, const SelectiveProjection<T>&, const Projected<T>&,    \
                                    const Matrix<T>&, const Matrix<T>&, const Matrix<T>&, Matrix<T>*,        \
                                    SelectiveProjection<T>*);                                                \
  template void init_s6(S6Params<T>&, Rng&);                                                                 \
  template Matrix<T> s6_forward(const Matrix<T>&, const S6Params<T>&);                                       \
  template Matrix<T> s6_backward(const Matrix<T>&, const S6Params<T>&, const Matrix<T>&, S6Params<T>*);

SSMTRACK_INSTANTIATE(float)
SSMTRACK_INSTANTIATE(double)
#undef SSMTRACK_INSTANTIATE

}  // namespace ssmtrack::ssm
