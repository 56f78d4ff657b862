// Copyright 2026 The ssmtrack Authors. Apache 2.0 License.
#include "ssmtrack/encoder/mamba.hpp"

#include <cmath>

namespace ssmtrack::encoder {
namespace {

template <typename T>
Matrix<T> silu_grad_mul(const Matrix<T>& pre, const Matrix<T>& d) {
  Matrix<T> out(pre.rows(), pre.cols());
  for (std::size_t i = 0; i < pre.size(); ++i) out[i] = d[i] * nn::silu_grad(pre[i]);
  return out;
}

template <typename T>
Matrix<T> maybe_reverse(const Matrix<T>& m, Orientation o) {
  return o == Orientation::kBackward ? reverse_rows(m) : m;
}

// Intermediates of one orientation, all in scan order (reversed for backward).
template <typename T>
struct BranchCache {
  Matrix<T> u;     // conv input
  Matrix<T> conv;  // conv output (pre-SiLU)
  Matrix<T> act;   // SiLU(conv)
};

template <typename T>
Matrix<T> run_branch(const Matrix<T>& x, const nn::DepthwiseConv<T>& conv, const ssm::S6Params<T>& s6,
                     Orientation o, BranchCache<T>* cache) {
  BranchCache<T> c;
  c.u = maybe_reverse(x, o);
  c.conv = nn::causal_conv1d(c.u, conv);
  c.act = nn::map_silu(c.conv);
  Matrix<T> y = maybe_reverse(ssm::s6_forward(c.act, s6), o);
  if (cache != nullptr) *cache = std::move(c);
  return y;
}

// dy is in sequence order; returns dL/dx in sequence order.
template <typename T>
Matrix<T> branch_backward(const BranchCache<T>& c, const nn::DepthwiseConv<T>& conv, const ssm::S6Params<T>& s6,
                          Orientation o, const Matrix<T>& dy, nn::DepthwiseConv<T>* conv_grad,
                          ssm::S6Params<T>* s6_grad) {
  const Matrix<T> d_act = ssm::s6_backward(c.act, s6, maybe_reverse(dy, o), s6_grad);
  const Matrix<T> d_conv = silu_grad_mul(c.conv, d_act);
  Matrix<T> d_u(c.u.rows(), c.u.cols());
  nn::causal_conv1d_backward(c.u, conv, d_conv, &d_u, conv_grad);
  return maybe_reverse(d_u, o);
}

}  // namespace

template <typename T>
BlockParams<T>::BlockParams(const EncoderDims& dims)
    : rms_weight(1, dims.model, T(1)),
      up_z(dims.model, dims.inner),
      up_x(dims.model, dims.inner),
      conv_forward(dims.inner, dims.conv_width),
      conv_backward(dims.inner, dims.conv_width),
      s6_forward(dims.inner, dims.state),
      s6_backward(dims.inner, dims.state),
      down(dims.inner, dims.model) {}

template <typename T>
void init_block(BlockParams<T>& p, Rng& rng) {
  const double d = static_cast<double>(p.model_dim());
  const double di = static_cast<double>(p.inner_dim());
  p.rms_weight.fill(T(1));
  fill_truncated_normal(p.up_z.weight, rng, 1.0 / std::sqrt(d));
  fill_truncated_normal(p.up_x.weight, rng, 1.0 / std::sqrt(d));
  p.up_z.bias.fill(T(0));
  p.up_x.bias.fill(T(0));
  for (auto* conv : {&p.conv_forward, &p.conv_backward}) {
    fill_truncated_normal(conv->weight, rng, 1.0 / std::sqrt(static_cast<double>(conv->width())));
    conv->bias.fill(T(0));
  }
  ssm::init_s6(p.s6_forward, rng);
  ssm::init_s6(p.s6_backward, rng);
  fill_truncated_normal(p.down.weight, rng, 1.0 / std::sqrt(di));
  p.down.bias.fill(T(0));
}

template <typename T>
EncoderParams<T> init_params(std::uint64_t seed, const EncoderDims& dims) {
  require(dims.model >= 1 && dims.inner >= 1 && dims.state >= 1 && dims.conv_width >= 1,
          "init_params: dimensions must be positive");
  Rng rng(seed);
  EncoderParams<T> p{dims, {}};
  for (std::size_t l = 0; l < dims.layers; ++l) {
    BlockParams<T> b(dims);
    init_block(b, rng);
    p.layers.push_back(std::move(b));
  }
  return p;
}

template <typename T>
Matrix<T> oriented_scan(const Matrix<T>& u, const nn::DepthwiseConv<T>& conv, const ssm::S6Params<T>& s6,
                        Orientation o) {
  return run_branch<T>(u, conv, s6, o, nullptr);
}

template <typename T>
Matrix<T> mamba_block_forward(const Matrix<T>& seq, const BlockParams<T>& p) {
  require(seq.cols() == p.model_dim(), "mamba_block_forward: sequence width != model dimension");
  const Matrix<T> n = nn::rms_norm(seq, p.rms_weight, static_cast<T>(kRmsEps));
  const Matrix<T> z = nn::affine(n, p.up_z);
  const Matrix<T> x = nn::affine(n, p.up_x);
  Matrix<T> y = run_branch<T>(x, p.conv_forward, p.s6_forward, Orientation::kForward, nullptr);
  y += run_branch<T>(x, p.conv_backward, p.s6_backward, Orientation::kBackward, nullptr);
  const Matrix<T> gated = nn::hadamard(y, nn::map_silu(z));
  Matrix<T> out = nn::affine(gated, p.down);
  out += seq;
  return out;
}

template <typename T>
Matrix<T> mamba_block_backward(const Matrix<T>& seq, const BlockParams<T>& p, const Matrix<T>& d_out,
                               BlockParams<T>* grad) {
  require(d_out.same_shape(seq), "mamba_block_backward: d_out shape");
  const T eps = static_cast<T>(kRmsEps);
  const Matrix<T> n = nn::rms_norm(seq, p.rms_weight, eps);
  const Matrix<T> z = nn::affine(n, p.up_z);
  const Matrix<T> x = nn::affine(n, p.up_x);
  BranchCache<T> fwd, bwd;
  Matrix<T> y = run_branch(x, p.conv_forward, p.s6_forward, Orientation::kForward, &fwd);
  y += run_branch(x, p.conv_backward, p.s6_backward, Orientation::kBackward, &bwd);
  const Matrix<T> gate = nn::map_silu(z);
  const Matrix<T> gated = nn::hadamard(y, gate);

  Matrix<T> d_gated(gated.rows(), gated.cols());
  nn::affine_backward(gated, p.down, d_out, &d_gated, grad ? &grad->down : nullptr);

  const Matrix<T> d_y = nn::hadamard(d_gated, gate);
  const Matrix<T> d_z = silu_grad_mul(z, nn::hadamard(d_gated, y));

  Matrix<T> d_x = branch_backward(fwd, p.conv_forward, p.s6_forward, Orientation::kForward, d_y,
                                  grad ? &grad->conv_forward : nullptr, grad ? &grad->s6_forward : nullptr);
  d_x += branch_backward(bwd, p.conv_backward, p.s6_backward, Orientation::kBackward, d_y,
                         grad ? &grad->conv_backward : nullptr, grad ? &grad->s6_backward : nullptr);

  Matrix<T> d_n(n.rows(), n.cols());
  nn::affine_backward(n, p.up_z, d_z, &d_n, grad ? &grad->up_z : nullptr);
  nn::affine_backward(n, p.up_x, d_x, &d_n, grad ? &grad->up_x : nullptr);

  Matrix<T> d_seq = d_out;
  nn::rms_norm_backward(seq, p.rms_weight, eps, d_n, &d_seq, grad ? &grad->rms_weight : nullptr);
  return d_seq;
}

template <typename T>
Matrix<T> encoder_forward(const Matrix<T>& seq, const EncoderParams<T>& p) {
  Matrix<T> v = seq;
  for (const auto& layer : p.layers) v = mamba_block_forward(v, layer);
  return v;
}

template <typename T>
Matrix<T> encoder_backward(const Matrix<T>& seq, const EncoderParams<T>& p, const Matrix<T>& d_out,
                           EncoderParams<T>* grad) {
  std::vector<Matrix<T>> inputs;
  inputs.reserve(p.layers.size());
  Matrix<T> v = seq;
  for (const auto& layer : p.layers) {
    inputs.push_back(v);
    v = mamba_block_forward(v, layer);
  }
  Matrix<T> d = d_out;
  for (std::size_t l = p.layers.size(); l-- > 0;) {
    d = mamba_block_backward(inputs[l], p.layers[l], d, grad ? &grad->layers[l] : nullptr);
  }
  return d;
}

#define SSMTRACK_INSTANTIATE(T)                                                                           \
  template struct BlockParams<T>;                                                                         \
  template void init_block(BlockParams<T>&, Rng&);                                                        \
  template EncoderParams<T> init_params(std::uint64_t, const EncoderDims&);                              \
  template Matrix<T> oriented_scan(const Matrix<T>&, const nn::DepthwiseConv<T>&, const ssm::S6Params<T>&, \
                                   Orientation);                                                          \
  template Matrix<T> mamba_block_forward(const Matrix<T>&, const BlockParams<T>&);                        \
  template Matrix<T> mamba_block_backward(const Matrix<T>&, const BlockParams<T>&, const Matrix<T>&,      \
                                          BlockParams<T>*);                                               \
  template Matrix<T> encoder_forward(const Matrix<T>&, const EncoderParams<T>&);                          \
  template Matrix<T> encoder_backward(const Matrix<T>&, const EncoderParams<T>&, const Matrix<T>&,        \
                                      EncoderParams<T>*);

SSMTRACK_INSTANTIATE(float)
SSMTRACK_INSTANTIATE(double)
#undef SSMTRACK_INSTANTIATE

}  // namespace ssmtrack::encoder
