// Copyright 2026 The ssmtrack Authors. Apache 2.0 License.
#pragma once

// Bidirectional Mamba encoder block:
//
//   n      = RMSNorm(v)
//   z, x   = up_z(n), up_x(n)
//   y_o    = S6_o(SiLU(conv_o(x)))            o in {forward, backward}
//   out    = v + down((y_fwd + y_bwd) * SiLU(z))
//
// The backward orientation runs the forward machinery on the row-reversed
// sequence and reverses the result.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "ssmtrack/nn/ops.hpp"
#include "ssmtrack/ssm/s6.hpp"

namespace ssmtrack::encoder {

inline constexpr double kRmsEps = 1e-5;

struct EncoderDims {
  std::size_t model = 16;      // D
  std::size_t inner = 32;      // D_inner = expansion * D
  std::size_t state = 4;       // N
  std::size_t conv_width = 4;  // w
  std::size_t layers = 2;

  static EncoderDims with_expansion(std::size_t model, std::size_t state, std::size_t layers,
                                    std::size_t expansion = 2, std::size_t conv_width = 4) {
    return EncoderDims{model, model * expansion, state, conv_width, layers};
  }
};

enum class Orientation { kForward, kBackward };

template <typename T>
struct BlockParams {
  using value_type = T;
  Matrix<T> rms_weight;  // 1 x D
  nn::Linear<T> up_z;
  nn::Linear<T> up_x;
  nn::DepthwiseConv<T> conv_forward;
  nn::DepthwiseConv<T> conv_backward;
  ssm::S6Params<T> s6_forward;
  ssm::S6Params<T> s6_backward;
  nn::Linear<T> down;

  BlockParams() = default;
  explicit BlockParams(const EncoderDims& dims);

  std::size_t model_dim() const { return rms_weight.cols(); }
  std::size_t inner_dim() const { return up_x.out_features(); }

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
    f(prefix + "rms_weight", self.rms_weight);
    self.up_z.visit(f, prefix + "up_z.");
    self.up_x.visit(f, prefix + "up_x.");
    self.conv_forward.visit(f, prefix + "conv_fwd.");
    self.conv_backward.visit(f, prefix + "conv_bwd.");
    self.s6_forward.visit(f, prefix + "s6_fwd.");
    self.s6_backward.visit(f, prefix + "s6_bwd.");
    self.down.visit(f, prefix + "down.");
  }
};

template <typename T>
struct EncoderParams {
  using value_type = T;
  EncoderDims dims;
  std::vector<BlockParams<T>> layers;

  template <class F>
  void visit(F&& f, const std::string& prefix) {
    for (std::size_t i = 0; i < layers.size(); ++i) layers[i].visit(f, prefix + "layers." + std::to_string(i) + ".");
  }
  template <class F>
  void visit(F&& f, const std::string& prefix) const {
    for (std::size_t i = 0; i < layers.size(); ++i) layers[i].visit(f, prefix + "layers." + std::to_string(i) + ".");
  }
};

template <typename T>
void init_block(BlockParams<T>& p, Rng& rng);

// Deterministic in the seed.
template <typename T>
EncoderParams<T> init_params(std::uint64_t seed, const EncoderDims& dims);

// SiLU(conv) followed by the selective scan for one orientation; `u` is in sequence order.
template <typename T>
Matrix<T> oriented_scan(const Matrix<T>& u, const nn::DepthwiseConv<T>& conv, const ssm::S6Params<T>& s6,
                        Orientation o);

template <typename T>
Matrix<T> mamba_block_forward(const Matrix<T>& seq, const BlockParams<T>& p);

// Returns dL/dseq; accumulates parameter gradients into grad when non-null.
template <typename T>
Matrix<T> mamba_block_backward(const Matrix<T>& seq, const BlockParams<T>& p, const Matrix<T>& d_out,
                               BlockParams<T>* grad);

template <typename T>
Matrix<T> encoder_forward(const Matrix<T>& seq, const EncoderParams<T>& p);

template <typename T>
Matrix<T> encoder_backward(const Matrix<T>& seq, const EncoderParams<T>& p, const Matrix<T>& d_out,
                           EncoderParams<T>* grad);

}  // namespace ssmtrack::encoder
