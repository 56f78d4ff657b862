// Copyright 2026 The ssmtrack Authors. Apache 2.0 License.
#pragma once
// Center-based box head over the fused search grid, auxiliary query readout,
// and the training losses for both.
//
//   fused  = search_RGB + search_TIR                      (G*G x D, row-major grid)
//   f1     = ReLU(BN1(conv3x3(fused)))
//   f2     = ReLU(BN2(conv3x3(f1)))
//   maps   = conv1x1(f2) -> [score_logit, offset_x, offset_y, size_w, size_h]
//
// BN is realized as a learned per-channel scale and shift (inference-mode batch norm).
#include <cstddef>
#include <string>

#include "ssmtrack/core/box.hpp"
#include "ssmtrack/core/random.hpp"
#include "ssmtrack/nn/ops.hpp"

namespace ssmtrack::track {

inline constexpr double kBoxEps = 1e-4;
inline constexpr std::size_t kHeadOutputs = 5;

template <typename T>
struct ChannelAffine {
  using value_type = T;
  Matrix<T> scale;  // 1 x C
  Matrix<T> shift;  // 1 x C

  ChannelAffine() = default;
  explicit ChannelAffine(std::size_t channels) : scale(1, channels, T(1)), shift(1, channels) {}

  template <class F>
  void visit(F&& f, const std::string& prefix) {
    f(prefix + "scale", scale);
    f(prefix + "shift", shift);
  }
  template <class F>
  void visit(F&& f, const std::string& prefix) const {
    f(prefix + "scale", scale);
    f(prefix + "shift", shift);
  }
};

template <typename T>
struct HeadParams {
  using value_type = T;
  std::size_t grid = 8;
  nn::Linear<T> conv1;  // 9*D -> C
  ChannelAffine<T> bn1;
  nn::Linear<T> conv2;  // 9*C -> C
  ChannelAffine<T> bn2;
  nn::Linear<T> out;  // C -> 5

  HeadParams() = default;
  HeadParams(std::size_t grid_side, std::size_t dim, std::size_t channels)
      : grid(grid_side), conv1(9 * dim, channels), bn1(channels), conv2(9 * channels, channels), bn2(channels),
        out(channels, kHeadOutputs) {}

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
    self.conv1.visit(f, prefix + "conv1.");
    self.bn1.visit(f, prefix + "bn1.");
    self.conv2.visit(f, prefix + "conv2.");
    self.bn2.visit(f, prefix + "bn2.");
    self.out.visit(f, prefix + "out.");
  }
};

template <typename T>
void init_head(HeadParams<T>& p, Rng& rng);

// 3x3 neighbourhoods with zero padding: (G*G) x (9*C), tap-major.
template <typename T>
Matrix<T> im2col3x3(const Matrix<T>& grid_features, std::size_t grid);
template <typename T>
void col2im3x3_add(const Matrix<T>& d_cols, std::size_t grid, Matrix<T>& d_grid);

template <typename T>
struct HeadCache {
  Matrix<T> cols1, pre1, act1, cols2, pre2, act2;
};

// Returns G*G x 5 raw maps.
template <typename T>
Matrix<T> head_forward(const Matrix<T>& fused, const HeadParams<T>& p, HeadCache<T>* cache = nullptr);

// Returns d fused; accumulates parameter gradients.
template <typename T>
Matrix<T> head_backward(const Matrix<T>& fused, const HeadParams<T>& p, const Matrix<T>& d_maps, HeadParams<T>* grad);

struct HeadOutput {
  std::size_t peak_cell = 0;
  Box box;  // normalized to the search crop
  double confidence = 0.0;
};

// Argmax of the score logits (lowest flat index on ties); center = cell center + offset
// (in cells), extent = sigmoid(size) of the crop, at least kBoxEps.
template <typename T>
HeadOutput decode_head(const Matrix<T>& maps, std::size_t grid);

template <typename T>
struct QueryReadout {
  using value_type = T;
  Matrix<T> weight;  // 4 x D
  Matrix<T> bias;    // 1 x 4

  QueryReadout() = default;
  explicit QueryReadout(std::size_t dim) : weight(4, dim), bias(1, 4) {}

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

// lo + alpha * sigmoid(w_k . q_k + b_k), lo = 0.5 - alpha / 2; (x_min, y_min, x_max, y_max).
template <typename T>
Box query_readout(const Matrix<T>& queries, const QueryReadout<T>& r, double alpha);

struct HeadLossWeights {
  double sigma_cells = 0.75;
  double l1_weight = 5.0;
};

template <typename T>
struct LossValue {
  double value = 0.0;
  Matrix<T> grad;  // same shape as the input it differentiates
};

// BCE against a Gaussian centered on the target plus weighted L1 on (cx, cy, w, h)
// at the target cell, all in crop-normalized units.
template <typename T>
LossValue<T> head_loss(const Matrix<T>& maps, std::size_t grid, const Box& target, const HeadLossWeights& w = {});

// Mean absolute error of the readout against the target box; gradient w.r.t. the queries
// is accumulated into d_queries and readout gradients into grad.
template <typename T>
double query_loss(const Matrix<T>& queries, const QueryReadout<T>& r, double alpha, const Box& target,
                  Matrix<T>* d_queries, QueryReadout<T>* grad);

}  // namespace ssmtrack::track
