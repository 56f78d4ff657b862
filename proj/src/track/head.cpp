// Copyright 2026 The ssmtrack Authors. Apache 2.0 License.
#include "ssmtrack/track/head.hpp"

#include <algorithm>
#include <cmath>

namespace ssmtrack::track {

namespace {

template <typename T>
Matrix<T> affine_relu(const Matrix<T>& pre, const ChannelAffine<T>& bn) {
  Matrix<T> out(pre.rows(), pre.cols());
  for (std::size_t r = 0; r < pre.rows(); ++r) {
    for (std::size_t c = 0; c < pre.cols(); ++c) {
      const T z = pre(r, c) * bn.scale[c] + bn.shift[c];
      out(r, c) = z > T(0) ? z : T(0);
    }
  }
  return out;
}

// d pre from d act; accumulates scale/shift gradients.
template <typename T>
Matrix<T> affine_relu_backward(const Matrix<T>& pre, const Matrix<T>& act, const ChannelAffine<T>& bn,
                               const Matrix<T>& d_act, ChannelAffine<T>* grad) {
  Matrix<T> d_pre(pre.rows(), pre.cols());
  for (std::size_t r = 0; r < pre.rows(); ++r) {
    for (std::size_t c = 0; c < pre.cols(); ++c) {
      if (act(r, c) <= T(0)) continue;
      const T g = d_act(r, c);
      d_pre(r, c) = g * bn.scale[c];
      if (grad != nullptr) {
        grad->scale[c] += g * pre(r, c);
        grad->shift[c] += g;
      }
    }
  }
  return d_pre;
}

inline double sigmoid_d(double z) { return nn::sigmoid(z); }

}  // namespace

template <typename T>
void init_head(HeadParams<T>& p, Rng& rng) {
  fill_truncated_normal(p.conv1.weight, rng, std::sqrt(2.0 / static_cast<double>(p.conv1.in_features())));
  fill_truncated_normal(p.conv2.weight, rng, std::sqrt(2.0 / static_cast<double>(p.conv2.in_features())));
  fill_truncated_normal(p.out.weight, rng, 0.01);
  for (auto* lin : {&p.conv1, &p.conv2, &p.out}) lin->bias.fill(T(0));
  p.bn1 = ChannelAffine<T>(p.conv1.out_features());
  p.bn2 = ChannelAffine<T>(p.conv2.out_features());
}

template <typename T>
Matrix<T> im2col3x3(const Matrix<T>& x, std::size_t grid) {
  require(x.rows() == grid * grid, "im2col3x3: feature rows must equal grid*grid");
  const std::size_t ch = x.cols();
  Matrix<T> cols(x.rows(), 9 * ch);
  for (std::size_t r = 0; r < grid; ++r) {
    for (std::size_t c = 0; c < grid; ++c) {
      T* dst = cols.row(r * grid + c).data();
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx, dst += ch) {
          const long rr = static_cast<long>(r) + dy;
          const long cc = static_cast<long>(c) + dx;
          if (rr < 0 || cc < 0 || rr >= static_cast<long>(grid) || cc >= static_cast<long>(grid)) continue;
          const auto src = x.row(static_cast<std::size_t>(rr) * grid + static_cast<std::size_t>(cc));
          std::copy(src.begin(), src.end(), dst);
        }
      }
    }
  }
  return cols;
}

template <typename T>
void col2im3x3_add(const Matrix<T>& d_cols, std::size_t grid, Matrix<T>& d_grid) {
  const std::size_t ch = d_grid.cols();
  require(d_cols.rows() == grid * grid && d_cols.cols() == 9 * ch && d_grid.rows() == grid * grid,
          "col2im3x3_add: shape mismatch");
  for (std::size_t r = 0; r < grid; ++r) {
    for (std::size_t c = 0; c < grid; ++c) {
      const T* src = d_cols.row(r * grid + c).data();
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx, src += ch) {
          const long rr = static_cast<long>(r) + dy;
          const long cc = static_cast<long>(c) + dx;
          if (rr < 0 || cc < 0 || rr >= static_cast<long>(grid) || cc >= static_cast<long>(grid)) continue;
          T* dst = d_grid.row(static_cast<std::size_t>(rr) * grid + static_cast<std::size_t>(cc)).data();
          for (std::size_t k = 0; k < ch; ++k) dst[k] += src[k];
        }
      }
    }
  }
}

template <typename T>
Matrix<T> head_forward(const Matrix<T>& fused, const HeadParams<T>& p, HeadCache<T>* cache) {
  HeadCache<T> local;
  HeadCache<T>& c = cache != nullptr ? *cache : local;
  c.cols1 = im2col3x3(fused, p.grid);
  c.pre1 = nn::affine(c.cols1, p.conv1);
  c.act1 = affine_relu(c.pre1, p.bn1);
  c.cols2 = im2col3x3(c.act1, p.grid);
  c.pre2 = nn::affine(c.cols2, p.conv2);
  c.act2 = affine_relu(c.pre2, p.bn2);
  return nn::affine(c.act2, p.out);
}

template <typename T>
Matrix<T> head_backward(const Matrix<T>& fused, const HeadParams<T>& p, const Matrix<T>& d_maps,
                        HeadParams<T>* grad) {
  HeadCache<T> c;
  head_forward(fused, p, &c);
  Matrix<T> d_act2(c.act2.rows(), c.act2.cols());
  nn::affine_backward(c.act2, p.out, d_maps, &d_act2, grad ? &grad->out : nullptr);
  const Matrix<T> d_pre2 = affine_relu_backward(c.pre2, c.act2, p.bn2, d_act2, grad ? &grad->bn2 : nullptr);
  Matrix<T> d_cols2(c.cols2.rows(), c.cols2.cols());
  nn::affine_backward(c.cols2, p.conv2, d_pre2, &d_cols2, grad ? &grad->conv2 : nullptr);
  Matrix<T> d_act1(c.act1.rows(), c.act1.cols());
  col2im3x3_add(d_cols2, p.grid, d_act1);
  const Matrix<T> d_pre1 = affine_relu_backward(c.pre1, c.act1, p.bn1, d_act1, grad ? &grad->bn1 : nullptr);
  Matrix<T> d_cols1(c.cols1.rows(), c.cols1.cols());
  nn::affine_backward(c.cols1, p.conv1, d_pre1, &d_cols1, grad ? &grad->conv1 : nullptr);
  Matrix<T> d_fused(fused.rows(), fused.cols());
  col2im3x3_add(d_cols1, p.grid, d_fused);
  return d_fused;
}

template <typename T>
HeadOutput decode_head(const Matrix<T>& maps, std::size_t grid) {
  require(maps.rows() == grid * grid && maps.cols() == kHeadOutputs, "decode_head: maps must be G*G x 5");
  std::size_t peak = 0;
  for (std::size_t i = 1; i < maps.rows(); ++i) {
    if (maps(i, 0) > maps(peak, 0)) peak = i;
  }
  const double g = static_cast<double>(grid);
  const double cx = (static_cast<double>(peak % grid) + 0.5 + static_cast<double>(maps(peak, 1))) / g;
  const double cy = (static_cast<double>(peak / grid) + 0.5 + static_cast<double>(maps(peak, 2))) / g;
  const double w = std::max(sigmoid_d(static_cast<double>(maps(peak, 3))), kBoxEps);
  const double h = std::max(sigmoid_d(static_cast<double>(maps(peak, 4))), kBoxEps);
  HeadOutput out;
  out.peak_cell = peak;
  out.box = Box::from_center(cx, cy, w, h);
  out.confidence = sigmoid_d(static_cast<double>(maps(peak, 0)));
  return out;
}

template <typename T>
Box query_readout(const Matrix<T>& queries, const QueryReadout<T>& r, double alpha) {
  require(queries.rows() == 4 && queries.cols() == r.weight.cols(), "query_readout: expected 4 x D queries");
  const double lo = 0.5 - 0.5 * alpha;
  double v[4];
  for (std::size_t k = 0; k < 4; ++k) {
    double z = static_cast<double>(r.bias[k]);
    for (std::size_t c = 0; c < queries.cols(); ++c) z += static_cast<double>(r.weight(k, c) * queries(k, c));
    v[k] = lo + alpha * sigmoid_d(z);
  }
  return {v[0], v[1], v[2], v[3]};
}

template <typename T>
LossValue<T> head_loss(const Matrix<T>& maps, std::size_t grid, const Box& target, const HeadLossWeights& w) {
  require(maps.rows() == grid * grid && maps.cols() == kHeadOutputs, "head_loss: maps must be G*G x 5");
  const double g = static_cast<double>(grid);
  const double n = g * g;
  const double tcx = target.center_x() * g;
  const double tcy = target.center_y() * g;
  LossValue<T> out{0.0, Matrix<T>(maps.rows(), maps.cols())};
  const double inv_two_var = 1.0 / (2.0 * w.sigma_cells * w.sigma_cells);
  for (std::size_t i = 0; i < maps.rows(); ++i) {
    const double dx = static_cast<double>(i % grid) + 0.5 - tcx;
    const double dy = static_cast<double>(i / grid) + 0.5 - tcy;
    const double y = std::exp(-(dx * dx + dy * dy) * inv_two_var);
    const double s = static_cast<double>(maps(i, 0));
    out.value += (nn::softplus(s) - y * s) / n;
    out.grad(i, 0) = static_cast<T>((sigmoid_d(s) - y) / n);
  }
  const auto cell_of = [grid](double v) {
    return static_cast<std::size_t>(std::clamp(std::floor(v), 0.0, static_cast<double>(grid - 1)));
  };
  const std::size_t cell = cell_of(tcy) * grid + cell_of(tcx);
  const double pw = sigmoid_d(static_cast<double>(maps(cell, 3)));
  const double ph = sigmoid_d(static_cast<double>(maps(cell, 4)));
  const double pred[4] = {(static_cast<double>(cell % grid) + 0.5 + static_cast<double>(maps(cell, 1))) / g,
                          (static_cast<double>(cell / grid) + 0.5 + static_cast<double>(maps(cell, 2))) / g, pw, ph};
  const double goal[4] = {target.center_x(), target.center_y(), target.width(), target.height()};
  const double dpred_draw[4] = {1.0 / g, 1.0 / g, pw * (1.0 - pw), ph * (1.0 - ph)};
  const double scale = w.l1_weight / 4.0;
  for (std::size_t k = 0; k < 4; ++k) {
    const double diff = pred[k] - goal[k];
    out.value += scale * std::abs(diff);
    const double sgn = diff > 0 ? 1.0 : (diff < 0 ? -1.0 : 0.0);
    out.grad(cell, k + 1) += static_cast<T>(scale * sgn * dpred_draw[k]);
  }
  return out;
}

template <typename T>
double query_loss(const Matrix<T>& queries, const QueryReadout<T>& r, double alpha, const Box& target,
                  Matrix<T>* d_queries, QueryReadout<T>* grad) {
  require(queries.rows() == 4 && queries.cols() == r.weight.cols(), "query_loss: expected 4 x D queries");
  const double lo = 0.5 - 0.5 * alpha;
  const double goal[4] = {target.x_min, target.y_min, target.x_max, target.y_max};
  double loss = 0.0;
  for (std::size_t k = 0; k < 4; ++k) {
    double z = static_cast<double>(r.bias[k]);
    for (std::size_t c = 0; c < queries.cols(); ++c) z += static_cast<double>(r.weight(k, c) * queries(k, c));
    const double s = sigmoid_d(z);
    const double diff = lo + alpha * s - goal[k];
    loss += 0.25 * std::abs(diff);
    const double sgn = diff > 0 ? 1.0 : (diff < 0 ? -1.0 : 0.0);
    const double dz = 0.25 * sgn * alpha * s * (1.0 - s);
    if (dz == 0.0) continue;
    for (std::size_t c = 0; c < queries.cols(); ++c) {
      if (d_queries != nullptr) (*d_queries)(k, c) += static_cast<T>(dz * r.weight(k, c));
      if (grad != nullptr) grad->weight(k, c) += static_cast<T>(dz * queries(k, c));
    }
    if (grad != nullptr) grad->bias[k] += static_cast<T>(dz);
  }
  return loss;
}

#define SSMTRACK_INSTANTIATE(T)                                                                             \
  template void init_head(HeadParams<T>&, Rng&);                                                            \
  template Matrix<T> im2col3x3(const Matrix<T>&, std::size_t);                                              \
  template void col2im3x3_add(const Matrix<T>&, std::size_t, Matrix<T>&);                                   \
  template Matrix<T> head_forward(const Matrix<T>&, const HeadParams<T>&, HeadCache<T>*);                   \
  template Matrix<T> head_backward(const Matrix<T>&, const HeadParams<T>&, const Matrix<T>&, HeadParams<T>*); \
  template HeadOutput decode_head(const Matrix<T>&, std::size_t);                                           \
  template Box query_readout(const Matrix<T>&, const QueryReadout<T>&, double);                             \
  template LossValue<T> head_loss(const Matrix<T>&, std::size_t, const Box&, const HeadLossWeights&);       \
  template double query_loss(const Matrix<T>&, const QueryReadout<T>&, double, const Box&, Matrix<T>*,      \
                             QueryReadout<T>*);

SSMTRACK_INSTANTIATE(float)
SSMTRACK_INSTANTIATE(double)
#undef SSMTRACK_INSTANTIATE

}  // namespace ssmtrack::track
