// Copyright 2026 The ssmtrack Authors. Apache 2.0 License.
#include "ssmtrack/embed/coords.hpp"

#include <cmath>
#include <numbers>

namespace ssmtrack::embed {

namespace {

void check_crop(const CropTransform& crop) {
  if (!(crop.side > 0.0) || !std::isfinite(crop.side)) {
    throw DomainError("search crop has non-positive side " + std::to_string(crop.side));
  }
}

void check_vocab_args(int nbins, double alpha) {
  require(nbins >= 2, "coordinate vocabulary needs nbins >= 2");
  require(alpha >= 1.0, "coordinate vocabulary needs alpha >= 1");
}

}  // namespace

Box map_to_search_coords(const Box& abs, const CropTransform& crop) {
  check_crop(crop);
  const double s = crop.side;
  return {(abs.x_min - crop.origin_x) / s, (abs.y_min - crop.origin_y) / s, (abs.x_max - crop.origin_x) / s,
          (abs.y_max - crop.origin_y) / s};
}

Box map_from_search_coords(const Box& norm, const CropTransform& crop) {
  check_crop(crop);
  const double s = crop.side;
  return {crop.origin_x + norm.x_min * s, crop.origin_y + norm.y_min * s, crop.origin_x + norm.x_max * s,
          crop.origin_y + norm.y_max * s};
}

int discretize_coordinate(double c, int nbins, double alpha) {
  check_vocab_args(nbins, alpha);
  const double lo = 0.5 - 0.5 * alpha;
  double u = (c - lo) / alpha;
  if (std::isnan(u)) return 1;
  u = std::clamp(u, 0.0, 1.0);
  const double bin = std::floor(u * nbins) + 1.0;
  return bin >= nbins ? nbins : static_cast<int>(bin);
}

double dediscretize(int bin, int nbins, double alpha) {
  check_vocab_args(nbins, alpha);
  if (bin < 1 || bin > nbins) {
    throw ContractError("dediscretize: bin " + std::to_string(bin) + " outside [1, " + std::to_string(nbins) + "]");
  }
  const double lo = 0.5 - 0.5 * alpha;
  return lo + alpha * (static_cast<double>(bin) - 0.5) / nbins;
}

template <typename T>
CoordVocabulary<T>::CoordVocabulary(int bins, double dilation, std::size_t trajectory, std::size_t dim)
    : nbins(bins), alpha(dilation), table(static_cast<std::size_t>(bins), dim), slot_offsets(4 * trajectory, dim),
      query_init(4, dim) {
  check_vocab_args(bins, dilation);
}

template <typename T>
void init_vocabulary(CoordVocabulary<T>& v, Rng& rng, VocabInit table_init) {
  fill_truncated_normal(v.slot_offsets, rng, 0.02);
  fill_truncated_normal(v.query_init, rng, 0.02);
  v.table.fill(T(0));
  if (table_init == VocabInit::kZero) return;
  const std::size_t dim = v.dim();
  for (int b = 1; b <= v.nbins; ++b) {
    const double u = (static_cast<double>(b) - 0.5) / v.nbins;
    auto row = v.table.row(static_cast<std::size_t>(b - 1));
    for (std::size_t j = 0; j + 1 < dim; j += 2) {
      const double w = std::numbers::pi * static_cast<double>(j / 2 + 1);
      row[j] = static_cast<T>(0.5 * std::sin(w * u));
      row[j + 1] = static_cast<T>(0.5 * std::cos(w * u));
    }
  }
}

template <typename T>
PromptTokens<T> embed_prompts(const std::vector<Box>& boxes, const CoordVocabulary<T>& vocab) {
  const std::size_t traj = vocab.trajectory();
  if (boxes.size() != traj) {
    throw ContractError("embed_prompts: expected " + std::to_string(traj) + " boxes, got " +
                        std::to_string(boxes.size()));
  }
  const std::size_t dim = vocab.dim();
  PromptTokens<T> out{Matrix<T>(4 * traj, dim), vocab.query_init, {}};
  out.bins.reserve(4 * traj);
  for (std::size_t k = 0; k < traj; ++k) {
    const double coords[4] = {boxes[k].x_min, boxes[k].y_min, boxes[k].x_max, boxes[k].y_max};
    for (std::size_t j = 0; j < 4; ++j) {
      const std::size_t slot = 4 * k + j;
      const int bin = discretize_coordinate(coords[j], vocab.nbins, vocab.alpha);
      out.bins.push_back(bin);
      auto dst = out.coord.row(slot);
      auto emb = vocab.table.row(static_cast<std::size_t>(bin - 1));
      auto off = vocab.slot_offsets.row(slot);
      for (std::size_t c = 0; c < dim; ++c) dst[c] = emb[c] + off[c];
    }
  }
  return out;
}

template <typename T>
void embed_prompts_backward(const PromptTokens<T>& fwd, const Matrix<T>& d_coord, const Matrix<T>& d_query,
                            CoordVocabulary<T>* grad) {
  if (grad == nullptr) return;
  require(d_coord.same_shape(fwd.coord) && d_query.same_shape(fwd.query), "embed_prompts_backward: shape");
  const std::size_t dim = d_coord.cols();
  for (std::size_t slot = 0; slot < fwd.bins.size(); ++slot) {
    auto g = d_coord.row(slot);
    auto trow = grad->table.row(static_cast<std::size_t>(fwd.bins[slot] - 1));
    auto orow = grad->slot_offsets.row(slot);
    for (std::size_t c = 0; c < dim; ++c) {
      trow[c] += g[c];
      orow[c] += g[c];
    }
  }
  grad->query_init += d_query;
}

#define SSMTRACK_INSTANTIATE(T)                                                                              \
  template struct CoordVocabulary<T>;                                                                        \
  template void init_vocabulary(CoordVocabulary<T>&, Rng&, VocabInit);                                       \
  template PromptTokens<T> embed_prompts(const std::vector<Box>&, const CoordVocabulary<T>&);                \
  template void embed_prompts_backward(const PromptTokens<T>&, const Matrix<T>&, const Matrix<T>&,           \
                                       CoordVocabulary<T>*);

SSMTRACK_INSTANTIATE(float)
SSMTRACK_INSTANTIATE(double)
#undef SSMTRACK_INSTANTIATE

}  // namespace ssmtrack::embed
