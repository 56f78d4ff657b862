// Copyright 2026 The ssmtrack Authors. Apache 2.0 License.
#pragma once
// Trajectory prompts: boxes expressed in the current search crop, binned into
// a dilated vocabulary and looked up as tokens.
#include <cstddef>
#include <string>
#include <vector>

#include "ssmtrack/core/box.hpp"
#include "ssmtrack/core/random.hpp"
#include "ssmtrack/core/tensor.hpp"

namespace ssmtrack::embed {

inline constexpr int kDefaultBins = 400;
inline constexpr double kDefaultDilation = 2.0;

// Square search window in absolute pixels: normalized = (abs - origin) / side.
struct CropTransform {
  double origin_x = 0.0;
  double origin_y = 0.0;
  double side = 1.0;
  // Pixels of the window lying outside the frame (filled by edge replication).
  double pad_left = 0.0, pad_top = 0.0, pad_right = 0.0, pad_bottom = 0.0;

  bool operator==(const CropTransform&) const = default;
};

// Throws DomainError when side <= 0. No clamping.
Box map_to_search_coords(const Box& abs, const CropTransform& crop);
Box map_from_search_coords(const Box& norm, const CropTransform& crop);

// Dilated range [0.5 - alpha/2, 0.5 + alpha/2] split into nbins equal bins numbered from 1.
// Out-of-range and non-finite inputs clamp (NaN maps to bin 1).
int discretize_coordinate(double c, int nbins, double alpha);
// Center of `bin`; ContractError when bin is outside [1, nbins].
double dediscretize(int bin, int nbins, double alpha);

template <typename T>
struct CoordVocabulary {
  using value_type = T;

  int nbins = kDefaultBins;
  double alpha = kDefaultDilation;
  Matrix<T> table;         // nbins x D, row b-1 is bin b
  Matrix<T> slot_offsets;  // 4*trajectory x D
  Matrix<T> query_init;    // 4 x D

  CoordVocabulary() = default;
  CoordVocabulary(int bins, double dilation, std::size_t trajectory, std::size_t dim);

  std::size_t trajectory() const { return slot_offsets.rows() / 4; }
  std::size_t dim() const { return table.cols(); }

  template <class F>
  void visit(F&& f, const std::string& prefix) {
    f(prefix + "table", table);
    f(prefix + "slot_offsets", slot_offsets);
    f(prefix + "query_init", query_init);
  }
  template <class F>
  void visit(F&& f, const std::string& prefix) const {
    f(prefix + "table", table);
    f(prefix + "slot_offsets", slot_offsets);
    f(prefix + "query_init", query_init);
  }
};

enum class VocabInit { kSinusoidal, kZero };

// Sinusoidal rows are a smooth function of the bin center, so neighbouring bins start close.
template <typename T>
void init_vocabulary(CoordVocabulary<T>& v, Rng& rng, VocabInit table_init = VocabInit::kSinusoidal);

template <typename T>
struct PromptTokens {
  Matrix<T> coord;        // 4*trajectory x D, order (x_min, y_min, x_max, y_max) per box, oldest box first
  Matrix<T> query;        // 4 x D
  std::vector<int> bins;  // one per coord token
};

// Exactly vocab.trajectory() boxes, already normalized to the current search crop.
template <typename T>
PromptTokens<T> embed_prompts(const std::vector<Box>& boxes, const CoordVocabulary<T>& vocab);

template <typename T>
void embed_prompts_backward(const PromptTokens<T>& fwd, const Matrix<T>& d_coord, const Matrix<T>& d_query,
                            CoordVocabulary<T>* grad);

}  // namespace ssmtrack::embed
