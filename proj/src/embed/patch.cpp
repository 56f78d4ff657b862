// Copyright 2026 The ssmtrack Authors. Apache 2.0 License.
#include "ssmtrack/embed/patch.hpp"

#include <cmath>
#include <vector>

namespace ssmtrack::embed {

namespace {

template <typename T>
void gather_patch(const Image& image, std::size_t patch, std::size_t gy, std::size_t gx, std::vector<T>& out) {
  std::size_t i = 0;
  for (std::size_t c = 0; c < image.channels; ++c) {
    for (std::size_t dy = 0; dy < patch; ++dy) {
      const float* src = &image.data[(c * image.height + gy * patch + dy) * image.width + gx * patch];
      for (std::size_t dx = 0; dx < patch; ++dx) out[i++] = static_cast<T>(src[dx]);
    }
  }
}

template <typename T>
Matrix<T> flatten_patches(const Image& image, const PatchEmbedParams<T>& p) {
  require(image.channels == p.channels, "patch_embed: channel count mismatch");
  const GridShape g = patch_grid(image.height, image.width, p.patch_size);
  const std::size_t flat = p.proj.in_features();
  Matrix<T> patches(g.tokens(), flat);
  std::vector<T> buf(flat);
  for (std::size_t gy = 0; gy < g.rows; ++gy) {
    for (std::size_t gx = 0; gx < g.cols; ++gx) {
      gather_patch(image, p.patch_size, gy, gx, buf);
      std::copy(buf.begin(), buf.end(), patches.row(gy * g.cols + gx).begin());
    }
  }
  return patches;
}

}  // namespace

GridShape patch_grid(std::size_t height, std::size_t width, std::size_t patch) {
  require(patch > 0, "patch_grid: patch size must be positive");
  if (height == 0 || width == 0 || height % patch != 0 || width % patch != 0) {
    throw ContractError("patch_grid: image " + std::to_string(height) + "x" + std::to_string(width) +
                        " not divisible by patch " + std::to_string(patch));
  }
  return {height / patch, width / patch};
}

template <typename T>
Matrix<T> patch_embed(const Image& image, const PatchEmbedParams<T>& p) {
  return nn::affine(flatten_patches(image, p), p.proj);
}

template <typename T>
void patch_embed_backward(const Image& image, const PatchEmbedParams<T>& p, const Matrix<T>& d_tokens,
                          PatchEmbedParams<T>* grad) {
  if (grad == nullptr) return;
  nn::affine_backward(flatten_patches(image, p), p.proj, d_tokens, static_cast<Matrix<T>*>(nullptr), &grad->proj);
}

template <typename T>
void init_patch_embed(PatchEmbedParams<T>& p, Rng& rng) {
  fill_truncated_normal(p.proj.weight, rng, 1.0 / std::sqrt(static_cast<double>(p.proj.in_features())));
  p.proj.bias.fill(T(0));
}

template <typename T>
Matrix<T> add_positional(const Matrix<T>& tokens, const Matrix<T>& table) {
  if (!tokens.same_shape(table)) {
    throw ContractError("add_positional: tokens " + shape_string(tokens) + " vs table " + shape_string(table));
  }
  Matrix<T> out = tokens;
  out += table;
  return out;
}

template <typename T>
void init_positional(PositionalEncodings<T>& p, Rng& rng) {
  fill_truncated_normal(p.template_table, rng, 0.02);
  fill_truncated_normal(p.search_table, rng, 0.02);
}

#define SSMTRACK_INSTANTIATE(T)                                                                   \
  template Matrix<T> patch_embed(const Image&, const PatchEmbedParams<T>&);                       \
  template void patch_embed_backward(const Image&, const PatchEmbedParams<T>&, const Matrix<T>&, \
                                     PatchEmbedParams<T>*);                                      \
  template void init_patch_embed(PatchEmbedParams<T>&, Rng&);                                     \
  template Matrix<T> add_positional(const Matrix<T>&, const Matrix<T>&);                          \
  template void init_positional(PositionalEncodings<T>&, Rng&);

SSMTRACK_INSTANTIATE(float)
SSMTRACK_INSTANTIATE(double)
#undef SSMTRACK_INSTANTIATE

}  // namespace ssmtrack::embed
