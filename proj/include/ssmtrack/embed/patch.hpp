// Copyright 2026 The ssmtrack Authors. Apache 2.0 License.
#pragma once
// Non-overlapping P x P patch tokenizer and additive positional tables.
#include <cstddef>
#include <string>

#include "ssmtrack/core/image.hpp"
#include "ssmtrack/core/random.hpp"
#include "ssmtrack/nn/ops.hpp"

namespace ssmtrack::embed {

// Flattened patch layout is (channel, dy, dx), matching a strided P x P convolution.
template <typename T>
struct PatchEmbedParams {
  using value_type = T;

  std::size_t patch_size = 16;
  std::size_t channels = 3;
  nn::Linear<T> proj;  // P*P*channels -> D

  PatchEmbedParams() = default;
  PatchEmbedParams(std::size_t patch, std::size_t chans, std::size_t dim)
      : patch_size(patch), channels(chans), proj(patch * patch * chans, dim) {}

  std::size_t dim() const { return proj.out_features(); }

  template <class F>
  void visit(F&& f, const std::string& prefix) {
    proj.visit(f, prefix + "proj.");
  }
  template <class F>
  void visit(F&& f, const std::string& prefix) const {
    proj.visit(f, prefix + "proj.");
  }
};

struct GridShape {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t tokens() const { return rows * cols; }
};

GridShape patch_grid(std::size_t height, std::size_t width, std::size_t patch);

// Row-major grid of (H/P)*(W/P) tokens.
template <typename T>
Matrix<T> patch_embed(const Image& image, const PatchEmbedParams<T>& p);

// Parameter gradients only; images are leaves.
template <typename T>
void patch_embed_backward(const Image& image, const PatchEmbedParams<T>& p, const Matrix<T>& d_tokens,
                          PatchEmbedParams<T>* grad);

template <typename T>
void init_patch_embed(PatchEmbedParams<T>& p, Rng& rng);

template <typename T>
struct PositionalEncodings {
  using value_type = T;

  Matrix<T> template_table;  // L_z x D, shared by every template frame and both modalities
  Matrix<T> search_table;    // L_x x D

  PositionalEncodings() = default;
  PositionalEncodings(std::size_t template_tokens, std::size_t search_tokens, std::size_t dim)
      : template_table(template_tokens, dim), search_table(search_tokens, dim) {}

  template <class F>
  void visit(F&& f, const std::string& prefix) {
    f(prefix + "template", template_table);
    f(prefix + "search", search_table);
  }
  template <class F>
  void visit(F&& f, const std::string& prefix) const {
    f(prefix + "template", template_table);
    f(prefix + "search", search_table);
  }
};

template <typename T>
Matrix<T> add_positional(const Matrix<T>& tokens, const Matrix<T>& table);

template <typename T>
void init_positional(PositionalEncodings<T>& p, Rng& rng);

}  // namespace ssmtrack::embed
