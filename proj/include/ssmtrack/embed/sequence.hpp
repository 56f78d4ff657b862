// Copyright 2026 The ssmtrack Authors. Apache 2.0 License.
#pragma once
// Assembly of template, search and prompt tokens into one sequence.
//
// Canonical order (tsts, spatial):
//   [t_RGB(0..M-1), s_RGB, t_TIR(0..M-1), s_TIR, coord(0..4T-1), query(0..3)]
// Every other mode/order is a recorded permutation of it.
#include <cstddef>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ssmtrack/core/tensor.hpp"
#include "ssmtrack/embed/coords.hpp"

namespace ssmtrack::embed {

enum class Role : std::uint8_t { kTemplate, kSearch, kCoord, kQuery };
enum class Modality : std::uint8_t { kRgb, kTir, kNone };
enum class ConcatMode { kTsts, kTtss, kCrossTs };
enum class ScanOrder { kSpatial, kTemporal };

ConcatMode parse_concat_mode(const std::string& s);
ScanOrder parse_scan_order(const std::string& s);
std::string to_string(ConcatMode m);
std::string to_string(ScanOrder o);

struct TokenTag {
  Role role = Role::kTemplate;
  Modality modality = Modality::kNone;
  std::size_t frame = 0;    // template slot; 0 for search and prompt tokens
  std::size_t spatial = 0;  // grid index, or slot index for prompt tokens

  bool operator==(const TokenTag&) const = default;
  auto operator<=>(const TokenTag&) const = default;
};

template <typename T>
struct SequenceParts {
  std::vector<Matrix<T>> templates_rgb;  // M blocks of L_z x D
  std::vector<Matrix<T>> templates_tir;
  Matrix<T> search_rgb;  // L_x x D
  Matrix<T> search_tir;
  std::optional<PromptTokens<T>> prompts;
};

template <typename T>
struct TokenSequence {
  Matrix<T> tokens;
  std::vector<TokenTag> tags;
  // tokens.row(i) == canonical.row(source[i])
  std::vector<std::size_t> source;

  std::size_t length() const { return tokens.rows(); }
};

// Canonical-order tags for the given sizes.
std::vector<TokenTag> canonical_tags(std::size_t templates, std::size_t template_tokens, std::size_t search_tokens,
                                     std::size_t prompt_boxes, bool with_prompts);

// Maps output position -> canonical position.
std::vector<std::size_t> sequence_permutation(std::size_t templates, std::size_t template_tokens,
                                              std::size_t search_tokens, std::size_t prompt_boxes,
                                              bool with_prompts, ConcatMode mode, ScanOrder order);

std::vector<std::size_t> invert_permutation(const std::vector<std::size_t>& perm);

template <typename T>
TokenSequence<T> build_sequence(const SequenceParts<T>& parts, ConcatMode mode, ScanOrder order);

// Rows in canonical order: out.row(source[i]) = m.row(i).
template <typename T>
Matrix<T> to_canonical(const Matrix<T>& m, const std::vector<std::size_t>& source);

// Sequence rows holding (role, modality, frame) ordered by spatial index.
std::vector<std::size_t> block_rows(const std::vector<TokenTag>& tags, Role role, Modality modality,
                                    std::size_t frame = 0);

// 2 * M * L_z + 2 * L_x (+ 4 * T + 4 with prompts).
inline std::size_t sequence_length(std::size_t templates, std::size_t template_tokens, std::size_t search_tokens,
                                   std::size_t prompt_boxes, bool with_prompts) {
  return 2 * templates * template_tokens + 2 * search_tokens + (with_prompts ? 4 * prompt_boxes + 4 : 0);
}

}  // namespace ssmtrack::embed
