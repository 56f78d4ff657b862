// Copyright 2026 The ssmtrack Authors. Apache 2.0 License.
#include "ssmtrack/embed/sequence.hpp"

#include <algorithm>
#include <numeric>

namespace ssmtrack::embed {

namespace {

struct Block {
  Role role;
  std::size_t start;  // canonical offset
  std::size_t count;
};

struct CanonicalLayout {
  std::vector<Block> rgb_templates, tir_templates;
  Block rgb_search{}, tir_search{}, coord{}, query{};
};

CanonicalLayout canonical_layout(std::size_t m, std::size_t lz, std::size_t lx, std::size_t traj, bool prompts) {
  CanonicalLayout c;
  std::size_t at = 0;
  for (std::size_t f = 0; f < m; ++f, at += lz) c.rgb_templates.push_back({Role::kTemplate, at, lz});
  c.rgb_search = {Role::kSearch, at, lx};
  at += lx;
  for (std::size_t f = 0; f < m; ++f, at += lz) c.tir_templates.push_back({Role::kTemplate, at, lz});
  c.tir_search = {Role::kSearch, at, lx};
  at += lx;
  c.coord = {Role::kCoord, at, prompts ? 4 * traj : 0};
  at += c.coord.count;
  c.query = {Role::kQuery, at, prompts ? 4 : 0};
  return c;
}

std::vector<Block> block_order(const CanonicalLayout& c, ConcatMode mode) {
  std::vector<Block> out;
  const std::size_t m = c.rgb_templates.size();
  switch (mode) {
    case ConcatMode::kTsts:
      out.insert(out.end(), c.rgb_templates.begin(), c.rgb_templates.end());
      out.push_back(c.rgb_search);
      out.insert(out.end(), c.tir_templates.begin(), c.tir_templates.end());
      out.push_back(c.tir_search);
      break;
    case ConcatMode::kTtss:
      out.insert(out.end(), c.rgb_templates.begin(), c.rgb_templates.end());
      out.insert(out.end(), c.tir_templates.begin(), c.tir_templates.end());
      out.push_back(c.rgb_search);
      out.push_back(c.tir_search);
      break;
    case ConcatMode::kCrossTs:
      for (std::size_t f = 0; f < m; ++f) {
        out.push_back(c.rgb_templates[f]);
        out.push_back(c.tir_templates[f]);
      }
      out.push_back(c.rgb_search);
      out.push_back(c.tir_search);
      break;
  }
  if (c.coord.count > 0) out.push_back(c.coord);
  if (c.query.count > 0) out.push_back(c.query);
  return out;
}

}  // namespace

ConcatMode parse_concat_mode(const std::string& s) {
  if (s == "tsts") return ConcatMode::kTsts;
  if (s == "ttss") return ConcatMode::kTtss;
  if (s == "cross_ts" || s == "cross-ts") return ConcatMode::kCrossTs;
  throw ContractError("unknown concat mode '" + s + "' (expected tsts, ttss or cross_ts)");
}

ScanOrder parse_scan_order(const std::string& s) {
  if (s == "spatial") return ScanOrder::kSpatial;
  if (s == "temporal") return ScanOrder::kTemporal;
  throw ContractError("unknown scan order '" + s + "' (expected spatial or temporal)");
}

std::string to_string(ConcatMode m) {
  switch (m) {
    case ConcatMode::kTsts: return "tsts";
    case ConcatMode::kTtss: return "ttss";
    case ConcatMode::kCrossTs: return "cross_ts";
  }
  return "?";
}

std::string to_string(ScanOrder o) { return o == ScanOrder::kSpatial ? "spatial" : "temporal"; }

std::vector<TokenTag> canonical_tags(std::size_t templates, std::size_t template_tokens, std::size_t search_tokens,
                                     std::size_t prompt_boxes, bool with_prompts) {
  std::vector<TokenTag> tags;
  tags.reserve(sequence_length(templates, template_tokens, search_tokens, prompt_boxes, with_prompts));
  for (Modality mod : {Modality::kRgb, Modality::kTir}) {
    for (std::size_t f = 0; f < templates; ++f) {
      for (std::size_t s = 0; s < template_tokens; ++s) tags.push_back({Role::kTemplate, mod, f, s});
    }
    for (std::size_t s = 0; s < search_tokens; ++s) tags.push_back({Role::kSearch, mod, 0, s});
  }
  if (with_prompts) {
    for (std::size_t s = 0; s < 4 * prompt_boxes; ++s) tags.push_back({Role::kCoord, Modality::kNone, 0, s});
    for (std::size_t s = 0; s < 4; ++s) tags.push_back({Role::kQuery, Modality::kNone, 0, s});
  }
  return tags;
}

std::vector<std::size_t> sequence_permutation(std::size_t templates, std::size_t template_tokens,
                                              std::size_t search_tokens, std::size_t prompt_boxes,
                                              bool with_prompts, ConcatMode mode, ScanOrder order) {
  require(templates >= 1, "build_sequence: need at least one template frame");
  const auto layout = canonical_layout(templates, template_tokens, search_tokens, prompt_boxes, with_prompts);
  const auto blocks = block_order(layout, mode);
  std::vector<std::size_t> perm;
  perm.reserve(sequence_length(templates, template_tokens, search_tokens, prompt_boxes, with_prompts));
  std::size_t i = 0;
  while (i < blocks.size()) {
    std::size_t j = i + 1;
    if (order == ScanOrder::kTemporal && blocks[i].role == Role::kTemplate) {
      while (j < blocks.size() && blocks[j].role == Role::kTemplate) ++j;
    }
    // Blocks [i, j) form one temporal run; a run of one block is emitted as is.
    const std::size_t count = blocks[i].count;
    for (std::size_t s = 0; s < count; ++s) {
      for (std::size_t b = i; b < j; ++b) perm.push_back(blocks[b].start + s);
    }
    i = j;
  }
  return perm;
}

std::vector<std::size_t> invert_permutation(const std::vector<std::size_t>& perm) {
  std::vector<std::size_t> inv(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) {
    require(perm[i] < perm.size(), "invert_permutation: index out of range");
    inv[perm[i]] = i;
  }
  return inv;
}

template <typename T>
TokenSequence<T> build_sequence(const SequenceParts<T>& parts, ConcatMode mode, ScanOrder order) {
  const std::size_t m = parts.templates_rgb.size();
  require(m >= 1, "build_sequence: need at least one template frame");
  require(parts.templates_tir.size() == m, "build_sequence: RGB/TIR template counts differ");
  const std::size_t dim = parts.search_rgb.cols();
  const std::size_t lz = parts.templates_rgb[0].rows();
  const std::size_t lx = parts.search_rgb.rows();
  require(parts.search_tir.rows() == lx && parts.search_tir.cols() == dim, "build_sequence: search block shape");
  for (std::size_t f = 0; f < m; ++f) {
    for (const auto* t : {&parts.templates_rgb[f], &parts.templates_tir[f]}) {
      require(t->rows() == lz && t->cols() == dim, "build_sequence: template block shape");
    }
  }
  const bool prompts = parts.prompts.has_value();
  const std::size_t traj = prompts ? parts.prompts->coord.rows() / 4 : 0;
  if (prompts) {
    require(parts.prompts->coord.rows() == 4 * traj && parts.prompts->query.rows() == 4, "build_sequence: prompts");
    require(parts.prompts->coord.cols() == dim && parts.prompts->query.cols() == dim, "build_sequence: prompt dim");
  }

  const std::size_t len = sequence_length(m, lz, lx, traj, prompts);
  Matrix<T> canonical(len, dim);
  std::size_t at = 0;
  auto put = [&](const Matrix<T>& blk) {
    std::copy(blk.data(), blk.data() + blk.size(), canonical.row(at).data());
    at += blk.rows();
  };
  for (const auto* group : {&parts.templates_rgb, &parts.templates_tir}) {
    for (const auto& t : *group) put(t);
    put(group == &parts.templates_rgb ? parts.search_rgb : parts.search_tir);
  }
  if (prompts) {
    if (traj > 0) put(parts.prompts->coord);
    put(parts.prompts->query);
  }

  TokenSequence<T> seq;
  seq.source = sequence_permutation(m, lz, lx, traj, prompts, mode, order);
  const auto tags = canonical_tags(m, lz, lx, traj, prompts);
  seq.tokens = Matrix<T>(len, dim);
  seq.tags.resize(len);
  for (std::size_t i = 0; i < len; ++i) {
    const auto src = canonical.row(seq.source[i]);
    std::copy(src.begin(), src.end(), seq.tokens.row(i).begin());
    seq.tags[i] = tags[seq.source[i]];
  }
  return seq;
}

template <typename T>
Matrix<T> to_canonical(const Matrix<T>& m, const std::vector<std::size_t>& source) {
  require(m.rows() == source.size(), "to_canonical: permutation length mismatch");
  Matrix<T> out(m.rows(), m.cols());
  for (std::size_t i = 0; i < source.size(); ++i) {
    const auto src = m.row(i);
    std::copy(src.begin(), src.end(), out.row(source[i]).begin());
  }
  return out;
}

std::vector<std::size_t> block_rows(const std::vector<TokenTag>& tags, Role role, Modality modality,
                                    std::size_t frame) {
  std::vector<std::pair<std::size_t, std::size_t>> hits;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    const auto& t = tags[i];
    if (t.role == role && t.modality == modality && t.frame == frame) hits.emplace_back(t.spatial, i);
  }
  std::sort(hits.begin(), hits.end());
  std::vector<std::size_t> rows;
  rows.reserve(hits.size());
  for (const auto& h : hits) rows.push_back(h.second);
  return rows;
}

#define SSMTRACK_INSTANTIATE(T)                                                                 \
  template TokenSequence<T> build_sequence(const SequenceParts<T>&, ConcatMode, ScanOrder);     \
  template Matrix<T> to_canonical(const Matrix<T>&, const std::vector<std::size_t>&);

SSMTRACK_INSTANTIATE(float)
SSMTRACK_INSTANTIATE(double)
#undef SSMTRACK_INSTANTIATE

}  // namespace ssmtrack::embed
