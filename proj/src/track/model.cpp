// Copyright 2026 The ssmtrack Authors. Apache 2.0 License.
#include "ssmtrack/track/model.hpp"

#include "ssmtrack/core/params.hpp"

namespace ssmtrack::track {

using embed::Modality;
using embed::Role;

void ModelConfig::validate() const {
  require(patch > 0 && template_size % patch == 0 && search_size % patch == 0,
          "model: template and search sizes must be multiples of the patch size");
  require(templates >= 1, "model: need at least one template slot");
  require(encoder.model > 0 && encoder.state > 0 && encoder.inner > 0, "model: encoder dims must be positive");
  require(nbins >= 2 && alpha >= 1.0, "model: vocabulary needs nbins >= 2 and alpha >= 1");
  require(head_channels > 0 && channels > 0, "model: channel counts must be positive");
}

template <typename T>
TrackerParams<T> init_tracker_params(const ModelConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const std::size_t d = cfg.dim();
  TrackerParams<T> p;
  Rng rng(seed);
  p.patch = embed::PatchEmbedParams<T>(cfg.patch, cfg.channels, d);
  embed::init_patch_embed(p.patch, rng);
  p.pos = embed::PositionalEncodings<T>(cfg.template_tokens(), cfg.search_tokens(), d);
  embed::init_positional(p.pos, rng);
  p.vocab = embed::CoordVocabulary<T>(cfg.nbins, cfg.alpha, cfg.trajectory, d);
  embed::init_vocabulary(p.vocab, rng, cfg.vocab_init);
  p.encoder = encoder::init_params<T>(seed ^ 0x9e3779b97f4a7c15ULL, cfg.encoder);
  p.final_norm = Matrix<T>(1, d, T(1));
  p.head = HeadParams<T>(cfg.grid(), d, cfg.head_channels);
  init_head(p.head, rng);
  p.readout = QueryReadout<T>(d);
  fill_truncated_normal(p.readout.weight, rng, 0.02);
  return p;
}

namespace {

template <typename T>
struct Forward {
  embed::TokenSequence<T> seq;
  std::optional<embed::PromptTokens<T>> prompts;
  Matrix<T> encoded;
  Matrix<T> normed;
  std::vector<std::size_t> rgb_rows, tir_rows, query_rows;
  Matrix<T> fused;
  Matrix<T> maps;
};

template <typename T>
Matrix<T> gather_rows(const Matrix<T>& m, const std::vector<std::size_t>& rows) {
  Matrix<T> out(rows.size(), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto src = m.row(rows[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

template <typename T>
void scatter_add_rows(const Matrix<T>& src, const std::vector<std::size_t>& rows, Matrix<T>& dst) {
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto d = dst.row(rows[i]);
    auto s = src.row(i);
    for (std::size_t c = 0; c < s.size(); ++c) d[c] += s[c];
  }
}

void check_input(const ModelConfig& cfg, const NetInput& in) {
  require(in.templates.size() == cfg.templates, "net: expected " + std::to_string(cfg.templates) + " template slots");
  require(in.search_rgb != nullptr && in.search_tir != nullptr, "net: search crops missing");
  require(in.prompts.empty() || in.prompts.size() == cfg.trajectory, "net: prompt count must equal trajectory");
}

template <typename T>
Forward<T> run_forward(const TrackerParams<T>& p, const ModelConfig& cfg, const NetInput& in) {
  check_input(cfg, in);
  embed::SequenceParts<T> parts;
  for (const TemplateCrop* t : in.templates) {
    parts.templates_rgb.push_back(embed::add_positional(embed::patch_embed(t->rgb, p.patch), p.pos.template_table));
    parts.templates_tir.push_back(embed::add_positional(embed::patch_embed(t->tir, p.patch), p.pos.template_table));
  }
  parts.search_rgb = embed::add_positional(embed::patch_embed(*in.search_rgb, p.patch), p.pos.search_table);
  parts.search_tir = embed::add_positional(embed::patch_embed(*in.search_tir, p.patch), p.pos.search_table);
  Forward<T> f;
  if (!in.prompts.empty()) {
    f.prompts = embed::embed_prompts(in.prompts, p.vocab);
    parts.prompts = f.prompts;
  }
  f.seq = embed::build_sequence(parts, cfg.mode, cfg.order);
  f.encoded = encoder::encoder_forward(f.seq.tokens, p.encoder);
  f.normed = nn::rms_norm(f.encoded, p.final_norm, static_cast<T>(encoder::kRmsEps));
  f.rgb_rows = embed::block_rows(f.seq.tags, Role::kSearch, Modality::kRgb);
  f.tir_rows = embed::block_rows(f.seq.tags, Role::kSearch, Modality::kTir);
  require(f.rgb_rows.size() == cfg.search_tokens() && f.tir_rows.size() == cfg.search_tokens(),
          "net: search tokens missing from the sequence");
  f.fused = gather_rows(f.normed, f.rgb_rows);
  f.fused += gather_rows(f.normed, f.tir_rows);
  f.maps = head_forward(f.fused, p.head);
  if (f.prompts) f.query_rows = embed::block_rows(f.seq.tags, Role::kQuery, Modality::kNone);
  return f;
}

}  // namespace

template <typename T>
NetOutput<T> net_forward(const TrackerParams<T>& p, const ModelConfig& cfg, const NetInput& in) {
  Forward<T> f = run_forward(p, cfg, in);
  NetOutput<T> out{std::move(f.maps), std::nullopt};
  if (f.prompts) out.query = query_readout(gather_rows(f.normed, f.query_rows), p.readout, p.vocab.alpha);
  return out;
}

template <typename T>
LossBreakdown net_loss(const TrackerParams<T>& p, const ModelConfig& cfg, const NetInput& in, const Box& target,
                       const LossOptions& opt, TrackerParams<T>* grad) {
  Forward<T> f = run_forward(p, cfg, in);
  LossBreakdown loss;
  const LossValue<T> head = head_loss(f.maps, cfg.grid(), target, opt.head);
  loss.head = head.value;
  Matrix<T> d_queries(4, cfg.dim());
  QueryReadout<T> d_readout;
  if (f.prompts) {
    d_readout = zeros_like(p.readout);
    const Matrix<T> queries = gather_rows(f.normed, f.query_rows);
    loss.query = opt.query_weight * query_loss(queries, p.readout, p.vocab.alpha, target, &d_queries, &d_readout);
  }
  if (grad == nullptr) return loss;
  if (f.prompts) {
    add_scaled(grad->readout, d_readout, opt.query_weight);
    for (std::size_t i = 0; i < d_queries.size(); ++i) d_queries[i] *= static_cast<T>(opt.query_weight);
  }

  const Matrix<T> d_fused = head_backward(f.fused, p.head, head.grad, &grad->head);
  Matrix<T> d_normed(f.normed.rows(), f.normed.cols());
  scatter_add_rows(d_fused, f.rgb_rows, d_normed);
  scatter_add_rows(d_fused, f.tir_rows, d_normed);
  if (f.prompts) scatter_add_rows(d_queries, f.query_rows, d_normed);

  Matrix<T> d_encoded(f.encoded.rows(), f.encoded.cols());
  nn::rms_norm_backward(f.encoded, p.final_norm, static_cast<T>(encoder::kRmsEps), d_normed, &d_encoded,
                        &grad->final_norm);
  const Matrix<T> d_tokens = encoder::encoder_backward(f.seq.tokens, p.encoder, d_encoded, &grad->encoder);
  const Matrix<T> d_canon = embed::to_canonical(d_tokens, f.seq.source);

  const std::size_t lz = cfg.template_tokens();
  const std::size_t lx = cfg.search_tokens();
  const std::size_t dim = cfg.dim();
  std::size_t at = 0;
  auto take = [&](std::size_t rows) {
    Matrix<T> blk(rows, dim);
    std::copy(d_canon.row(at).data(), d_canon.row(at).data() + rows * dim, blk.data());
    at += rows;
    return blk;
  };
  for (int modality = 0; modality < 2; ++modality) {
    for (const TemplateCrop* t : in.templates) {
      const Matrix<T> d = take(lz);
      grad->pos.template_table += d;
      embed::patch_embed_backward(modality == 0 ? t->rgb : t->tir, p.patch, d, &grad->patch);
    }
    const Matrix<T> d = take(lx);
    grad->pos.search_table += d;
    embed::patch_embed_backward(modality == 0 ? *in.search_rgb : *in.search_tir, p.patch, d, &grad->patch);
  }
  if (f.prompts) {
    const Matrix<T> d_coord = take(f.prompts->coord.rows());
    const Matrix<T> d_query = take(4);
    embed::embed_prompts_backward(*f.prompts, d_coord, d_query, &grad->vocab);
  }
  return loss;
}

#define SSMTRACK_INSTANTIATE(T)                                                                          \
  template TrackerParams<T> init_tracker_params(const ModelConfig&, std::uint64_t);                     \
  template NetOutput<T> net_forward(const TrackerParams<T>&, const ModelConfig&, const NetInput&);       \
  template LossBreakdown net_loss(const TrackerParams<T>&, const ModelConfig&, const NetInput&, const Box&, \
                                  const LossOptions&, TrackerParams<T>*);

SSMTRACK_INSTANTIATE(float)
SSMTRACK_INSTANTIATE(double)
#undef SSMTRACK_INSTANTIATE

}  // namespace ssmtrack::track
