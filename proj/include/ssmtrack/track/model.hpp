// Copyright 2026 The ssmtrack Authors. Apache 2.0 License.
#pragma once
// The full tracking network: patch embedding with positional tables, optional
// trajectory prompt tokens, the bidirectional encoder, a final RMSNorm, the
// fused-search box head and the query readout.
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "ssmtrack/embed/coords.hpp"
#include "ssmtrack/embed/patch.hpp"
#include "ssmtrack/embed/sequence.hpp"
#include "ssmtrack/encoder/mamba.hpp"
#include "ssmtrack/track/head.hpp"
#include "ssmtrack/track/memory.hpp"

namespace ssmtrack::track {

struct ModelConfig {
  encoder::EncoderDims encoder = encoder::EncoderDims::with_expansion(32, 8, 2);
  std::size_t patch = 16;
  std::size_t template_size = 64;
  std::size_t search_size = 128;
  std::size_t channels = 3;
  std::size_t head_channels = 32;
  std::size_t templates = 3;   // M
  std::size_t trajectory = 7;  // prompt boxes when prompts are enabled
  int nbins = embed::kDefaultBins;
  double alpha = embed::kDefaultDilation;
  embed::ConcatMode mode = embed::ConcatMode::kTsts;
  embed::ScanOrder order = embed::ScanOrder::kSpatial;
  embed::VocabInit vocab_init = embed::VocabInit::kSinusoidal;

  std::size_t dim() const { return encoder.model; }
  std::size_t grid() const { return search_size / patch; }
  std::size_t template_tokens() const { return (template_size / patch) * (template_size / patch); }
  std::size_t search_tokens() const { return grid() * grid(); }
  // Throws ContractError on inconsistent sizes.
  void validate() const;
};

template <typename T>
struct TrackerParams {
  using value_type = T;
  embed::PatchEmbedParams<T> patch;
  embed::PositionalEncodings<T> pos;
  embed::CoordVocabulary<T> vocab;
  encoder::EncoderParams<T> encoder;
  Matrix<T> final_norm;  // 1 x D
  HeadParams<T> head;
  QueryReadout<T> readout;

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
    self.patch.visit(f, prefix + "patch.");
    self.pos.visit(f, prefix + "pos.");
    self.vocab.visit(f, prefix + "vocab.");
    self.encoder.visit(f, prefix + "encoder.");
    f(prefix + "final_norm", self.final_norm);
    self.head.visit(f, prefix + "head.");
    self.readout.visit(f, prefix + "readout.");
  }
};

template <typename T>
TrackerParams<T> init_tracker_params(const ModelConfig& cfg, std::uint64_t seed);

// One network evaluation. Templates are the M slots in model order.
struct NetInput {
  std::vector<const TemplateCrop*> templates;
  const Image* search_rgb = nullptr;
  const Image* search_tir = nullptr;
  // Empty disables prompt tokens; otherwise exactly cfg.trajectory boxes in search coordinates.
  std::vector<Box> prompts;
};

template <typename T>
struct NetOutput {
  Matrix<T> maps;            // G*G x 5
  std::optional<Box> query;  // readout when prompts are enabled
};

template <typename T>
NetOutput<T> net_forward(const TrackerParams<T>& p, const ModelConfig& cfg, const NetInput& in);

struct LossBreakdown {
  double head = 0.0;
  double query = 0.0;
  double total() const { return head + query; }
};

struct LossOptions {
  HeadLossWeights head;
  double query_weight = 1.0;
};

// Head loss (plus query loss when prompts are present); accumulates gradients into grad when non-null.
template <typename T>
LossBreakdown net_loss(const TrackerParams<T>& p, const ModelConfig& cfg, const NetInput& in, const Box& target,
                       const LossOptions& opt, TrackerParams<T>* grad);

}  // namespace ssmtrack::track
