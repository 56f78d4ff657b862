// Copyright 2026 The ssmtrack Authors. Apache 2.0 License.
#pragma once
// Run configuration, stored as flat UTF-8 `key=value` lines. Blank lines and
// lines starting with '#' are ignored. Keys are listed in docs/formats.md.
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>

#include "ssmtrack/track/model.hpp"
#include "ssmtrack/track/tracker.hpp"

namespace ssmtrack::harness {

enum class SampleMode { kRandom, kUniform };

SampleMode parse_sample_mode(const std::string& s);
std::string to_string(SampleMode m);

struct RunConfig {
  // Model.
  std::size_t dim = 32;
  std::size_t state = 8;
  std::size_t layers = 2;
  std::size_t expansion = 2;
  std::size_t conv_width = 4;
  std::size_t patch = 16;
  std::size_t template_size = 64;
  std::size_t search_size = 128;
  std::size_t head_channels = 32;
  std::size_t templates = 3;   // M
  std::size_t trajectory = 7;  // prompt boxes; 0 disables prompts
  int nbins = 400;
  double alpha = 2.0;
  embed::ConcatMode concat_mode = embed::ConcatMode::kTsts;
  embed::ScanOrder scan_order = embed::ScanOrder::kSpatial;
  embed::VocabInit vocab_init = embed::VocabInit::kSinusoidal;

  // Data.
  SampleMode sample_mode = SampleMode::kRandom;
  std::size_t max_interval = 30;
  std::size_t train_videos = 48;
  std::size_t video_length = 48;
  std::size_t frame_size = 128;
  double occluded_fraction = 1.0;
  double jitter_shift = 0.05;  // fraction of the search side
  double jitter_scale = 0.15;  // log-scale half range
  double prompt_noise = 0.5;   // pixels
  std::uint64_t data_seed = 1;

  // Optimization.
  std::uint64_t seed = 0;
  int stage = 1;
  std::size_t batch = 4;
  std::size_t steps_stage1 = 2000;
  std::size_t steps_stage2 = 1000;
  double lr_stage1 = 0.05;
  double lr_stage2 = 0.02;
  double clip_norm = 1.0;
  double query_weight = 1.0;
  double l1_weight = 5.0;
  double sigma_cells = 0.75;

  track::ModelConfig model_config() const;
  track::TrackerOptions tracker_options() const;
  // Throws ContractError when a value is outside its documented range.
  void validate() const;

  bool operator==(const RunConfig&) const = default;
};

std::string serialize_config(const RunConfig& c);
// Unknown keys and malformed values raise ContractError.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);
void save_config(const std::filesystem::path& path, const RunConfig& c);

}  // namespace ssmtrack::harness
