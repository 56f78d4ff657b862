// Copyright 2026 The ssmtrack Authors. Apache 2.0 License.
#pragma once
// Desk-scale two-stage training on synthetic videos. Stage 1 trains the head
// losses with multi-template input and no prompts; stage 2 adds trajectory
// prompt tokens and the query loss at a reduced learning rate.
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

#include "ssmtrack/core/box.hpp"
#include "ssmtrack/core/random.hpp"
#include "ssmtrack/harness/config.hpp"
#include "ssmtrack/harness/synthetic.hpp"
#include "ssmtrack/track/model.hpp"

namespace ssmtrack::harness {

using TrainScalar = float;
using TrainParams = track::TrackerParams<TrainScalar>;

// 8-bit planar copy of an Image; keeps training pools small.
struct CompactImage {
  std::size_t height = 0, width = 0, channels = 0;
  std::vector<std::uint8_t> data;

  static CompactImage from_image(const Image& img);
  Image to_image() const;
};

struct CompactVideo {
  std::vector<CompactImage> rgb, tir;
  std::vector<Box> gt;
};

CompactVideo compact(const SyntheticVideo& v);

// Training pool generated from cfg.data_seed; a fraction of the videos uses the occluded profile.
std::vector<CompactVideo> make_training_pool(const RunConfig& cfg);

struct DataPathStats {
  std::size_t prompt_box_reads = 0;
};

struct ClipIndices {
  std::vector<std::size_t> templates;  // ascending, all < search
  std::size_t search = 0;
  std::vector<Box> prompts;  // absolute gt boxes of the trajectory frames before search, oldest first
};

// Templates are drawn from the window [max(0, search - max_interval), search - 1].
// The search frame is drawn uniformly from the frames that leave room for M templates and T prompts.
ClipIndices sample_training_clip(const std::vector<Box>& gt, std::size_t templates, std::size_t trajectory,
                                 std::size_t max_interval, SampleMode mode, Rng& rng, DataPathStats* stats = nullptr);

// Evenly spaced indices over [lo, hi] including both ends (just lo when count is 1).
std::vector<std::size_t> uniform_indices(std::size_t lo, std::size_t hi, std::size_t count);

struct TrainingSample {
  std::vector<track::TemplateCrop> templates;
  Image search_rgb, search_tir;
  std::vector<Box> prompts;  // search coordinates; empty in stage 1
  Box target;                // search coordinates
};

TrainingSample make_training_sample(const CompactVideo& video, const ClipIndices& clip, const RunConfig& cfg, Rng& rng);

struct StepLog {
  std::size_t step = 0;
  double head = 0.0;
  double query = 0.0;
  double grad_norm = 0.0;
  double total() const { return head + query; }
};

struct StageResult {
  std::vector<StepLog> trace;
  // Head loss of the final parameters on the final step's batch.
  double final_head_loss = 0.0;
  DataPathStats data;
};

// Batch for (seed, stage, step); regenerating it reproduces the same samples exactly.
std::vector<TrainingSample> training_batch(const std::vector<CompactVideo>& pool, const RunConfig& cfg, int stage,
                                           std::size_t step, DataPathStats* stats = nullptr);

// Mean head loss (and query loss when the batch carries prompts); no updates.
track::LossBreakdown evaluate_batch(const TrainParams& p, const RunConfig& cfg, const std::vector<TrainingSample>& batch);

using StepCallback = std::function<void(const StepLog&)>;

// Plain gradient descent with global-norm clipping. Throws std::runtime_error on a non-finite loss.
StageResult train_stage(TrainParams& params, const RunConfig& cfg, int stage, const std::vector<CompactVideo>& pool,
                        const StepCallback& on_step = {});

// Trailing moving average with the given window.
std::vector<double> smooth(const std::vector<double>& v, std::size_t window);

}  // namespace ssmtrack::harness
