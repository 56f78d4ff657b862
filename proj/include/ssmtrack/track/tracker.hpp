// Copyright 2026 The ssmtrack Authors. Apache 2.0 License.
#pragma once
// Online tracking loop: per frame, crop both modalities around the last box,
// express the trajectory queue in the crop, predict, map back, then update the
// queue and the template memory.
#include <cstddef>
#include <memory>
#include <vector>

#include "ssmtrack/core/box.hpp"
#include "ssmtrack/core/image.hpp"
#include "ssmtrack/embed/coords.hpp"
#include "ssmtrack/track/crop.hpp"
#include "ssmtrack/track/head.hpp"
#include "ssmtrack/track/memory.hpp"
#include "ssmtrack/track/model.hpp"

namespace ssmtrack::track {

struct TrackerOptions {
  std::size_t templates = 3;   // M
  std::size_t trajectory = 7;  // 0 disables prompts
  std::size_t template_size = 64;
  std::size_t search_size = 128;
  double template_factor = kTemplateFactor;
  double search_factor = kSearchFactor;
};

struct PredictorInput {
  std::size_t frame_index = 0;
  std::vector<const TemplateCrop*> templates;
  const Image* search_rgb = nullptr;
  const Image* search_tir = nullptr;
  embed::CropTransform crop;
  std::vector<Box> prompts;  // search coordinates, empty when prompts are disabled
};

class Predictor {
 public:
  virtual ~Predictor() = default;
  // Box in search-crop coordinates.
  virtual HeadOutput predict(const PredictorInput& in) = 0;
};

// Returns the ground-truth box mapped into the crop; for pipeline checks.
class OraclePredictor final : public Predictor {
 public:
  explicit OraclePredictor(std::vector<Box> truth) : truth_(std::move(truth)) {}
  HeadOutput predict(const PredictorInput& in) override;

 private:
  std::vector<Box> truth_;
};

template <typename T>
class NetworkPredictor final : public Predictor {
 public:
  NetworkPredictor(const TrackerParams<T>& params, ModelConfig cfg) : params_(params), cfg_(std::move(cfg)) {}
  HeadOutput predict(const PredictorInput& in) override;

 private:
  const TrackerParams<T>& params_;
  ModelConfig cfg_;
};

struct TrackerState {
  TemplateMemory memory;
  TrajectoryQueue queue;
  Box last_box;
  std::size_t frame_counter = 0;  // frames processed, frame 0 included
  std::size_t frame_width = 0;
  std::size_t frame_height = 0;
};

TemplateCrop crop_template(const Image& rgb, const Image& tir, const Box& box, const TrackerOptions& opt);

TrackerState init_tracker(const Image& rgb, const Image& tir, const Box& gt, const TrackerOptions& opt);

struct StepResult {
  Box box;  // absolute pixels, inside the frame
  double confidence = 0.0;
};

StepResult track_step(TrackerState& state, const Image& rgb, const Image& tir, Predictor& model,
                      const TrackerOptions& opt);

struct TrackRecord {
  std::size_t frame_index = 0;
  Box box;
  double confidence = 0.0;
};

// Frame 0 is reported as the initialization box with confidence 1.
std::vector<TrackRecord> track_sequence(const std::vector<Image>& rgb, const std::vector<Image>& tir,
                                        const Box& init_box, Predictor& model, const TrackerOptions& opt);

}  // namespace ssmtrack::track
