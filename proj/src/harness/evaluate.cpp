// Copyright 2026 The ssmtrack Authors. Apache 2.0 License.
#include "ssmtrack/harness/evaluate.hpp"

namespace ssmtrack::harness {

std::vector<track::TrackRecord> track_video(const TrainParams& params, const RunConfig& cfg,
                                            const SyntheticVideo& video) {
  track::NetworkPredictor<TrainScalar> predictor(params, cfg.model_config());
  return track::track_sequence(video.rgb, video.tir, video.gt.front(), predictor, cfg.tracker_options());
}

MetricReport evaluate_video(const TrainParams& params, const RunConfig& cfg, const SyntheticVideo& video) {
  const auto records = track_video(params, cfg, video);
  std::vector<Box> pred;
  pred.reserve(records.size());
  for (const auto& r : records) pred.push_back(r.box);
  return compute_metrics(pred, video.gt);
}

VideoSpec evaluation_spec(std::size_t index, std::size_t length) {
  VideoSpec spec;
  spec.seed = 1000 + index;
  spec.length = length;
  spec.profile = MotionProfile::kOccluded;
  return spec;
}

}  // namespace ssmtrack::harness
