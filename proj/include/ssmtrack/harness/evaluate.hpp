// Copyright 2026 The ssmtrack Authors. Apache 2.0 License.
#pragma once
#include <cstddef>
#include <vector>

#include "ssmtrack/harness/config.hpp"
#include "ssmtrack/harness/metrics.hpp"
#include "ssmtrack/harness/synthetic.hpp"
#include "ssmtrack/harness/training.hpp"
#include "ssmtrack/track/tracker.hpp"

namespace ssmtrack::harness {

// Runs the network tracker over a video; prompts use cfg.trajectory (0 disables them).
std::vector<track::TrackRecord> track_video(const TrainParams& params, const RunConfig& cfg, const SyntheticVideo& video);

MetricReport evaluate_video(const TrainParams& params, const RunConfig& cfg, const SyntheticVideo& video);

// Occluded-profile evaluation videos, disjoint from the training pool seeds.
VideoSpec evaluation_spec(std::size_t index, std::size_t length = 48);

}  // namespace ssmtrack::harness
