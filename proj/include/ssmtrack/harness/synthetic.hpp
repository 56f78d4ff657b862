// Copyright 2026 The ssmtrack Authors. Apache 2.0 License.
#pragma once
// Procedural RGB-T videos: a textured target square that is hot in the thermal
// channel, plus cool look-alike distractors over a smooth background.
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ssmtrack/core/box.hpp"
#include "ssmtrack/core/image.hpp"

namespace ssmtrack::harness {

enum class MotionProfile { kLinear, kSinusoidal, kOccluded };

MotionProfile parse_profile(const std::string& s);
std::string to_string(MotionProfile p);

struct VideoSpec {
  std::uint64_t seed = 0;
  std::size_t length = 48;
  std::size_t width = 128;
  std::size_t height = 128;
  MotionProfile profile = MotionProfile::kLinear;
  std::size_t distractors = 2;
  double target_size = 16.0;
};

struct SyntheticVideo {
  VideoSpec spec;
  std::vector<Image> rgb;  // 3 channels
  std::vector<Image> tir;  // 3 identical channels
  std::vector<Box> gt;
  // Inclusive frame span in which the target is not drawn (occluded profile only).
  std::optional<std::pair<std::size_t, std::size_t>> occlusion;

  std::size_t length() const { return gt.size(); }
  bool occluded(std::size_t frame) const {
    return occlusion && frame >= occlusion->first && frame <= occlusion->second;
  }
};

// Deterministic in the spec; pixel values are multiples of 1/255.
SyntheticVideo generate_synthetic_video(const VideoSpec& spec);

}  // namespace ssmtrack::harness
