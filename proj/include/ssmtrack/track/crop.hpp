// Copyright 2026 The ssmtrack Authors. Apache 2.0 License.
#pragma once

#include <cstddef>

#include "ssmtrack/core/box.hpp"
#include "ssmtrack/core/image.hpp"
#include "ssmtrack/embed/coords.hpp"

namespace ssmtrack::track {

inline constexpr double kTemplateFactor = 2.0;
inline constexpr double kSearchFactor = 4.0;
inline constexpr double kMinCropSide = 8.0;

struct CropResult {
  embed::CropTransform transform;
  Image patch;  // output_size x output_size
};

// Square window around the box center with side factor * sqrt(area) (at least
// kMinCropSide), resampled bilinearly; pixels outside the frame replicate the edge.
CropResult crop_region(const Image& frame, const Box& box, double factor, std::size_t output_size);

// Window placement only, no resampling.
embed::CropTransform crop_window(const Box& box, double factor, std::size_t frame_width, std::size_t frame_height);

// Same pixels as crop_region over an explicit window.
Image resample_window(const Image& frame, const embed::CropTransform& window, std::size_t output_size);

}  // namespace ssmtrack::track
