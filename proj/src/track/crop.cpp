// Copyright 2026 The ssmtrack Authors. Apache 2.0 License.
#include "ssmtrack/track/crop.hpp"

#include <algorithm>
#include <cmath>

namespace ssmtrack::track {

embed::CropTransform crop_window(const Box& box, double factor, std::size_t frame_width, std::size_t frame_height) {
  require(factor > 1.0, "crop: factor must exceed 1");
  const double w = std::max(box.width(), 0.0);
  const double h = std::max(box.height(), 0.0);
  const double side = std::max(factor * std::sqrt(w * h), kMinCropSide);
  embed::CropTransform t;
  t.side = side;
  t.origin_x = box.center_x() - 0.5 * side;
  t.origin_y = box.center_y() - 0.5 * side;
  const double fw = static_cast<double>(frame_width);
  const double fh = static_cast<double>(frame_height);
  t.pad_left = std::max(0.0, -t.origin_x);
  t.pad_top = std::max(0.0, -t.origin_y);
  t.pad_right = std::max(0.0, t.origin_x + side - fw);
  t.pad_bottom = std::max(0.0, t.origin_y + side - fh);
  return t;
}

Image resample_window(const Image& frame, const embed::CropTransform& window, std::size_t output_size) {
  require(frame.width > 0 && frame.height > 0, "crop: empty frame");
  require(output_size > 0, "crop: output size must be positive");
  Image out(output_size, output_size, frame.channels);
  const double step = window.side / static_cast<double>(output_size);
  const double max_x = static_cast<double>(frame.width - 1);
  const double max_y = static_cast<double>(frame.height - 1);
  std::vector<std::size_t> x0(output_size), x1(output_size);
  std::vector<float> fx(output_size);
  for (std::size_t i = 0; i < output_size; ++i) {
    const double sx = std::clamp(window.origin_x + (static_cast<double>(i) + 0.5) * step - 0.5, 0.0, max_x);
    x0[i] = static_cast<std::size_t>(sx);
    x1[i] = std::min(x0[i] + 1, frame.width - 1);
    fx[i] = static_cast<float>(sx - static_cast<double>(x0[i]));
  }
  for (std::size_t j = 0; j < output_size; ++j) {
    const double sy = std::clamp(window.origin_y + (static_cast<double>(j) + 0.5) * step - 0.5, 0.0, max_y);
    const std::size_t y0 = static_cast<std::size_t>(sy);
    const std::size_t y1 = std::min(y0 + 1, frame.height - 1);
    const float fy = static_cast<float>(sy - static_cast<double>(y0));
    for (std::size_t c = 0; c < frame.channels; ++c) {
      for (std::size_t i = 0; i < output_size; ++i) {
        const float top = frame.at(c, y0, x0[i]) * (1.0f - fx[i]) + frame.at(c, y0, x1[i]) * fx[i];
        const float bot = frame.at(c, y1, x0[i]) * (1.0f - fx[i]) + frame.at(c, y1, x1[i]) * fx[i];
        out.at(c, j, i) = top * (1.0f - fy) + bot * fy;
      }
    }
  }
  return out;
}

CropResult crop_region(const Image& frame, const Box& box, double factor, std::size_t output_size) {
  const auto t = crop_window(box, factor, frame.width, frame.height);
  return {t, resample_window(frame, t, output_size)};
}

}  // namespace ssmtrack::track
