// Copyright 2026 The ssmtrack Authors. Apache 2.0 License.
#pragma once

#include <cstddef>
#include <vector>

#include "ssmtrack/core/errors.hpp"

namespace ssmtrack {

// Planar image, values nominally in [0, 1]; index (c, y, x).
struct Image {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 0;
  std::vector<float> data;

  Image() = default;
  Image(std::size_t h, std::size_t w, std::size_t c, float fill = 0.0f)
      : height(h), width(w), channels(c), data(h * w * c, fill) {}

  float& at(std::size_t c, std::size_t y, std::size_t x) { return data[(c * height + y) * width + x]; }
  float at(std::size_t c, std::size_t y, std::size_t x) const { return data[(c * height + y) * width + x]; }

  bool operator==(const Image&) const = default;
};

}  // namespace ssmtrack
