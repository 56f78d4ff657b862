// Copyright 2026 The ssmtrack Authors. Apache 2.0 License.
#pragma once

#include <algorithm>
#include <cmath>
#include <utility>

namespace ssmtrack {

// Axis-aligned box [x_min, y_min, x_max, y_max]. Used both for absolute pixel
// boxes and for boxes normalized to a search crop.
struct Box {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double area() const { return std::max(0.0, width()) * std::max(0.0, height()); }
  double center_x() const { return 0.5 * (x_min + x_max); }
  double center_y() const { return 0.5 * (y_min + y_max); }
  bool valid() const { return x_min < x_max && y_min < y_max; }

  static Box from_center(double cx, double cy, double w, double h) {
    return {cx - 0.5 * w, cy - 0.5 * h, cx + 0.5 * w, cy + 0.5 * h};
  }

  bool operator==(const Box&) const = default;
};

inline double iou(const Box& a, const Box& b) {
  const double iw = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double ih = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

inline double center_distance(const Box& a, const Box& b) {
  return std::hypot(a.center_x() - b.center_x(), a.center_y() - b.center_y());
}

// Clamps into [0, width] x [0, height] keeping at least `min_extent` on each axis.
inline Box clamp_box(const Box& b, double width, double height, double min_extent = 1.0) {
  auto clamp_axis = [min_extent](double lo, double hi, double limit) {
    const double ext = std::min(std::max(hi - lo, min_extent), limit);
    lo = std::clamp(lo, 0.0, limit - ext);
    return std::pair<double, double>{lo, lo + ext};
  };
  const auto [x0, x1] = clamp_axis(b.x_min, b.x_max, width);
  const auto [y0, y1] = clamp_axis(b.y_min, b.y_max, height);
  return {x0, y0, x1, y1};
}

}  // namespace ssmtrack
