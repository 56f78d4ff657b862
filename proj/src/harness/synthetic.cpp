// Copyright 2026 The ssmtrack Authors. Apache 2.0 License.
#include "ssmtrack/harness/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "ssmtrack/core/errors.hpp"
#include "ssmtrack/core/random.hpp"

namespace ssmtrack::harness {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Sprite {
  std::size_t side = 16;
  std::vector<float> rgb;  // 3 x side x side
  float heat = 0.0f;
};

struct Point {
  double x = 0.0;
  double y = 0.0;
};

float quantize(double v) { return static_cast<float>(std::round(std::clamp(v, 0.0, 1.0) * 255.0) / 255.0); }

Sprite make_sprite(Rng& rng, std::size_t side, float heat) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Sprite s;
  s.side = side;
  s.heat = heat;
  s.rgb.resize(3 * side * side);
  double ca[3], cb[3];
  for (int c = 0; c < 3; ++c) {
    ca[c] = 0.15 + 0.7 * u(rng);
    cb[c] = 0.15 + 0.7 * u(rng);
  }
  const std::size_t cell = std::max<std::size_t>(2, side / 4);
  for (std::size_t y = 0; y < side; ++y) {
    for (std::size_t x = 0; x < side; ++x) {
      const bool odd = ((x / cell) + (y / cell)) % 2 == 1;
      for (int c = 0; c < 3; ++c) s.rgb[(c * side + y) * side + x] = static_cast<float>(odd ? ca[c] : cb[c]);
    }
  }
  return s;
}

void draw_sprite(Image& rgb, Image& tir, const Sprite& s, const Point& center, Rng& rng) {
  std::normal_distribution<double> noise(0.0, 0.03);
  const long x0 = std::lround(center.x - 0.5 * static_cast<double>(s.side));
  const long y0 = std::lround(center.y - 0.5 * static_cast<double>(s.side));
  for (std::size_t y = 0; y < s.side; ++y) {
    for (std::size_t x = 0; x < s.side; ++x) {
      const long px = x0 + static_cast<long>(x);
      const long py = y0 + static_cast<long>(y);
      if (px < 0 || py < 0 || px >= static_cast<long>(rgb.width) || py >= static_cast<long>(rgb.height)) continue;
      const auto ux = static_cast<std::size_t>(px);
      const auto uy = static_cast<std::size_t>(py);
      for (std::size_t c = 0; c < 3; ++c) rgb.at(c, uy, ux) = quantize(s.rgb[(c * s.side + y) * s.side + x] + noise(rng));
      const float heat = quantize(s.heat + noise(rng));
      for (std::size_t c = 0; c < 3; ++c) tir.at(c, uy, ux) = heat;
    }
  }
}

// Target path as box centers for every frame.
std::vector<Point> target_path(const VideoSpec& spec, double side, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double margin = 0.5 * side + 2.0;
  const double lo_x = margin, hi_x = static_cast<double>(spec.width) - margin;
  const double lo_y = margin, hi_y = static_cast<double>(spec.height) - margin;
  const double frames = static_cast<double>(spec.length - 1);
  std::vector<Point> path(spec.length);
  if (spec.profile == MotionProfile::kSinusoidal) {
    const double cx = 0.5 * (lo_x + hi_x) + (u(rng) - 0.5) * 20.0;
    const double cy = 0.5 * (lo_y + hi_y) + (u(rng) - 0.5) * 20.0;
    const double ax = std::min(15.0 + 20.0 * u(rng), std::min(cx - lo_x, hi_x - cx));
    const double ay = std::min(15.0 + 20.0 * u(rng), std::min(cy - lo_y, hi_y - cy));
    const double wx = kTwoPi / (30.0 + 30.0 * u(rng));
    const double wy = kTwoPi / (30.0 + 30.0 * u(rng));
    const double px = kTwoPi * u(rng), py = kTwoPi * u(rng);
    for (std::size_t t = 0; t < spec.length; ++t) {
      path[t] = {cx + ax * std::sin(wx * t + px), cy + ay * std::sin(wy * t + py)};
    }
    return path;
  }
  // Straight line at constant speed that stays inside the frame.
  const double theta = kTwoPi * u(rng);
  const double dirx = std::cos(theta), diry = std::sin(theta);
  double speed = spec.profile == MotionProfile::kOccluded ? 1.5 + 1.0 * u(rng) : 0.5 + 1.5 * u(rng);
  const double span_x = hi_x - lo_x, span_y = hi_y - lo_y;
  const double need_x = std::abs(dirx) * speed * frames, need_y = std::abs(diry) * speed * frames;
  const double shrink = std::min({1.0, need_x > 0 ? span_x / need_x : 1.0, need_y > 0 ? span_y / need_y : 1.0});
  speed *= shrink;
  const double dx = dirx * speed * frames, dy = diry * speed * frames;
  const double sx = lo_x + std::max(0.0, -dx) + u(rng) * (span_x - std::abs(dx));
  const double sy = lo_y + std::max(0.0, -dy) + u(rng) * (span_y - std::abs(dy));
  for (std::size_t t = 0; t < spec.length; ++t) {
    const double a = frames > 0 ? static_cast<double>(t) / frames : 0.0;
    path[t] = {sx + a * dx, sy + a * dy};
  }
  return path;
}

}  // namespace

MotionProfile parse_profile(const std::string& s) {
  if (s == "linear") return MotionProfile::kLinear;
  if (s == "sinusoidal") return MotionProfile::kSinusoidal;
  if (s == "occluded" || s == "occluded-segment") return MotionProfile::kOccluded;
  throw ContractError("unknown motion profile '" + s + "' (expected linear, sinusoidal or occluded)");
}

std::string to_string(MotionProfile p) {
  switch (p) {
    case MotionProfile::kLinear: return "linear";
    case MotionProfile::kSinusoidal: return "sinusoidal";
    case MotionProfile::kOccluded: return "occluded";
  }
  return "?";
}

SyntheticVideo generate_synthetic_video(const VideoSpec& spec) {
  require(spec.length >= 2, "synthetic video needs at least 2 frames");
  require(spec.width >= 32 && spec.height >= 32, "synthetic video frames must be at least 32x32");
  require(spec.target_size >= 4.0 && spec.target_size * 2.0 < static_cast<double>(std::min(spec.width, spec.height)),
          "synthetic target size out of range");
  Rng rng(spec.seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  SyntheticVideo v;
  v.spec = spec;

  // Smooth static backgrounds.
  Image bg_rgb(spec.height, spec.width, 3), bg_tir(spec.height, spec.width, 3);
  double base[3], fx[3][3], fy[3][3], ph[3][3];
  for (int c = 0; c < 3; ++c) {
    base[c] = 0.3 + 0.3 * u(rng);
    for (int k = 0; k < 3; ++k) {
      fx[c][k] = kTwoPi * (0.5 + 2.5 * u(rng)) / static_cast<double>(spec.width);
      fy[c][k] = kTwoPi * (0.5 + 2.5 * u(rng)) / static_cast<double>(spec.height);
      ph[c][k] = kTwoPi * u(rng);
    }
  }
  const double tir_base = 0.12 + 0.08 * u(rng);
  for (std::size_t y = 0; y < spec.height; ++y) {
    for (std::size_t x = 0; x < spec.width; ++x) {
      double warm = 0.0;
      for (int c = 0; c < 3; ++c) {
        double val = base[c];
        for (int k = 0; k < 3; ++k) val += 0.07 * std::sin(fx[c][k] * x + fy[c][k] * y + ph[c][k]);
        bg_rgb.at(c, y, x) = static_cast<float>(val);
        warm += val;
      }
      const float t = static_cast<float>(tir_base + 0.05 * (warm / 3.0 - 0.45));
      for (int c = 0; c < 3; ++c) bg_tir.at(c, y, x) = t;
    }
  }

  const double side = std::round(spec.target_size + 4.0 * (u(rng) - 0.5));
  const auto tside = static_cast<std::size_t>(side);
  const Sprite target = make_sprite(rng, tside, static_cast<float>(0.8 + 0.1 * u(rng)));
  const auto path = target_path(spec, side, rng);

  struct Distractor {
    Sprite sprite;
    Point pos, vel;
  };
  std::vector<Distractor> distractors;
  for (std::size_t i = 0; i < spec.distractors; ++i) {
    Distractor d;
    d.sprite = make_sprite(rng, tside, static_cast<float>(0.25 + 0.1 * u(rng)));
    d.pos = {side + u(rng) * (static_cast<double>(spec.width) - 2 * side),
             side + u(rng) * (static_cast<double>(spec.height) - 2 * side)};
    const double a = kTwoPi * u(rng), s = 0.5 + 1.5 * u(rng);
    d.vel = {s * std::cos(a), s * std::sin(a)};
    distractors.push_back(d);
  }

  if (spec.profile == MotionProfile::kOccluded) {
    const double len = static_cast<double>(spec.length);
    auto first = static_cast<std::size_t>(std::floor(len * (0.3 + 0.15 * u(rng))));
    auto count = static_cast<std::size_t>(std::floor(len * (0.2 + 0.1 * u(rng))));
    first = std::clamp<std::size_t>(first, 1, spec.length - 1);
    count = std::clamp<std::size_t>(count, 1, spec.length - first);
    v.occlusion = std::make_pair(first, first + count - 1);
  }

  std::normal_distribution<double> noise(0.0, 0.015);
  for (std::size_t t = 0; t < spec.length; ++t) {
    Image rgb = bg_rgb, tir = bg_tir;
    for (auto& px : rgb.data) px = quantize(px + noise(rng));
    const std::size_t plane = spec.width * spec.height;
    for (std::size_t i = 0; i < plane; ++i) {
      const float val = quantize(tir.data[i] + noise(rng));
      tir.data[i] = tir.data[plane + i] = tir.data[2 * plane + i] = val;
    }
    const double lo = side, hi_x = static_cast<double>(spec.width) - side, hi_y = static_cast<double>(spec.height) - side;
    for (auto& d : distractors) {
      draw_sprite(rgb, tir, d.sprite, d.pos, rng);
      d.pos.x += d.vel.x;
      d.pos.y += d.vel.y;
      if (d.pos.x < lo || d.pos.x > hi_x) d.vel.x = -d.vel.x;
      if (d.pos.y < lo || d.pos.y > hi_y) d.vel.y = -d.vel.y;
      d.pos.x = std::clamp(d.pos.x, lo, hi_x);
      d.pos.y = std::clamp(d.pos.y, lo, hi_y);
    }
    if (!v.occluded(t)) draw_sprite(rgb, tir, target, path[t], rng);
    v.rgb.push_back(std::move(rgb));
    v.tir.push_back(std::move(tir));
    v.gt.push_back(Box::from_center(path[t].x, path[t].y, side, side));
  }
  return v;
}

}  // namespace ssmtrack::harness
