// Copyright 2026 The ssmtrack Authors. Apache 2.0 License.
#include "ssmtrack/harness/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ssmtrack/core/params.hpp"
#include "ssmtrack/track/crop.hpp"

namespace ssmtrack::harness {

CompactImage CompactImage::from_image(const Image& img) {
  CompactImage c{img.height, img.width, img.channels, std::vector<std::uint8_t>(img.data.size())};
  for (std::size_t i = 0; i < img.data.size(); ++i) {
    c.data[i] = static_cast<std::uint8_t>(std::lround(std::clamp(img.data[i], 0.0f, 1.0f) * 255.0f));
  }
  return c;
}

Image CompactImage::to_image() const {
  Image img(height, width, channels);
  for (std::size_t i = 0; i < data.size(); ++i) img.data[i] = static_cast<float>(data[i]) / 255.0f;
  return img;
}

CompactVideo compact(const SyntheticVideo& v) {
  CompactVideo c;
  for (const auto& f : v.rgb) c.rgb.push_back(CompactImage::from_image(f));
  for (const auto& f : v.tir) c.tir.push_back(CompactImage::from_image(f));
  c.gt = v.gt;
  return c;
}

std::vector<CompactVideo> make_training_pool(const RunConfig& cfg) {
  std::vector<CompactVideo> pool;
  const auto occluded = static_cast<std::size_t>(std::lround(cfg.occluded_fraction * cfg.train_videos));
  for (std::size_t i = 0; i < cfg.train_videos; ++i) {
    VideoSpec spec;
    spec.seed = cfg.data_seed * 1000003ULL + i;
    spec.length = cfg.video_length;
    spec.width = spec.height = cfg.frame_size;
    if (i < occluded) {
      spec.profile = MotionProfile::kOccluded;
    } else {
      spec.profile = (i - occluded) % 2 == 0 ? MotionProfile::kLinear : MotionProfile::kSinusoidal;
    }
    pool.push_back(compact(generate_synthetic_video(spec)));
  }
  return pool;
}

std::vector<std::size_t> uniform_indices(std::size_t lo, std::size_t hi, std::size_t count) {
  require(count >= 1 && hi >= lo && hi - lo + 1 >= count, "uniform_indices: window too small");
  if (count == 1) return {lo};
  std::vector<std::size_t> out;
  const double span = static_cast<double>(hi - lo);
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(lo + static_cast<std::size_t>(std::lround(span * static_cast<double>(i) / (count - 1))));
  }
  return out;
}

ClipIndices sample_training_clip(const std::vector<Box>& gt, std::size_t templates, std::size_t trajectory,
                                 std::size_t max_interval, SampleMode mode, Rng& rng, DataPathStats* stats) {
  require(templates >= 1, "sample_training_clip: need at least one template");
  require(max_interval >= templates, "sample_training_clip: max_interval smaller than the template count");
  if (gt.size() < templates + trajectory + 1) {
    throw ContractError("sample_training_clip: video of " + std::to_string(gt.size()) + " frames is too short for " +
                        std::to_string(templates) + " templates and " + std::to_string(trajectory) + " prompts");
  }
  const std::size_t first = std::max(templates, trajectory);
  std::uniform_int_distribution<std::size_t> pick_search(first, gt.size() - 1);
  ClipIndices clip;
  clip.search = pick_search(rng);
  const std::size_t lo = clip.search > max_interval ? clip.search - max_interval : 0;
  const std::size_t hi = clip.search - 1;
  if (mode == SampleMode::kUniform) {
    clip.templates = uniform_indices(lo, hi, templates);
  } else {
    std::vector<std::size_t> window(hi - lo + 1);
    std::iota(window.begin(), window.end(), lo);
    // Partial Fisher-Yates: the first `templates` entries are a uniform draw without replacement.
    for (std::size_t i = 0; i < templates; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, window.size() - 1);
      std::swap(window[i], window[pick(rng)]);
    }
    clip.templates.assign(window.begin(), window.begin() + static_cast<std::ptrdiff_t>(templates));
    std::sort(clip.templates.begin(), clip.templates.end());
  }
  for (std::size_t k = clip.search - trajectory; k < clip.search; ++k) clip.prompts.push_back(gt[k]);
  if (stats != nullptr) stats->prompt_box_reads += trajectory;
  return clip;
}

TrainingSample make_training_sample(const CompactVideo& video, const ClipIndices& clip, const RunConfig& cfg,
                                    Rng& rng) {
  const auto opt = cfg.tracker_options();
  TrainingSample s;
  for (std::size_t f : clip.templates) {
    s.templates.push_back(
        track::crop_template(video.rgb[f].to_image(), video.tir[f].to_image(), video.gt[f], opt));
  }
  // Search window around the previous box, jittered in position and scale.
  const Box& prev = video.gt[clip.search - 1];
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double base_side = opt.search_factor * std::sqrt(prev.area());
  const double shift_x = u(rng) * cfg.jitter_shift * base_side;
  const double shift_y = u(rng) * cfg.jitter_shift * base_side;
  const double scale = std::exp(u(rng) * cfg.jitter_scale);
  const Box anchor = Box::from_center(prev.center_x() + shift_x, prev.center_y() + shift_y, prev.width() * scale,
                                      prev.height() * scale);
  const Image rgb = video.rgb[clip.search].to_image();
  const Image tir = video.tir[clip.search].to_image();
  const auto window = track::crop_window(anchor, opt.search_factor, rgb.width, rgb.height);
  s.search_rgb = track::resample_window(rgb, window, opt.search_size);
  s.search_tir = track::resample_window(tir, window, opt.search_size);
  s.target = embed::map_to_search_coords(video.gt[clip.search], window);
  std::normal_distribution<double> noise(0.0, cfg.prompt_noise);
  for (const Box& b : clip.prompts) {
    Box nb = b;
    if (cfg.prompt_noise > 0.0) {
      const double nx = noise(rng), ny = noise(rng);
      nb = {b.x_min + nx, b.y_min + ny, b.x_max + nx, b.y_max + ny};
    }
    s.prompts.push_back(embed::map_to_search_coords(nb, window));
  }
  return s;
}

std::vector<TrainingSample> training_batch(const std::vector<CompactVideo>& pool, const RunConfig& cfg, int stage,
                                           std::size_t step, DataPathStats* stats) {
  require(!pool.empty(), "training_batch: empty video pool");
  Rng rng(cfg.seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(stage) * 0x100000001B3ULL + step);
  const std::size_t trajectory = stage == 2 ? cfg.trajectory : 0;
  std::uniform_int_distribution<std::size_t> pick_video(0, pool.size() - 1);
  std::vector<TrainingSample> batch;
  for (std::size_t b = 0; b < cfg.batch; ++b) {
    const CompactVideo& v = pool[pick_video(rng)];
    // Same search/template sampling in both stages; only stage 2 reads prompt boxes.
    const ClipIndices clip =
        sample_training_clip(v.gt, cfg.templates, trajectory, cfg.max_interval, cfg.sample_mode, rng, stats);
    batch.push_back(make_training_sample(v, clip, cfg, rng));
  }
  return batch;
}

namespace {

track::NetInput net_input(const TrainingSample& s) {
  track::NetInput in;
  for (const auto& t : s.templates) in.templates.push_back(&t);
  in.search_rgb = &s.search_rgb;
  in.search_tir = &s.search_tir;
  in.prompts = s.prompts;
  return in;
}

track::LossOptions loss_options(const RunConfig& cfg) {
  track::LossOptions o;
  o.head.l1_weight = cfg.l1_weight;
  o.head.sigma_cells = cfg.sigma_cells;
  o.query_weight = cfg.query_weight;
  return o;
}

}  // namespace

track::LossBreakdown evaluate_batch(const TrainParams& p, const RunConfig& cfg,
                                    const std::vector<TrainingSample>& batch) {
  const auto mcfg = cfg.model_config();
  const auto opt = loss_options(cfg);
  track::LossBreakdown sum;
  for (const auto& s : batch) {
    const auto l = track::net_loss<TrainScalar>(p, mcfg, net_input(s), s.target, opt, nullptr);
    sum.head += l.head;
    sum.query += l.query;
  }
  const double n = static_cast<double>(batch.size());
  return {sum.head / n, sum.query / n};
}

StageResult train_stage(TrainParams& params, const RunConfig& cfg, int stage, const std::vector<CompactVideo>& pool,
                        const StepCallback& on_step) {
  require(stage == 1 || stage == 2, "train_stage: stage must be 1 or 2");
  cfg.validate();
  const auto mcfg = cfg.model_config();
  const auto opt = loss_options(cfg);
  const std::size_t steps = stage == 1 ? cfg.steps_stage1 : cfg.steps_stage2;
  const double lr = stage == 1 ? cfg.lr_stage1 : cfg.lr_stage2;
  StageResult result;
  TrainParams grad = zeros_like(params);
  for (std::size_t step = 0; step < steps; ++step) {
    const auto batch = training_batch(pool, cfg, stage, step, &result.data);
    for (auto& [name, m] : array_list(grad)) m->fill(TrainScalar(0));
    StepLog log;
    log.step = step;
    for (const auto& s : batch) {
      const auto l = track::net_loss<TrainScalar>(params, mcfg, net_input(s), s.target, opt, &grad);
      log.head += l.head;
      log.query += l.query;
    }
    const double n = static_cast<double>(batch.size());
    log.head /= n;
    log.query /= n;
    if (!std::isfinite(log.total())) {
      throw std::runtime_error("training diverged at stage " + std::to_string(stage) + " step " +
                               std::to_string(step) + ": loss " + std::to_string(log.total()));
    }
    log.grad_norm = std::sqrt(squared_norm(grad)) / n;
    if (!std::isfinite(log.grad_norm)) {
      throw std::runtime_error("training diverged at stage " + std::to_string(stage) + " step " +
                               std::to_string(step) + ": non-finite gradient");
    }
    const double clip = log.grad_norm > cfg.clip_norm ? cfg.clip_norm / log.grad_norm : 1.0;
    if (lr > 0.0) add_scaled(params, grad, -lr * clip / n);
    result.trace.push_back(log);
    if (on_step) on_step(log);
  }
  if (steps > 0) {
    const auto last = training_batch(pool, cfg, stage, steps - 1);
    result.final_head_loss = evaluate_batch(params, cfg, last).head;
  }
  return result;
}

std::vector<double> smooth(const std::vector<double>& v, std::size_t window) {
  require(window >= 1, "smooth: window must be >= 1");
  std::vector<double> out(v.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    sum += v[i];
    if (i >= window) sum -= v[i - window];
    out[i] = sum / static_cast<double>(std::min(i + 1, window));
  }
  return out;
}

}  // namespace ssmtrack::harness
