// Copyright 2026 The ssmtrack Authors. Apache 2.0 License.
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "ssmtrack/harness/config.hpp"
#include "ssmtrack/harness/metrics.hpp"
#include "ssmtrack/harness/synthetic.hpp"
#include "ssmtrack/harness/training.hpp"
#include "ssmtrack/io/image_io.hpp"
#include "ssmtrack/io/param_store.hpp"

using namespace ssmtrack;
using namespace ssmtrack::harness;

namespace {

using Indices = std::vector<std::size_t>;

std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("ssmtrack_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

RunConfig tiny_run() {
  RunConfig c;
  c.dim = 8;
  c.state = 4;
  c.layers = 1;
  c.template_size = 32;
  c.search_size = 64;
  c.head_channels = 4;
  c.templates = 2;
  c.trajectory = 3;
  c.nbins = 40;
  c.train_videos = 3;
  c.video_length = 16;
  c.frame_size = 64;
  c.max_interval = 8;
  c.batch = 2;
  c.steps_stage1 = 3;
  c.steps_stage2 = 3;
  return c;
}

std::vector<Box> line_boxes(std::size_t n) {
  std::vector<Box> gt;
  for (std::size_t i = 0; i < n; ++i) gt.push_back(Box::from_center(20.0 + i, 30.0, 10, 10));
  return gt;
}

}  // namespace

TEST_CASE("synthetic videos are deterministic under the seed") {
  VideoSpec spec;
  spec.seed = 5;
  spec.length = 6;
  const auto a = generate_synthetic_video(spec);
  const auto b = generate_synthetic_video(spec);
  CHECK(a.rgb == b.rgb);
  CHECK(a.tir == b.tir);
  CHECK(a.gt == b.gt);
  spec.seed = 6;
  CHECK(generate_synthetic_video(spec).rgb != a.rgb);
}

TEST_CASE("linear profile moves along a straight line inside the frame") {
  VideoSpec spec;
  spec.seed = 7;
  spec.length = 30;
  const auto v = generate_synthetic_video(spec);
  const Box& a = v.gt.front();
  const Box& b = v.gt.back();
  for (const Box& g : v.gt) {
    const double cross = (b.center_x() - a.center_x()) * (g.center_y() - a.center_y()) -
                         (b.center_y() - a.center_y()) * (g.center_x() - a.center_x());
    CHECK(std::abs(cross) < 1e-9);
    CHECK(g.x_min >= 0.0);
    CHECK(g.y_min >= 0.0);
    CHECK(g.x_max <= 128.0);
    CHECK(g.y_max <= 128.0);
  }
}

TEST_CASE("occluded profile hides the target while ground truth continues") {
  VideoSpec spec;
  spec.seed = 8;
  spec.length = 40;
  spec.profile = MotionProfile::kOccluded;
  spec.distractors = 0;
  const auto v = generate_synthetic_video(spec);
  REQUIRE(v.occlusion.has_value());
  const auto [first, last] = *v.occlusion;
  CHECK(first >= 1);
  CHECK(last >= first);
  CHECK(last < v.length());
  auto peak_heat = [&](std::size_t f) {
    const Box& g = v.gt[f];
    float m = 0.0f;
    for (auto y = static_cast<std::size_t>(g.y_min + 2); y < static_cast<std::size_t>(g.y_max - 2); ++y)
      for (auto x = static_cast<std::size_t>(g.x_min + 2); x < static_cast<std::size_t>(g.x_max - 2); ++x)
        m = std::max(m, v.tir[f].at(0, y, x));
    return m;
  };
  for (std::size_t f = 0; f < v.length(); ++f) {
    CHECK(v.gt[f].valid());
    if (v.occluded(f)) {
      CHECK(peak_heat(f) < 0.5f);
    } else {
      CHECK(peak_heat(f) > 0.6f);
    }
  }
}

TEST_CASE("profile names parse") {
  CHECK(parse_profile("occluded-segment") == MotionProfile::kOccluded);
  CHECK(parse_profile("linear") == MotionProfile::kLinear);
  CHECK_THROWS_AS(parse_profile("zigzag"), ContractError);
}

TEST_CASE("metric examples") {
  CHECK(iou({0, 0, 2, 2}, {1, 0, 3, 2}) == doctest::Approx(1.0 / 3.0));
  const auto gt = line_boxes(10);
  const auto perfect = compute_metrics(gt, gt);
  CHECK(perfect.precision == 1.0);
  CHECK(perfect.success == 1.0);
  std::vector<Box> far;
  for (const Box& g : gt) far.push_back({g.x_min + 50, g.y_min + 50, g.x_max + 50, g.y_max + 50});
  const auto none = compute_metrics(far, gt);
  CHECK(none.precision == 0.0);
  CHECK(none.success == 0.0);
  // IoU 1/3 everywhere: thresholds 0..0.30 succeed, 7 of 21.
  std::vector<Box> half;
  for (const Box& g : gt) half.push_back({g.x_min + 5, g.y_min, g.x_max + 5, g.y_max});
  const auto m = compute_metrics(half, gt);
  CHECK(m.success == doctest::Approx(7.0 / 21.0));
  CHECK(m.precision == 1.0);
  CHECK_THROWS_AS(compute_metrics(half, line_boxes(3)), ContractError);
}

TEST_CASE("config round trip and parse errors") {
  RunConfig c = tiny_run();
  c.lr_stage1 = 0.1 + 0.2;  // not exactly representable in short decimal
  c.sample_mode = SampleMode::kUniform;
  c.concat_mode = embed::ConcatMode::kCrossTs;
  c.scan_order = embed::ScanOrder::kTemporal;
  const std::string text = serialize_config(c);
  CHECK(parse_config(text) == c);
  CHECK(serialize_config(parse_config(text)) == text);
  CHECK(parse_config(serialize_config(RunConfig{})) == RunConfig{});
  CHECK(parse_config("# comment\n\ndim=16\n").dim == 16);
  CHECK_THROWS_AS(parse_config("bogus=1\n"), ContractError);
  CHECK_THROWS_AS(parse_config("dim=abc\n"), ContractError);
  CHECK_THROWS_AS(parse_config("dim\n"), ContractError);
  CHECK_THROWS_AS(parse_config("templates=0\n"), ContractError);

  const auto dir = temp_dir("config");
  save_config(dir / "run.cfg", c);
  CHECK(load_config(dir / "run.cfg") == c);
  CHECK_THROWS_AS(load_config(dir / "missing.cfg"), IoError);
}

TEST_CASE("clip sampling") {
  CHECK(uniform_indices(0, 20, 3) == Indices{0, 10, 20});
  CHECK(uniform_indices(4, 4, 1) == Indices{4});
  const auto gt = line_boxes(40);
  Rng a(3), b(3);
  for (int trial = 0; trial < 200; ++trial) {
    const auto ca = sample_training_clip(gt, 3, 7, 30, SampleMode::kRandom, a);
    const auto cb = sample_training_clip(gt, 3, 7, 30, SampleMode::kRandom, b);
    CHECK(ca.templates == cb.templates);
    CHECK(ca.search == cb.search);
    REQUIRE(ca.templates.size() == 3);
    CHECK(ca.search >= 7);
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(ca.templates[i] < ca.search);
      CHECK(ca.templates[i] + 30 >= ca.search);
      if (i > 0) CHECK(ca.templates[i] > ca.templates[i - 1]);
    }
    REQUIRE(ca.prompts.size() == 7);
    for (std::size_t k = 0; k < 7; ++k) CHECK(ca.prompts[k] == gt[ca.search - 7 + k]);
  }
  Rng u(4);
  for (int trial = 0; trial < 50; ++trial) {
    const auto c = sample_training_clip(gt, 3, 0, 20, SampleMode::kUniform, u);
    const std::size_t lo = c.search > 20 ? c.search - 20 : 0;
    CHECK(c.templates == uniform_indices(lo, c.search - 1, 3));
    CHECK(c.prompts.empty());
  }
  CHECK_THROWS_AS(sample_training_clip(line_boxes(10), 3, 7, 30, SampleMode::kRandom, u), ContractError);
  DataPathStats stats;
  sample_training_clip(gt, 3, 7, 30, SampleMode::kRandom, u, &stats);
  CHECK(stats.prompt_box_reads == 7);
}

TEST_CASE("compact frames round trip 8-bit images exactly") {
  VideoSpec spec;
  spec.seed = 9;
  spec.length = 3;
  const auto v = generate_synthetic_video(spec);
  const auto c = compact(v);
  for (std::size_t f = 0; f < 3; ++f) {
    CHECK(c.rgb[f].to_image() == v.rgb[f]);
    CHECK(c.tir[f].to_image() == v.tir[f]);
  }
}

TEST_CASE("training stage contracts") {
  const RunConfig cfg = tiny_run();
  const auto pool = make_training_pool(cfg);
  REQUIRE(pool.size() == 3);

  SUBCASE("stage 1 never reads prompt boxes and is deterministic") {
    auto p1 = track::init_tracker_params<TrainScalar>(cfg.model_config(), cfg.seed);
    auto p2 = p1;
    const auto r1 = train_stage(p1, cfg, 1, pool);
    const auto r2 = train_stage(p2, cfg, 1, pool);
    CHECK(r1.data.prompt_box_reads == 0);
    REQUIRE(r1.trace.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(r1.trace[i].head == r2.trace[i].head);
      CHECK(r1.trace[i].query == 0.0);
    }
    CHECK(io::to_named_arrays(p1) == io::to_named_arrays(p2));
    for (const auto& s : training_batch(pool, cfg, 1, 0)) CHECK(s.prompts.empty());
  }

  SUBCASE("stage 2 reads prompts and reports the query loss") {
    auto p = track::init_tracker_params<TrainScalar>(cfg.model_config(), cfg.seed);
    const auto r = train_stage(p, cfg, 2, pool);
    CHECK(r.data.prompt_box_reads == cfg.steps_stage2 * cfg.batch * cfg.trajectory);
    for (const auto& l : r.trace) CHECK(l.query > 0.0);
  }

  SUBCASE("zero learning rate leaves parameters and per-batch losses unchanged") {
    RunConfig c = cfg;
    c.lr_stage1 = 0.0;
    const auto init = track::init_tracker_params<TrainScalar>(c.model_config(), c.seed);
    auto p = init;
    const auto r = train_stage(p, c, 1, pool);
    CHECK(io::to_named_arrays(p) == io::to_named_arrays(init));
    for (const auto& l : r.trace) CHECK(l.head == doctest::Approx(evaluate_batch(init, c, training_batch(pool, c, 1, l.step)).head).epsilon(1e-12));
    CHECK(r.final_head_loss == doctest::Approx(r.trace.back().head).epsilon(1e-12));
  }

  SUBCASE("checkpoint reload reproduces the final head loss") {
    auto p = track::init_tracker_params<TrainScalar>(cfg.model_config(), cfg.seed);
    const auto r = train_stage(p, cfg, 1, pool);
    const auto dir = temp_dir("ckpt");
    io::save_params(dir / "stage1.bin", p);
    auto q = track::init_tracker_params<TrainScalar>(cfg.model_config(), cfg.seed + 1);
    io::load_params(dir / "stage1.bin", q);
    const auto last = training_batch(pool, cfg, 1, cfg.steps_stage1 - 1);
    CHECK(evaluate_batch(q, cfg, last).head == r.final_head_loss);
  }

  SUBCASE("smoothing") {
    const auto s = smooth({1, 2, 3, 4}, 2);
    CHECK(s == std::vector<double>{1, 1.5, 2.5, 3.5});
  }
}

TEST_CASE("image files round trip") {
  const auto dir = temp_dir("images");
  Image img(3, 5, 2);
  for (std::size_t i = 0; i < img.data.size(); ++i) img.data[i] = static_cast<float>(i) / 255.0f;
  io::write_image(dir / "a.img", img);
  CHECK(io::read_image(dir / "a.img") == img);
  img.data[0] = 0.123456f;
  io::write_image(dir / "b.img", img, io::PixelType::kFloat32);
  CHECK(io::read_image(dir / "b.img") == img);
  {
    std::ofstream os(dir / "bad.img", std::ios::binary);
    os << "NOPE";
  }
  CHECK_THROWS_AS(io::read_image(dir / "bad.img"), IoError);
  CHECK_THROWS_AS(io::read_image(dir / "missing.img"), IoError);
}

TEST_CASE("video manifest and box CSV round trip") {
  const auto dir = temp_dir("video");
  io::VideoManifest m;
  m.init_box = {1.5, 2.25, 10, 12};
  for (int f = 0; f < 2; ++f) {
    const std::string rgb = "rgb_" + std::to_string(f) + ".img", tir = "tir_" + std::to_string(f) + ".img";
    io::write_image(dir / rgb, Image(4, 4, 3, 0.5f));
    io::write_image(dir / tir, Image(4, 4, 3, 0.25f));
    m.frames.push_back({rgb, tir});
  }
  io::write_manifest(dir / "manifest.txt", m);
  const auto back = io::read_manifest(dir / "manifest.txt");
  CHECK(back.init_box == m.init_box);
  CHECK(back.frames.size() == 2);
  const auto v = io::load_video(dir);
  CHECK(v.rgb.size() == 2);
  CHECK(v.tir[1].data[0] == doctest::Approx(0.25f).epsilon(0.01));

  std::vector<io::BoxRow> rows{{0, {0.1, 0.2, 3, 4}, 1.0}, {1, {1.0 / 3.0, 2, 3, 4}, 0.75}};
  io::write_box_csv(dir / "boxes.csv", rows, true);
  const auto read = io::read_box_csv(dir / "boxes.csv");
  REQUIRE(read.size() == 2);
  CHECK(read[1].box == rows[1].box);
  CHECK(read[1].confidence == 0.75);
  CHECK(io::format_box_csv(read, true) == io::format_box_csv(rows, true));
  {
    std::ofstream os(dir / "broken.csv");
    os << "frame_index,x_min,y_min,x_max,y_max\n0,1,2\n";
  }
  CHECK_THROWS_AS(io::read_box_csv(dir / "broken.csv"), IoError);
}
