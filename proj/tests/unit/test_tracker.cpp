// Copyright 2026 The ssmtrack Authors. Apache 2.0 License.
#include <doctest.h>

#include <cmath>

#include "ssmtrack/core/params.hpp"
#include "ssmtrack/harness/synthetic.hpp"
#include "ssmtrack/track/crop.hpp"
#include "ssmtrack/track/head.hpp"
#include "ssmtrack/track/memory.hpp"
#include "ssmtrack/track/model.hpp"
#include "ssmtrack/track/tracker.hpp"
#include "support/testing.hpp"

using namespace ssmtrack;
using namespace ssmtrack::track;

namespace {

using Indices = std::vector<std::size_t>;

TemplateCrop solid_crop(float v) { return {Image(4, 4, 3, v), Image(4, 4, 3, v)}; }

ModelConfig tiny_config(std::size_t templates, std::size_t trajectory) {
  ModelConfig cfg;
  cfg.encoder = encoder::EncoderDims::with_expansion(8, 4, 1);
  cfg.patch = 16;
  cfg.template_size = 32;
  cfg.search_size = 48;
  cfg.head_channels = 4;
  cfg.templates = templates;
  cfg.trajectory = trajectory;
  cfg.nbins = 40;
  return cfg;
}

Image random_image(std::size_t side, Rng& rng) {
  Image img(side, side, 3);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  for (auto& v : img.data) v = u(rng);
  return img;
}

// Checks a handful of entries per array against central differences.
template <class P>
double sampled_param_check(P& params, const P& grad, const std::function<double()>& loss, Rng& rng,
                           std::size_t per_array) {
  double worst = 0.0;
  auto ps = array_list(params);
  auto gs = array_list(grad);
  for (std::size_t a = 0; a < ps.size(); ++a) {
    Matrix<double>& m = *ps[a].second;
    if (m.empty()) continue;
    std::uniform_int_distribution<std::size_t> pick(0, m.size() - 1);
    for (std::size_t k = 0; k < per_array; ++k) {
      const std::size_t i = pick(rng);
      const double step = 1e-5 * std::max(std::abs(m[i]), 1.0);
      const double numeric = testing::central_difference(loss, m[i], step);
      const double e = testing::rel_err((*gs[a].second)[i], numeric);
      if (e >= 1e-4) MESSAGE(ps[a].first << "[" << i << "] rel err " << e);
      worst = std::max(worst, e);
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("template selection examples") {
  CHECK(select_template_indices(30, 3) == Indices{0, 15, 25});
  CHECK(select_template_indices(7, 3) == Indices{0, 3, 5});
  CHECK(select_template_indices(2, 3) == Indices{0});
  CHECK(select_template_indices(0, 3) == Indices{0});
  CHECK(select_template_indices(1, 1) == Indices{0});
  CHECK(select_template_indices(9999, 1) == Indices{0});
  CHECK(select_template_indices(100, 4) == Indices{0, 37, 62, 87});
  CHECK_THROWS_AS(select_template_indices(10, 0), ContractError);
}

TEST_CASE("template memory follows the selection rule and pads with frame 0") {
  TemplateMemory mem(3, solid_crop(0.0f));
  CHECK(mem.frames_seen() == 1);
  CHECK(mem.model_slots().size() == 3);
  for (const auto* s : mem.model_slots()) CHECK(s->rgb.data[0] == 0.0f);
  for (std::size_t f = 1; f < 40; ++f) {
    mem.update(solid_crop(static_cast<float>(f)));
    CHECK(mem.frames_seen() == f + 1);
    CHECK(mem.indices() == select_template_indices(f + 1, 3));
    const auto slots = mem.model_slots();
    REQUIRE(slots.size() == 3);
    const auto& idx = mem.indices();
    const std::size_t pad = 3 - idx.size();
    for (std::size_t k = 0; k < pad; ++k) CHECK(slots[k]->rgb.data[0] == 0.0f);
    for (std::size_t k = 0; k < idx.size(); ++k) CHECK(slots[pad + k]->rgb.data[0] == static_cast<float>(idx[k]));
  }
}

TEST_CASE("trajectory queue is FIFO and pads with the oldest entry") {
  TrajectoryQueue q(3);
  CHECK_THROWS_AS(q.padded(), ContractError);
  q.push({0, 0, 1, 1});
  CHECK(q.padded() == std::vector<Box>(3, Box{0, 0, 1, 1}));
  q.push({1, 1, 2, 2});
  CHECK(q.padded() == std::vector<Box>{{0, 0, 1, 1}, {0, 0, 1, 1}, {1, 1, 2, 2}});
  q.push({2, 2, 3, 3});
  q.push({3, 3, 4, 4});
  CHECK(q.entries() == std::vector<Box>{{1, 1, 2, 2}, {2, 2, 3, 3}, {3, 3, 4, 4}});
  TrajectoryQueue off(0);
  off.push({0, 0, 1, 1});
  CHECK(off.empty());
}

TEST_CASE("crop geometry and edge replication") {
  Image frame(20, 20, 1);
  for (std::size_t y = 0; y < 20; ++y)
    for (std::size_t x = 0; x < 20; ++x) frame.at(0, y, x) = static_cast<float>(x);
  const auto win = crop_window({8, 8, 12, 12}, 2.0, 20, 20);
  CHECK(win.side == doctest::Approx(8.0));
  CHECK(win.origin_x == doctest::Approx(6.0));
  CHECK(win.origin_y == doctest::Approx(6.0));
  CHECK(win.pad_left == 0.0);

  CHECK(crop_window({0, 0, 0.5, 0.5}, 2.0, 20, 20).side == doctest::Approx(kMinCropSide));

  const auto edge = crop_region(frame, {0, 0, 4, 4}, 4.0, 16);
  CHECK(edge.transform.side == doctest::Approx(16.0));
  CHECK(edge.transform.pad_left == doctest::Approx(6.0));
  CHECK(edge.transform.pad_top == doctest::Approx(6.0));
  // Columns left of the frame replicate x = 0.
  CHECK(edge.patch.at(0, 8, 0) == 0.0f);
  CHECK(edge.patch.at(0, 8, 3) == 0.0f);
  CHECK(edge.patch.at(0, 8, 15) > 0.0f);

  // Identity resampling reproduces pixel values on the grid.
  const auto same = resample_window(frame, {4, 4, 8, 0, 0, 0, 0}, 8);
  for (std::size_t x = 0; x < 8; ++x) CHECK(same.at(0, 3, x) == doctest::Approx(4.0 + x));
}

TEST_CASE("head decode uses the argmax cell with lowest-index ties") {
  const std::size_t g = 4;
  Matrix<double> maps(g * g, kHeadOutputs);
  maps(5, 0) = 3.0;
  maps(9, 0) = 3.0;
  maps(5, 1) = 0.25;
  maps(5, 2) = -0.5;
  const auto out = decode_head(maps, g);
  CHECK(out.peak_cell == 5);
  CHECK(out.confidence == doctest::Approx(1.0 / (1.0 + std::exp(-3.0))));
  // cell 5 -> (x 1, y 1); size sigmoid(0) = 0.5
  CHECK(out.box.center_x() == doctest::Approx((1 + 0.5 + 0.25) / 4.0));
  CHECK(out.box.center_y() == doctest::Approx((1 + 0.5 - 0.5) / 4.0));
  CHECK(out.box.width() == doctest::Approx(0.5));

  maps(5, 3) = -200.0;
  CHECK(decode_head(maps, g).box.width() == doctest::Approx(kBoxEps));
}

TEST_CASE("head decode is equivariant to grid shifts") {
  const std::size_t g = 6;
  Rng rng(3);
  Matrix<double> maps(g * g, kHeadOutputs);
  fill_uniform(maps, rng, -1.0, 1.0);
  maps(2 * g + 1, 0) = 10.0;
  Matrix<double> shifted(g * g, kHeadOutputs);
  fill_uniform(shifted, rng, -1.0, 1.0);
  for (std::size_t c = 0; c < kHeadOutputs; ++c) shifted(3 * g + 3, c) = maps(2 * g + 1, c);
  shifted(3 * g + 3, 0) = 10.0;
  const auto a = decode_head(maps, g).box, b = decode_head(shifted, g).box;
  CHECK(b.center_x() - a.center_x() == doctest::Approx(2.0 / g));
  CHECK(b.center_y() - a.center_y() == doctest::Approx(1.0 / g));
  CHECK(b.width() == doctest::Approx(a.width()));
}

TEST_CASE("head backward matches finite differences") {
  Rng rng(4);
  HeadParams<double> p(4, 6, 3);
  init_head(p, rng);
  for (auto& [name, m] : array_list(p)) fill_normal(*m, rng, 0.3);
  auto fused = testing::random_normal(16, 6, rng);
  const auto d_maps = testing::random_normal(16, kHeadOutputs, rng);
  auto grad = zeros_like(p);
  const auto d_fused = head_backward(fused, p, d_maps, &grad);
  auto loss = [&] { return testing::inner(head_forward(fused, p), d_maps); };
  CHECK(testing::gradient_check(fused, d_fused, loss) < 1e-4);
  auto ps = array_list(p);
  auto gs = array_list(grad);
  for (std::size_t i = 0; i < ps.size(); ++i) CHECK(testing::gradient_check(*ps[i].second, *gs[i].second, loss) < 1e-4);
}

TEST_CASE("head loss gradient and minimum") {
  Rng rng(5);
  const std::size_t g = 4;
  auto maps = testing::random_normal(g * g, kHeadOutputs, rng);
  const Box target = Box::from_center(0.4, 0.6, 0.3, 0.2);
  const auto lv = head_loss(maps, g, target);
  CHECK(lv.value > 0.0);
  auto loss = [&] { return head_loss(maps, g, target).value; };
  // L1 kinks are measure-zero for random maps.
  CHECK(testing::gradient_check(maps, lv.grad, loss, 1e-6) < 1e-4);
}

TEST_CASE("query readout stays in the dilated range and its loss differentiates") {
  Rng rng(6);
  QueryReadout<double> r(5);
  fill_normal(r.weight, rng);
  fill_normal(r.bias, rng);
  auto q = testing::random_normal(4, 5, rng, 50.0);
  const Box b = query_readout(q, r, 2.0);
  for (double v : {b.x_min, b.y_min, b.x_max, b.y_max}) {
    CHECK(v >= -0.5);
    CHECK(v <= 1.5);
  }
  q = testing::random_normal(4, 5, rng);
  const Box target{0.2, 0.3, 0.5, 0.7};
  Matrix<double> dq(4, 5);
  QueryReadout<double> grad(5);
  query_loss(q, r, 2.0, target, &dq, &grad);
  auto loss = [&] { return query_loss<double>(q, r, 2.0, target, nullptr, nullptr); };
  CHECK(testing::gradient_check(q, dq, loss) < 1e-4);
  CHECK(testing::gradient_check(r.weight, grad.weight, loss) < 1e-4);
  CHECK(testing::gradient_check(r.bias, grad.bias, loss) < 1e-4);
}

TEST_CASE("full network gradient matches finite differences") {
  for (std::size_t trajectory : {std::size_t(0), std::size_t(3)}) {
    CAPTURE(trajectory);
    const auto cfg = tiny_config(2, trajectory == 0 ? 3 : trajectory);
    auto p = init_tracker_params<double>(cfg, 11);
    Rng rng(12 + trajectory);
    for (auto& [name, m] : array_list(p)) {
      if (name.find("A_log") == std::string::npos) {
        for (std::size_t i = 0; i < m->size(); ++i) (*m)[i] += 0.05 * truncated_normal(rng, 1.0);
      }
    }
    std::vector<TemplateCrop> tmpl;
    for (int k = 0; k < 2; ++k) tmpl.push_back({random_image(32, rng), random_image(32, rng)});
    const Image srgb = random_image(48, rng), stir = random_image(48, rng);
    NetInput in;
    for (const auto& t : tmpl) in.templates.push_back(&t);
    in.search_rgb = &srgb;
    in.search_tir = &stir;
    for (std::size_t k = 0; k < trajectory; ++k) in.prompts.push_back(Box::from_center(0.45 + 0.02 * k, 0.5, 0.3, 0.25));
    const Box target = Box::from_center(0.52, 0.47, 0.28, 0.3);
    LossOptions opt;
    opt.query_weight = 0.7;
    auto grad = zeros_like(p);
    const auto l = net_loss<double>(p, cfg, in, target, opt, &grad);
    CHECK(std::isfinite(l.total()));
    CHECK((trajectory == 0) == (l.query == 0.0));
    auto loss = [&] { return net_loss<double>(p, cfg, in, target, opt, nullptr).total(); };
    CHECK(sampled_param_check(p, grad, loss, rng, 4) < 1e-4);
  }
}

TEST_CASE("net forward is independent of the prompt count check when prompts are off") {
  const auto cfg = tiny_config(2, 3);
  const auto p = init_tracker_params<double>(cfg, 1);
  Rng rng(2);
  TemplateCrop t{random_image(32, rng), random_image(32, rng)};
  const Image s = random_image(48, rng);
  NetInput in{{&t, &t}, &s, &s, {}};
  const auto out = net_forward(p, cfg, in);
  CHECK(out.maps.rows() == 9);
  CHECK(!out.query);
  in.prompts = {Box{0.1, 0.1, 0.2, 0.2}};
  CHECK_THROWS_AS(net_forward(p, cfg, in), ContractError);
}

TEST_CASE("oracle predictor tracks synthetic videos exactly") {
  for (auto profile : {harness::MotionProfile::kLinear, harness::MotionProfile::kSinusoidal,
                       harness::MotionProfile::kOccluded}) {
    harness::VideoSpec spec;
    spec.seed = 21;
    spec.length = 20;
    spec.profile = profile;
    const auto v = harness::generate_synthetic_video(spec);
    OraclePredictor oracle(v.gt);
    TrackerOptions opt;
    const auto recs = track_sequence(v.rgb, v.tir, v.gt[0], oracle, opt);
    REQUIRE(recs.size() == v.gt.size());
    for (std::size_t f = 0; f < recs.size(); ++f) {
      CHECK(recs[f].frame_index == f);
      CHECK(iou(recs[f].box, v.gt[f]) == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("tracker state advances memory and queue") {
  harness::VideoSpec spec;
  spec.seed = 3;
  spec.length = 12;
  const auto v = harness::generate_synthetic_video(spec);
  TrackerOptions opt;
  opt.templates = 3;
  opt.trajectory = 4;
  auto state = init_tracker(v.rgb[0], v.tir[0], v.gt[0], opt);
  CHECK(state.frame_counter == 1);
  CHECK(state.queue.size() == 1);
  OraclePredictor oracle(v.gt);
  for (std::size_t f = 1; f < v.gt.size(); ++f) {
    track_step(state, v.rgb[f], v.tir[f], oracle, opt);
    CHECK(state.frame_counter == f + 1);
    CHECK(state.memory.frames_seen() == f + 1);
    CHECK(state.queue.size() == std::min<std::size_t>(f + 1, 4));
  }
}
