// Copyright 2026 The ssmtrack Authors. Apache 2.0 License.
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "ssmtrack/encoder/mamba.hpp"
#include "ssmtrack/io/param_store.hpp"
#include "support/testing.hpp"

using namespace ssmtrack;
using namespace ssmtrack::encoder;

namespace {

EncoderDims small_dims(std::size_t layers) { return EncoderDims::with_expansion(8, 4, layers); }

double block_grad_error(Matrix<double> seq, BlockParams<double>& p, Rng& rng) {
  const auto dy = testing::random_normal(seq.rows(), seq.cols(), rng);
  auto grad = zeros_like(p);
  const auto dseq = mamba_block_backward(seq, p, dy, &grad);
  auto loss = [&] { return testing::inner(mamba_block_forward(seq, p), dy); };
  double worst = testing::gradient_check(seq, dseq, loss);
  auto params = array_list(p);
  auto grads = array_list(grad);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double e = testing::gradient_check(*params[i].second, *grads[i].second, loss);
    if (e >= 1e-4) MESSAGE(params[i].first << " rel err " << e);
    worst = std::max(worst, e);
  }
  return worst;
}

}  // namespace

TEST_CASE("block output shape and zero fixed point") {
  auto p = init_params<double>(1, small_dims(1));
  Rng rng(1);
  const auto seq = testing::random_normal(11, 8, rng);
  const auto out = mamba_block_forward(seq, p.layers[0]);
  CHECK(out.rows() == 11);
  CHECK(out.cols() == 8);

  p.layers[0].down.weight.fill(0.0);
  p.layers[0].down.bias.fill(0.0);
  CHECK(mamba_block_forward(seq, p.layers[0]) == seq);

  auto q = init_params<double>(1, small_dims(1));
  for (auto* lin : {&q.layers[0].up_x, &q.layers[0].up_z}) {
    lin->weight.fill(0.0);
    lin->bias.fill(0.0);
  }
  q.layers[0].down.bias.fill(0.0);
  CHECK(mamba_block_forward(seq, q.layers[0]) == seq);
}

TEST_CASE("backward orientation is the reversed forward orientation") {
  auto p = init_params<double>(2, small_dims(1));
  const auto& b = p.layers[0];
  Rng rng(2);
  const auto u = testing::random_normal(9, b.inner_dim(), rng);
  const auto bwd = oriented_scan(u, b.conv_forward, b.s6_forward, Orientation::kBackward);
  const auto fwd = oriented_scan(reverse_rows(u), b.conv_forward, b.s6_forward, Orientation::kForward);
  CHECK(testing::normwise_rel(bwd, reverse_rows(fwd)) < 1e-15);
}

TEST_CASE("forward orientation is causal and backward is anti-causal") {
  auto p = init_params<double>(3, small_dims(1));
  const auto& b = p.layers[0];
  Rng rng(3);
  auto u = testing::random_normal(12, b.inner_dim(), rng);
  auto v = u;
  for (std::size_t c = 0; c < v.cols(); ++c) v(6, c) += 1.0;
  const auto fu = oriented_scan(u, b.conv_forward, b.s6_forward, Orientation::kForward);
  const auto fv = oriented_scan(v, b.conv_forward, b.s6_forward, Orientation::kForward);
  const auto bu = oriented_scan(u, b.conv_backward, b.s6_backward, Orientation::kBackward);
  const auto bv = oriented_scan(v, b.conv_backward, b.s6_backward, Orientation::kBackward);
  for (std::size_t c = 0; c < u.cols(); ++c) {
    for (std::size_t t = 0; t < 6; ++t) CHECK(fu(t, c) == fv(t, c));
    for (std::size_t t = 7; t < 12; ++t) CHECK(bu(t, c) == bv(t, c));
  }
}

TEST_CASE("mamba_block_backward matches central differences") {
  auto p = init_params<double>(4, small_dims(1));
  Rng rng(4);
  // Non-trivial biases so every path carries gradient.
  for (auto& [name, m] : array_list(p.layers[0])) {
    if (name.find("bias") != std::string::npos && name.find("delta") == std::string::npos) fill_normal(*m, rng, 0.1);
  }
  CHECK(block_grad_error(testing::random_normal(8, 8, rng), p.layers[0], rng) < 1e-4);
}

TEST_CASE("encoder_backward matches central differences for two layers") {
  auto p = init_params<double>(5, small_dims(2));
  Rng rng(5);
  auto seq = testing::random_normal(8, 8, rng);
  const auto dy = testing::random_normal(8, 8, rng);
  auto grad = zeros_like(p);
  const auto dseq = encoder_backward(seq, p, dy, &grad);
  auto loss = [&] { return testing::inner(encoder_forward(seq, p), dy); };
  CHECK(testing::gradient_check(seq, dseq, loss) < 1e-4);
  auto params = array_list(p);
  auto grads = array_list(grad);
  double worst = 0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    worst = std::max(worst, testing::gradient_check(*params[i].second, *grads[i].second, loss));
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("init_params is deterministic and well formed") {
  const auto dims = EncoderDims::with_expansion(16, 4, 2);
  const auto a = init_params<double>(42, dims);
  const auto b = init_params<double>(42, dims);
  const auto c = init_params<double>(43, dims);
  CHECK(a.layers.size() == 2);
  auto la = array_list(a);
  auto lb = array_list(b);
  auto lc = array_list(c);
  REQUIRE(la.size() == lb.size());
  bool any_diff = false;
  for (std::size_t i = 0; i < la.size(); ++i) {
    CHECK(*la[i].second == *lb[i].second);
    any_diff = any_diff || !(*la[i].second == *lc[i].second);
  }
  CHECK(any_diff);
  const auto& blk = a.layers[0];
  CHECK(blk.inner_dim() == 32);
  for (std::size_t i = 0; i < blk.rms_weight.size(); ++i) CHECK(blk.rms_weight[i] == 1.0);
  const auto A = blk.s6_forward.A.realized();
  CHECK(A(3, 2) == doctest::Approx(-3.0));
  const auto proj = ssm::input_dependent_projection(Matrix<double>(1, 32), blk.s6_forward.proj);
  for (std::size_t i = 0; i < proj.delta.size(); ++i) {
    CHECK(proj.delta[i] >= 0.01 * (1 - 1e-12));
    CHECK(proj.delta[i] <= 0.1 * (1 + 1e-12));
  }
  const double bound = 2.0 / std::sqrt(16.0);
  for (std::size_t i = 0; i < blk.up_x.weight.size(); ++i) CHECK(std::abs(blk.up_x.weight[i]) <= bound);
  double largest = 0.0;
  for (const auto& [name, m] : array_list(a)) {
    if (name.find("weight") == std::string::npos || name.find("rms_weight") != std::string::npos) continue;
    for (std::size_t i = 0; i < m->size(); ++i) largest = std::max(largest, std::abs((*m)[i]));
  }
  CHECK(largest > 0.0);
  CHECK(largest < 1.0);
}

TEST_CASE("zero layers is the identity and float runs") {
  auto p = init_params<double>(6, small_dims(0));
  Rng rng(6);
  const auto seq = testing::random_normal(5, 8, rng);
  CHECK(encoder_forward(seq, p) == seq);

  auto pf = init_params<float>(6, small_dims(2));
  const auto yf = encoder_forward(cast_matrix<float>(seq), pf);
  for (std::size_t i = 0; i < yf.size(); ++i) CHECK(std::isfinite(yf[i]));
}

TEST_CASE("param store round trip and errors") {
  const auto dir = std::filesystem::temp_directory_path() / "ssmtrack_test_encoder";
  std::filesystem::create_directories(dir);
  const auto path = dir / "enc.ssmp";
  const auto a = init_params<double>(7, small_dims(2));
  io::save_params(path, a);
  auto b = init_params<double>(8, small_dims(2));
  io::load_params(path, b);
  auto la = array_list(a);
  auto lb = array_list(b);
  for (std::size_t i = 0; i < la.size(); ++i) CHECK(*la[i].second == *lb[i].second);

  auto wrong = init_params<double>(8, small_dims(3));
  CHECK_THROWS_AS(io::load_params(path, wrong), IoError);
  auto bigger = init_params<double>(8, EncoderDims::with_expansion(16, 4, 2));
  CHECK_THROWS_AS(io::load_params(path, bigger), IoError);
  CHECK_THROWS_AS(io::read_arrays(dir / "missing.ssmp"), IoError);

  const auto fpath = dir / "enc_f.ssmp";
  const auto af = init_params<float>(7, small_dims(1));
  io::save_params(fpath, af);
  auto bf = init_params<float>(9, small_dims(1));
  io::load_params(fpath, bf);
  auto lfa = array_list(af);
  auto lfb = array_list(bf);
  for (std::size_t i = 0; i < lfa.size(); ++i) CHECK(*lfa[i].second == *lfb[i].second);
  std::filesystem::remove_all(dir);
}
