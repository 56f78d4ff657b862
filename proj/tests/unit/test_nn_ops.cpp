// Copyright 2026 The ssmtrack Authors. Apache 2.0 License.
#include <doctest.h>

#include <cmath>

#include "ssmtrack/nn/ops.hpp"
#include "support/testing.hpp"

using namespace ssmtrack;
using namespace ssmtrack::nn;

TEST_CASE("rms_norm of a constant row is the weight") {
  Matrix<double> v(2, 4, 3.0), w(1, 4, std::vector<double>{1, 2, 3, 4});
  const auto out = rms_norm(v, w, 1e-5);
  for (std::size_t c = 0; c < 4; ++c) CHECK(out(1, c) == doctest::Approx(w[c] * 3.0 / std::sqrt(9.0 + 1e-5)).epsilon(1e-15));
  CHECK_THROWS_AS(rms_norm(v, w, 0.0), ContractError);
}

TEST_CASE("causal_conv1d taps and causality") {
  DepthwiseConv<double> conv(1, 3);
  conv.weight = Matrix<double>(1, 3, std::vector<double>{0.25, 0.5, 1.0});
  conv.bias[0] = 0.125;
  Matrix<double> x(4, 1, std::vector<double>{1, 2, 3, 4});
  const auto y = causal_conv1d(x, conv);
  CHECK(y[0] == doctest::Approx(1.0 + 0.125));
  CHECK(y[1] == doctest::Approx(2.0 + 0.5 + 0.125));
  CHECK(y[3] == doctest::Approx(4.0 + 1.5 + 0.5 + 0.125));

  Rng rng(2);
  DepthwiseConv<double> c2(3, 4);
  fill_normal(c2.weight, rng);
  auto a = testing::random_normal(10, 3, rng);
  auto b = a;
  for (std::size_t c = 0; c < 3; ++c) b(7, c) += 5.0;
  const auto ya = causal_conv1d(a, c2), yb = causal_conv1d(b, c2);
  for (std::size_t t = 0; t < 7; ++t) {
    for (std::size_t c = 0; c < 3; ++c) CHECK(ya(t, c) == yb(t, c));
  }
}

TEST_CASE("softplus floor and inverse") {
  CHECK(softplus(-1e4) > 0.0);
  CHECK(softplus(-1e4f) > 0.0f);
  for (double y : {1e-3, 0.01, 0.1, 1.0, 5.0}) CHECK(softplus(inverse_softplus(y)) == doctest::Approx(y).epsilon(1e-12));
  CHECK(silu_grad(0.7) == doctest::Approx((silu(0.7 + 1e-6) - silu(0.7 - 1e-6)) / 2e-6).epsilon(1e-8));
}

TEST_CASE("affine, rms_norm and conv backward match central differences") {
  Rng rng(3);
  auto x = testing::random_normal(5, 4, rng);

  Linear<double> lin(4, 3);
  fill_normal(lin.weight, rng);
  fill_normal(lin.bias, rng);
  auto dy = testing::random_normal(5, 3, rng);
  Matrix<double> dx(5, 4);
  Linear<double> g(4, 3);
  affine_backward(x, lin, dy, &dx, &g);
  auto l1 = [&] { return testing::inner(affine(x, lin), dy); };
  CHECK(testing::gradient_check(x, dx, l1) < 1e-6);
  CHECK(testing::gradient_check(lin.weight, g.weight, l1) < 1e-6);
  CHECK(testing::gradient_check(lin.bias, g.bias, l1) < 1e-6);

  auto w = testing::random_normal(1, 4, rng);
  auto dy2 = testing::random_normal(5, 4, rng);
  Matrix<double> dv(5, 4), dw(1, 4);
  rms_norm_backward(x, w, 1e-5, dy2, &dv, &dw);
  auto l2 = [&] { return testing::inner(rms_norm(x, w, 1e-5), dy2); };
  CHECK(testing::gradient_check(x, dv, l2) < 1e-5);
  CHECK(testing::gradient_check(w, dw, l2) < 1e-5);

  DepthwiseConv<double> conv(4, 3);
  fill_normal(conv.weight, rng);
  fill_normal(conv.bias, rng);
  Matrix<double> dxc(5, 4);
  DepthwiseConv<double> gc(4, 3);
  causal_conv1d_backward(x, conv, dy2, &dxc, &gc);
  auto l3 = [&] { return testing::inner(causal_conv1d(x, conv), dy2); };
  CHECK(testing::gradient_check(x, dxc, l3) < 1e-6);
  CHECK(testing::gradient_check(conv.weight, gc.weight, l3) < 1e-6);
  CHECK(testing::gradient_check(conv.bias, gc.bias, l3) < 1e-6);
}

TEST_CASE("shape contracts") {
  Linear<double> lin(4, 3);
  CHECK_THROWS_AS(affine(Matrix<double>(2, 5), lin), ContractError);
  CHECK_THROWS_AS(rms_norm(Matrix<double>(2, 5), Matrix<double>(1, 4), 1e-5), ContractError);
  CHECK_THROWS_AS(causal_conv1d(Matrix<double>(2, 5), DepthwiseConv<double>(4, 3)), ContractError);
}
