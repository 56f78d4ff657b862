// Copyright 2026 The ssmtrack Authors. Apache 2.0 License.
#include <doctest.h>

#include <chrono>
#include <cmath>
#include <numbers>

#include "ssmtrack/core/params.hpp"
#include "ssmtrack/ssm/s6.hpp"
#include "ssmtrack/ssm/scan.hpp"
#include "support/testing.hpp"

using namespace ssmtrack;
using namespace ssmtrack::ssm;
using testing::normwise_rel;

namespace {

ScanInputs<double> random_inputs(Rng& rng, std::size_t len, std::size_t dch, std::size_t nst, bool with_h0 = true) {
  auto x = testing::random_normal(len, dch, rng);
  Matrix<double> delta(len, dch);
  std::uniform_real_distribution<double> log_dt(std::log(1e-3), std::log(1.0));
  for (std::size_t i = 0; i < delta.size(); ++i) delta[i] = std::exp(log_dt(rng));
  auto B = testing::random_normal(len, nst, rng);
  auto C = testing::random_normal(len, nst, rng);
  auto A = testing::random_matrix(dch, nst, rng, -8.0, -0.1);
  auto in = make_scan_inputs(x, delta, B, C, A);
  if (with_h0) in.h0 = testing::random_normal(dch, nst, rng);
  return in;
}

double scan_loss(const ScanInputs<double>& in, const Matrix<double>& dy, const Matrix<double>& dh) {
  const auto out = selective_scan(in);
  return testing::inner(out.y, dy) + testing::inner(out.h_final, dh);
}

// Worst relative error over every gradient field; A uses steps relative to |A|
// so that the sign of A and the selected drive branch never change.
double worst_gradient_error(ScanInputs<double> in, Rng& rng, double a_rel_step = 1e-5) {
  const auto dy = testing::random_normal(in.length(), in.channels(), rng);
  const auto dh = testing::random_normal(in.channels(), in.state(), rng);
  const auto g = selective_scan_backward(in, dy, dh);
  auto loss = [&] { return scan_loss(in, dy, dh); };
  double worst = 0;
  worst = std::max(worst, testing::gradient_check(in.x, g.x, loss));
  worst = std::max(worst, testing::gradient_check(in.B, g.B, loss));
  worst = std::max(worst, testing::gradient_check(in.C, g.C, loss));
  worst = std::max(worst, testing::gradient_check(in.h0, g.h0, loss));
  for (std::size_t i = 0; i < in.delta.size(); ++i) {
    const double step = 1e-5 * in.delta[i];
    worst = std::max(worst, testing::rel_err(g.delta[i], testing::central_difference(loss, in.delta[i], step)));
  }
  for (std::size_t i = 0; i < in.A.size(); ++i) {
    const double step = a_rel_step * std::abs(in.A[i]);
    worst = std::max(worst, testing::rel_err(g.A[i], testing::central_difference(loss, in.A[i], step)));
  }
  return worst;
}

}  // namespace

TEST_CASE("zoh_discretize: scalar closed forms") {
  Matrix<double> A(1, 1, -1.0), delta(1, 1, std::numbers::ln2), B(1, 1, 1.0), x(1, 1, 1.0);
  const auto tr = zoh_discretize(A, delta, B, x);
  CHECK(tr.abar(0, 0, 0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(tr.drive(0, 0, 0) == doctest::Approx(0.5).epsilon(1e-15));

  delta[0] = 1e-12;
  const auto tiny = zoh_discretize(A, delta, B, x);
  CHECK(tiny.abar(0, 0, 0) == doctest::Approx(1.0).epsilon(1e-11));
  CHECK(std::abs(tiny.drive(0, 0, 0)) < 1e-11);
}

TEST_CASE("zoh_discretize: per-entry diagonal formula") {
  Matrix<double> A(1, 2, std::vector<double>{-1.0, -2.0});
  Matrix<double> delta(1, 1, 1.0), B(1, 2, 1.0), x(1, 1, 1.0);
  const auto tr = zoh_discretize(A, delta, B, x);
  CHECK(tr.abar(0, 0, 0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  CHECK(tr.abar(0, 0, 1) == doctest::Approx(std::exp(-2.0)).epsilon(1e-15));
  CHECK(tr.drive(0, 0, 0) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-15));
  CHECK(tr.drive(0, 0, 1) == doctest::Approx((1.0 - std::exp(-2.0)) / 2.0).epsilon(1e-15));
}

TEST_CASE("zoh_discretize and scan reject bad arguments") {
  Matrix<double> A(1, 1, -1.0), delta(1, 1, 0.0), B(1, 1, 1.0), x(1, 1, 1.0);
  CHECK_THROWS_AS(zoh_discretize(A, delta, B, x), DomainError);
  delta[0] = -0.5;
  CHECK_THROWS_AS(zoh_discretize(A, delta, B, x), DomainError);
  delta[0] = 0.5;
  CHECK_THROWS_AS(zoh_discretize(A, delta, Matrix<double>(2, 1, 1.0), x), ContractError);

  auto in = make_scan_inputs(x, delta, B, B, A);
  in.h0 = Matrix<double>(2, 1);
  CHECK_THROWS_AS(selective_scan(in), ContractError);
  in.h0 = Matrix<double>(1, 1);
  in.A[0] = 0.0;
  CHECK_THROWS_AS(selective_scan(in), DomainError);
  in.x = Matrix<double>(0, 1);
  CHECK_THROWS_AS(selective_scan(in), ContractError);
}

TEST_CASE("StateCoefficients defaults and realization") {
  StateCoefficients<double> s(3, 4);
  const auto A = s.realized();
  for (std::size_t d = 0; d < 3; ++d) {
    for (std::size_t n = 0; n < 4; ++n) CHECK(A(d, n) == doctest::Approx(-double(n + 1)).epsilon(1e-15));
  }
  CHECK_THROWS_AS(StateCoefficients<double>::from_realized(Matrix<double>(1, 1, 0.5)), DomainError);
  const auto back = StateCoefficients<double>::from_realized(A).realized();
  CHECK(normwise_rel(back, A) < 1e-15);
}

TEST_CASE("selective_scan: single step from zero state") {
  Rng rng(1);
  auto in = random_inputs(rng, 1, 3, 5, false);
  const auto out = selective_scan(in);
  const auto tr = zoh_discretize(in.A, in.delta, in.B, in.x);
  for (std::size_t d = 0; d < 3; ++d) {
    double expect = 0;
    for (std::size_t n = 0; n < 5; ++n) expect += in.C(0, n) * tr.drive(0, d, n);
    CHECK(out.y(0, d) == doctest::Approx(expect).epsilon(1e-13));
  }
}

TEST_CASE("selective_scan: Euler branch accumulates a cumulative sum") {
  Matrix<double> x(3, 1, std::vector<double>{1, 2, 3});
  auto in = make_scan_inputs(x, Matrix<double>(3, 1, 1.0), Matrix<double>(3, 1, 1.0), Matrix<double>(3, 1, 1.0),
                             Matrix<double>(1, 1, -1e-9));
  const auto out = selective_scan(in);
  CHECK(out.y(0, 0) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(out.y(1, 0) == doctest::Approx(3.0).epsilon(1e-8));
  CHECK(out.y(2, 0) == doctest::Approx(6.0).epsilon(1e-8));
}

TEST_CASE("selective_scan matches the oracle") {
  Rng rng(3);
  const auto in = random_inputs(rng, 16, 4, 4);
  const auto a = selective_scan(in);
  const auto b = selective_scan_oracle(in);
  CHECK(normwise_rel(a.y, b.y) < 1e-10);
  CHECK(normwise_rel(a.h_final, b.h_final) < 1e-10);

  Rng rng7(7);
  const auto in7 = random_inputs(rng7, 32, 8, 4);
  CHECK(normwise_rel(selective_scan(in7).y, selective_scan_oracle(in7).y) < 1e-10);
}

TEST_CASE("oracle trivial cases") {
  Rng rng(4);
  const auto one = random_inputs(rng, 1, 2, 3);
  CHECK(normwise_rel(selective_scan_oracle(one).y, selective_scan(one).y) < 1e-15);

  auto zero = random_inputs(rng, 9, 2, 3, false);
  zero.x.fill(0.0);
  const auto out = selective_scan_oracle(zero);
  for (std::size_t i = 0; i < out.y.size(); ++i) CHECK(out.y[i] == 0.0);
}

TEST_CASE("scan is linear in the drive when delta, B, C are fixed") {
  Rng rng(5);
  auto in = random_inputs(rng, 40, 6, 8, false);
  const auto base = selective_scan(in);
  for (double alpha : {-3.0, 0.5, 2.0, 1e3}) {
    auto scaled = in;
    for (std::size_t i = 0; i < scaled.x.size(); ++i) scaled.x[i] *= alpha;
    const auto out = selective_scan(scaled);
    Matrix<double> expect = base.y;
    for (std::size_t i = 0; i < expect.size(); ++i) expect[i] *= alpha;
    CHECK(normwise_rel(out.y, expect) < 1e-14);
  }
}

TEST_CASE("ZOH semigroup and stability") {
  Rng rng(6);
  std::uniform_real_distribution<double> dt(1e-3, 2.0), av(-8.0, -0.05), bv(-2.0, 2.0);
  for (int trial = 0; trial < 500; ++trial) {
    const double a = av(rng), d1 = dt(rng), d2 = dt(rng), b = bv(rng), xv = bv(rng);
    Matrix<double> A(1, 1, a), B(1, 1, b), X(1, 1, xv);
    const auto t1 = zoh_discretize(A, Matrix<double>(1, 1, d1), B, X);
    const auto t2 = zoh_discretize(A, Matrix<double>(1, 1, d2), B, X);
    const auto t12 = zoh_discretize(A, Matrix<double>(1, 1, d1 + d2), B, X);
    CHECK(std::abs(t12.abar(0, 0, 0) - t2.abar(0, 0, 0) * t1.abar(0, 0, 0)) < 1e-12);
    CHECK(std::abs(t12.drive(0, 0, 0) - (t2.abar(0, 0, 0) * t1.drive(0, 0, 0) + t2.drive(0, 0, 0))) < 1e-12);
    CHECK(t1.abar(0, 0, 0) > 0.0);
    CHECK(t1.abar(0, 0, 0) < 1.0);
  }
}

TEST_CASE("selective_scan_backward: zero cotangents give zero gradients") {
  Rng rng(8);
  const auto in = random_inputs(rng, 7, 3, 2);
  const auto g = selective_scan_backward(in, Matrix<double>(7, 3), Matrix<double>(3, 2));
  for (const auto* m : {&g.x, &g.delta, &g.A, &g.B, &g.C, &g.h0}) {
    for (std::size_t i = 0; i < m->size(); ++i) CHECK((*m)[i] == 0.0);
  }
}

TEST_CASE("selective_scan_backward: scalar d_C equals h1") {
  Rng rng(9);
  const auto in = random_inputs(rng, 1, 1, 1);
  const auto g = selective_scan_backward(in, Matrix<double>(1, 1, 1.0), Matrix<double>(1, 1));
  const auto out = selective_scan(in);
  CHECK(g.C(0, 0) == doctest::Approx(out.h_final(0, 0)).epsilon(1e-15));
}

TEST_CASE("selective_scan_backward matches central differences in both branches") {
  Rng rng(10);
  for (int trial = 0; trial < 5; ++trial) {
    CHECK(worst_gradient_error(random_inputs(rng, 12, 3, 4), rng) < 1e-4);
  }
  for (int trial = 0; trial < 3; ++trial) {
    auto in = random_inputs(rng, 10, 2, 3);
    for (std::size_t i = 0; i < in.A.size(); ++i) in.A[i] = -2e-8 * (1.0 + double(i));
    CHECK(worst_gradient_error(in, rng, 0.5) < 1e-4);
  }
}

TEST_CASE("input_dependent_projection contracts") {
  const std::size_t dch = 6, nst = 3;
  SelectiveProjection<double> p(dch, nst);
  p.to_delta.bias.fill(-1.5);
  Rng rng(14);
  const auto x = testing::random_normal(5, dch, rng);
  const auto out = input_dependent_projection(x, p);
  for (std::size_t i = 0; i < out.delta.size(); ++i) {
    CHECK(out.delta[i] == doctest::Approx(std::log1p(std::exp(-1.5))).epsilon(1e-15));
  }

  fill_normal(p.to_B.weight, rng);
  fill_normal(p.to_C.weight, rng);
  p.to_B.bias.fill(0.0);
  p.to_C.bias.fill(0.0);
  const auto zero = input_dependent_projection(Matrix<double>(4, dch), p);
  for (std::size_t i = 0; i < zero.B.size(); ++i) CHECK(zero.B[i] == 0.0);
  for (std::size_t i = 0; i < zero.C.size(); ++i) CHECK(zero.C[i] == 0.0);

  CHECK_THROWS_AS(input_dependent_projection(Matrix<double>(4, dch + 1), p), ContractError);
}

TEST_CASE("projection keeps delta positive over a million sampled inputs") {
  const std::size_t dch = 16;
  S6Params<double> p(dch, 4);
  Rng rng(15);
  init_s6(p, rng);
  const auto x = testing::random_normal(62500, dch, rng, 3.0);
  const auto out = input_dependent_projection(x, p.proj);
  std::size_t positive = 0;
  for (std::size_t i = 0; i < out.delta.size(); ++i) positive += out.delta[i] > 0.0 ? 1 : 0;
  CHECK(positive == 1000000);
}

TEST_CASE("s6_backward matches central differences") {
  const std::size_t dch = 4, nst = 3, len = 6;
  S6Params<double> p(dch, nst);
  Rng rng(16);
  init_s6(p, rng);
  auto x = testing::random_normal(len, dch, rng);
  const auto dy = testing::random_normal(len, dch, rng);
  auto grad = zeros_like(p);
  const auto dx = s6_backward(x, p, dy, &grad);
  auto loss = [&] { return testing::inner(s6_forward(x, p), dy); };
  CHECK(testing::gradient_check(x, dx, loss) < 1e-4);
  CHECK(testing::gradient_check(p.proj.to_delta.weight, grad.proj.to_delta.weight, loss) < 1e-4);
  CHECK(testing::gradient_check(p.proj.to_delta.bias, grad.proj.to_delta.bias, loss) < 1e-4);
  CHECK(testing::gradient_check(p.proj.to_B.weight, grad.proj.to_B.weight, loss) < 1e-4);
  CHECK(testing::gradient_check(p.proj.to_C.bias, grad.proj.to_C.bias, loss) < 1e-4);
  CHECK(testing::gradient_check(p.A.log_magnitude(), grad.A.log_magnitude(), loss) < 1e-4);
}

TEST_CASE("scan wall time grows linearly for long sequences") {
  const std::size_t dch = 32, nst = 16;
  const std::size_t base = std::size_t{1} << 14;
  Rng rng(17);
  const auto short_in = random_inputs(rng, base, dch, nst, false);
  const auto long_in = random_inputs(rng, 2 * base, dch, nst, false);
  auto time_once = [](const ScanInputs<double>& in) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto out = selective_scan(in);
    const auto t1 = std::chrono::steady_clock::now();
    CHECK(std::isfinite(out.y[0]));
    return std::chrono::duration<double>(t1 - t0).count();
  };
  // Interleaved rounds so a burst of machine load hits both lengths alike.
  double best_short = 1e30, best_long = 1e30;
  for (int r = 0; r < 9; ++r) {
    best_short = std::min(best_short, time_once(short_in));
    best_long = std::min(best_long, time_once(long_in));
  }
  const double ratio = best_long / best_short;
  MESSAGE("scan time ratio 2L/L = " << ratio);
  CHECK(ratio >= 1.6);
  CHECK(ratio <= 2.6);
}
