// Copyright 2026 The ssmtrack Authors. Apache 2.0 License.
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "ssmtrack/bench/complexity.hpp"
#include "support/testing.hpp"

using namespace ssmtrack;
using namespace ssmtrack::bench;

TEST_CASE("analytic FLOP models") {
  CHECK(flops_attention(1, 64) == 4 * 64 + 8 * 64 * 64);
  // Independent evaluation of the 2L / L ratio at L = 1024, D = 64.
  const double L = 1024, D = 64;
  const double expected = (4 * 4 * L * L * D + 16 * L * D * D) / (4 * L * L * D + 8 * L * D * D);
  CHECK(static_cast<double>(flops_attention(2048, 64)) / static_cast<double>(flops_attention(1024, 64)) ==
        doctest::Approx(expected));
  CHECK(expected == doctest::Approx(17408.0 / 4608.0));
  const double big = static_cast<double>(flops_attention(1 << 22, 64)) / static_cast<double>(flops_attention(1 << 21, 64));
  CHECK(big == doctest::Approx(4.0).epsilon(1e-3));

  for (std::uint64_t l : {1u, 7u, 1000u}) {
    CHECK(flops_scan(2 * l, 16, 8) == 2 * flops_scan(l, 16, 8));
    CHECK(flops_scan(l, 16, 16) == 2 * flops_scan(l, 16, 8));
    CHECK(flops_scan(l, 1, 1) == kScanOpsPerElement * l);
  }
  CHECK_THROWS_AS(flops_scan(0, 1, 1), ContractError);
  CHECK_THROWS_AS(flops_attention(1, 0), ContractError);
  CHECK(bytes_scan(2048, 64, 16) < 2 * bytes_scan(1024, 64, 16) + 1);
}

TEST_CASE("tiled attention matches the naive oracle") {
  Rng rng(1);
  for (std::size_t L : {1u, 2u, 7u, 9u, 33u, 64u}) {
    for (std::size_t D : {1u, 5u, 16u}) {
      CAPTURE(L);
      CAPTURE(D);
      const auto x = testing::random_normal(L, D, rng);
      const auto w = init_attention_weights<double>(D, L * 31 + D);
      const auto oracle = attention_naive(x, w);
      CHECK(testing::normwise_rel(attention_reference(x, w, simd::scalar_kernels<double>()), oracle) < 1e-10);
      CHECK(testing::normwise_rel(attention_reference(x, w), oracle) < 1e-10);
    }
  }
}

TEST_CASE("float attention agrees across kernel tables") {
  Rng rng(2);
  Matrix<float> x(300, 16);
  fill_normal(x, rng);
  const auto w = init_attention_weights<float>(16, 3);
  const auto a = attention_reference(x, w, simd::scalar_kernels<float>());
  const auto b = attention_reference(x, w);
  CHECK(testing::normwise_rel(a, b) < 1e-5);
}

TEST_CASE("trimmed mean drops the extremes") {
  CHECK(trimmed_mean({5, 1, 100, 3, 4}) == doctest::Approx(4.0));
  CHECK(trimmed_mean({2, 4}) == doctest::Approx(3.0));
  CHECK_THROWS_AS(trimmed_mean({}), ContractError);
}

TEST_CASE("benchmark records, truncation and CSV round trip") {
  BenchOptions opt;
  opt.lengths = {64, 128, 256};
  opt.dim = 8;
  opt.state = 4;
  const auto recs = run_scaling_benchmark(opt);
  REQUIRE(recs.size() == 6);
  for (const auto& r : recs) {
    CHECK(r.wall_ns > 0.0);
    CHECK(r.flops_model > 0);
    CHECK(r.repeats == 5);
    CHECK(r.trimmed);
    CHECK(!r.truncated);
  }
  const auto again = run_scaling_benchmark(opt);
  for (std::size_t i = 0; i < recs.size(); ++i) CHECK(again[i].flops_model == recs[i].flops_model);

  const std::string text = format_records(recs);
  CHECK(text.rfind("kernel,L,D,N,flops,wall_ns,peak_bytes\n", 0) == 0);
  const auto parsed = parse_records(text);
  REQUIRE(parsed.size() == 6);
  CHECK(format_records(parsed) == text);
  for (std::size_t i = 1; i < parsed.size(); ++i) {
    const auto& a = parsed[i - 1];
    const auto& b = parsed[i];
    CHECK((to_string(a.kernel) < to_string(b.kernel) || (a.kernel == b.kernel && a.L < b.L)));
  }
  CHECK(parsed[0].kernel == Kernel::kAttention);
  CHECK(parsed[0].wall_ns == recs[0].wall_ns);

  const BenchRecord one = recs.front();
  const std::string single = format_records({one});
  CHECK(std::count(single.begin(), single.end(), '\n') == 2);

  opt.max_bytes = bytes_scan(128, 8, 4);
  const auto cut = run_scaling_benchmark(opt);
  for (const auto& r : cut) CHECK(r.truncated == (r.peak_bytes_model > opt.max_bytes));
  CHECK(cut.back().truncated);
  CHECK(!cut[3].truncated);
  const auto cut_text = format_records(cut);
  CHECK(cut_text.find("truncated") != std::string::npos);
  const auto cut_back = parse_records(cut_text);
  CHECK(format_records(cut_back) == cut_text);

  const auto dir = std::filesystem::temp_directory_path() / "ssmtrack_bench_test";
  std::filesystem::create_directories(dir);
  emit_records(recs, dir / "bench.csv");
  CHECK(format_records(read_records(dir / "bench.csv")) == text);
  CHECK_THROWS_AS(emit_records(recs, dir / "no" / "such" / "dir.csv"), IoError);
  CHECK_THROWS_AS(parse_records("kernel,L\n"), IoError);
  CHECK_THROWS_AS(parse_records("kernel,L,D,N,flops,wall_ns,peak_bytes\nscan,1,2\n"), IoError);

  opt.repeats = 4;
  CHECK_THROWS_AS(run_scaling_benchmark(opt), ContractError);
  opt.repeats = 5;
  opt.lengths = {128, 64};
  CHECK_THROWS_AS(run_scaling_benchmark(opt), ContractError);
}

TEST_CASE("scaling ratios across doubling lengths") {
  BenchOptions opt;
  opt.lengths = {1u << 12, 1u << 13, 1u << 14};
  opt.dim = 64;
  opt.kernels = {Kernel::kScan};
  const auto scan = run_scaling_benchmark(opt);
  for (std::size_t i = 1; i < scan.size(); ++i) {
    const double ratio = scan[i].wall_ns / scan[i - 1].wall_ns;
    CAPTURE(ratio);
    CHECK(ratio >= 1.6);
    CHECK(ratio <= 2.6);
  }
  opt.lengths = {1u << 10, 1u << 11, 1u << 12};
  opt.kernels = {Kernel::kAttention};
  const auto att = run_scaling_benchmark(opt);
  for (std::size_t i = 1; i < att.size(); ++i) {
    const double ratio = att[i].wall_ns / att[i - 1].wall_ns;
    CAPTURE(ratio);
    CHECK(ratio >= 3.0);
    CHECK(ratio <= 5.5);
  }
  CHECK(loglog_slope(att, Kernel::kAttention) > 1.6);
}
