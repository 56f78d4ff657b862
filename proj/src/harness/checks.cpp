// Copyright 2026 The ssmtrack Authors. Apache 2.0 License.
#include "ssmtrack/harness/checks.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>

#include "ssmtrack/bench/complexity.hpp"
#include "ssmtrack/core/params.hpp"
#include "ssmtrack/core/random.hpp"
#include "ssmtrack/embed/coords.hpp"
#include "ssmtrack/embed/sequence.hpp"
#include "ssmtrack/harness/config.hpp"
#include "ssmtrack/harness/metrics.hpp"
#include "ssmtrack/harness/synthetic.hpp"
#include "ssmtrack/encoder/mamba.hpp"
#include "ssmtrack/ssm/scan.hpp"
#include "ssmtrack/track/memory.hpp"
#include "ssmtrack/track/tracker.hpp"

namespace ssmtrack::harness {

namespace {

CheckResult make_result(std::string name, double tol) {
  CheckResult r;
  r.name = std::move(name);
  r.tolerance = tol;
  r.passed = true;
  return r;
}

void record(CheckResult& r, double err, const std::string& where) {
  // NaN counts as a failure.
  if (!(err <= r.tolerance) && r.note.empty()) r.note = where;
  if (!(err <= r.tolerance)) r.passed = false;
  if (std::isnan(err) || err > r.worst) r.worst = std::isnan(err) ? std::numeric_limits<double>::infinity() : err;
}

void fail(CheckResult& r, const std::string& what) {
  r.passed = false;
  r.worst = std::max(r.worst, 1.0);
  if (r.note.empty()) r.note = what;
}

double normwise_rel(const Matrix<double>& a, const Matrix<double>& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num = std::max(num, std::abs(a[i] - b[i]));
    den = std::max(den, std::abs(b[i]));
  }
  return den == 0.0 ? num : num / den;
}

double rel_err(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-4});
}

double central_difference(const std::function<double()>& f, double& x, double step) {
  const double saved = x;
  x = saved + step;
  const double fp = f();
  x = saved - step;
  const double fm = f();
  x = saved;
  return (fp - fm) / (2.0 * step);
}

double inner(const Matrix<double>& a, const Matrix<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

Matrix<double> normal(std::size_t r, std::size_t c, Rng& rng, double std = 1.0) {
  Matrix<double> m(r, c);
  fill_normal(m, rng, std);
  return m;
}

std::size_t pick(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

// Positive step sizes spread over three decades; a fraction of instances uses
// tiny |delta * A| to exercise the first-order drive branch.
ssm::ScanInputs<double> random_scan(Rng& rng, std::size_t L, std::size_t D, std::size_t N, bool allow_euler) {
  std::uniform_real_distribution<double> log_dt(std::log(1e-3), std::log(1.0)), a(-8.0, -0.1), u(0.0, 1.0);
  Matrix<double> delta(L, D), A(D, N);
  for (std::size_t i = 0; i < delta.size(); ++i) delta[i] = std::exp(log_dt(rng));
  const bool euler = allow_euler && u(rng) < 0.1;
  for (std::size_t i = 0; i < A.size(); ++i) A[i] = euler ? -1e-5 * u(rng) - 1e-9 : a(rng);
  auto in = ssm::make_scan_inputs(normal(L, D, rng), std::move(delta), normal(L, N, rng), normal(L, N, rng),
                                  std::move(A));
  in.h0 = normal(D, N, rng);
  return in;
}

}  // namespace

std::string format_check(const CheckResult& r) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%s %s cases=%zu worst=%.3e tol=%.1e", r.passed ? "PASS" : "FAIL", r.name.c_str(),
                r.cases, r.worst, r.tolerance);
  std::string s = buf;
  if (!r.passed && !r.note.empty()) s += " first_failure=" + r.note;
  return s;
}

CheckResult check_scan_oracle(std::size_t instances, std::uint64_t seed, std::size_t max_len,
                              std::size_t max_channels, std::size_t max_state, double tol) {
  CheckResult r = make_result("scan_oracle", tol);
  Rng rng(seed);
  for (std::size_t i = 0; i < instances; ++i) {
    const auto in = random_scan(rng, pick(rng, 1, max_len), pick(rng, 1, max_channels), pick(rng, 1, max_state), true);
    const auto fast = ssm::selective_scan(in);
    const auto ref = ssm::selective_scan_oracle(in);
    const double e = std::max(normwise_rel(fast.y, ref.y), normwise_rel(fast.h_final, ref.h_final));
    record(r, e, "instance " + std::to_string(i));
    ++r.cases;
  }
  return r;
}

CheckResult check_gradients(std::size_t instances, std::uint64_t seed, double tol) {
  CheckResult r = make_result("gradients", tol);
  Rng rng(seed);
  for (std::size_t i = 0; i < instances; ++i) {
    const std::string where = "instance " + std::to_string(i);
    // Scan: every field of ScanGradients. A is kept away from the branch switch.
    auto in = random_scan(rng, pick(rng, 1, 10), pick(rng, 1, 4), pick(rng, 1, 4), false);
    const auto dy = normal(in.length(), in.channels(), rng);
    const auto dh = normal(in.channels(), in.state(), rng);
    const auto g = ssm::selective_scan_backward(in, dy, dh);
    auto loss = [&] {
      const auto out = ssm::selective_scan(in);
      return inner(out.y, dy) + inner(out.h_final, dh);
    };
    auto sweep = [&](Matrix<double>& wrt, const Matrix<double>& analytic, bool relative_step) {
      for (std::size_t k = 0; k < wrt.size(); ++k) {
        const double step = relative_step ? 1e-5 * std::abs(wrt[k]) : 1e-5 * std::max(std::abs(wrt[k]), 1.0);
        record(r, rel_err(analytic[k], central_difference(loss, wrt[k], step)), where);
      }
    };
    sweep(in.x, g.x, false);
    sweep(in.delta, g.delta, true);
    sweep(in.A, g.A, true);
    sweep(in.B, g.B, false);
    sweep(in.C, g.C, false);
    sweep(in.h0, g.h0, false);

    // Two-layer encoder input gradient.
    auto p = encoder::init_params<double>(seed * 7919 + i, encoder::EncoderDims::with_expansion(8, 4, 2));
    for (auto& [name, m] : array_list(p)) {
      if (name.find("A_log") != std::string::npos) continue;
      for (std::size_t k = 0; k < m->size(); ++k) (*m)[k] += 0.2 * truncated_normal(rng, 1.0);
    }
    auto seq = normal(pick(rng, 2, 8), 8, rng);
    const auto d_out = normal(seq.rows(), seq.cols(), rng);
    const auto d_seq = encoder::encoder_backward<double>(seq, p, d_out, nullptr);
    auto enc_loss = [&] { return inner(encoder::encoder_forward(seq, p), d_out); };
    for (std::size_t k = 0; k < seq.size(); ++k) {
      const double step = 1e-5 * std::max(std::abs(seq[k]), 1.0);
      record(r, rel_err(d_seq[k], central_difference(enc_loss, seq[k], step)), where + " (encoder)");
    }
    ++r.cases;
  }
  return r;
}

CheckResult check_zoh_semigroup(std::size_t trials, std::uint64_t seed, double tol) {
  CheckResult r = make_result("zoh_semigroup", tol);
  Rng rng(seed);
  std::uniform_real_distribution<double> dt(1e-3, 2.0), av(-8.0, -0.05), bv(-2.0, 2.0);
  for (std::size_t i = 0; i < trials; ++i) {
    const std::size_t D = pick(rng, 1, 4), N = pick(rng, 1, 4);
    Matrix<double> A(D, N), B(1, N), X(1, D), d1(1, D), d2(1, D), d12(1, D);
    for (std::size_t k = 0; k < A.size(); ++k) A[k] = av(rng);
    for (std::size_t k = 0; k < N; ++k) B[k] = bv(rng);
    for (std::size_t k = 0; k < D; ++k) {
      X[k] = bv(rng);
      d1[k] = dt(rng);
      d2[k] = dt(rng);
      d12[k] = d1[k] + d2[k];
    }
    const auto t1 = ssm::zoh_discretize(A, d1, B, X);
    const auto t2 = ssm::zoh_discretize(A, d2, B, X);
    const auto t12 = ssm::zoh_discretize(A, d12, B, X);
    double e = 0.0;
    for (std::size_t d = 0; d < D; ++d)
      for (std::size_t n = 0; n < N; ++n) {
        e = std::max(e, std::abs(t12.abar(0, d, n) - t2.abar(0, d, n) * t1.abar(0, d, n)));
        e = std::max(e, std::abs(t12.drive(0, d, n) - (t2.abar(0, d, n) * t1.drive(0, d, n) + t2.drive(0, d, n))));
      }
    record(r, e, "trial " + std::to_string(i));
    ++r.cases;
  }
  return r;
}

CheckResult check_template_selection(std::size_t max_frame, std::size_t max_capacity) {
  CheckResult r = make_result("template_selection", 0.0);
  for (std::size_t m = 1; m <= max_capacity; ++m) {
    for (std::size_t c = 0; c <= max_frame; ++c) {
      const auto s = track::select_template_indices(c, m);
      const std::string where = "C=" + std::to_string(c) + " M=" + std::to_string(m);
      ++r.cases;
      if (s.empty() || s.front() != 0) fail(r, where + " missing 0");
      if (s.size() > m) fail(r, where + " exceeds capacity");
      for (std::size_t k = 1; k < s.size(); ++k)
        if (s[k] <= s[k - 1]) fail(r, where + " not strictly increasing");
      if (c >= 1)
        for (std::size_t v : s)
          if (v >= c) fail(r, where + " index out of range");
      if (m == 1 && s != std::vector<std::size_t>{0}) fail(r, where + " M=1 must give {0}");
    }
  }
  return r;
}

CheckResult check_coordinate_vocabulary(std::size_t samples, std::uint64_t seed) {
  // Errors are reported as a ratio to the bound; 1 is the limit, with a hair for rounding of the bin center.
  CheckResult r = make_result("coordinate_vocabulary", 1.0 + 1e-9);
  Rng rng(seed);
  const int bins_grid[] = {2, 3, 10, 100, 400, 1000};
  const double alpha_grid[] = {1.0, 1.5, 2.0, 3.0};
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::size_t k = 0;
  for (std::size_t i = 0; i < samples; ++i, ++k) {
    const int nbins = bins_grid[k % std::size(bins_grid)];
    const double alpha = alpha_grid[(k / std::size(bins_grid)) % std::size(alpha_grid)];
    const double lo = 0.5 - alpha / 2.0;
    // Three quarters in range, the rest anywhere including non-finite values.
    double c;
    const double kind = u(rng);
    if (kind < 0.75) {
      c = lo + alpha * u(rng);
    } else if (kind < 0.97) {
      c = (u(rng) - 0.5) * 20.0;
    } else {
      const double specials[] = {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::infinity(),
                                 -std::numeric_limits<double>::infinity(), lo, lo + alpha};
      c = specials[pick(rng, 0, 4)];
    }
    const int b = embed::discretize_coordinate(c, nbins, alpha);
    ++r.cases;
    if (b < 1 || b > nbins) {
      fail(r, "bin " + std::to_string(b) + " outside [1, " + std::to_string(nbins) + "]");
      continue;
    }
    if (std::isfinite(c) && c >= lo && c <= lo + alpha) {
      const double err = std::abs(embed::dediscretize(b, nbins, alpha) - c);
      const double bound = alpha / (2.0 * nbins);
      record(r, err / bound, "c=" + std::to_string(c) + " nbins=" + std::to_string(nbins));
    }
  }
  return r;
}

CheckResult check_sequence_assembly(std::uint64_t seed) {
  CheckResult r = make_result("sequence_assembly", 0.0);
  Rng rng(seed);
  const std::size_t lz = 16, lx = 64, traj = 7, dim = 3;
  for (std::size_t m : {1u, 3u, 7u}) {
    for (bool prompts : {false, true}) {
      embed::SequenceParts<double> parts;
      for (std::size_t f = 0; f < m; ++f) {
        parts.templates_rgb.push_back(normal(lz, dim, rng));
        parts.templates_tir.push_back(normal(lz, dim, rng));
      }
      parts.search_rgb = normal(lx, dim, rng);
      parts.search_tir = normal(lx, dim, rng);
      if (prompts) parts.prompts = embed::PromptTokens<double>{normal(4 * traj, dim, rng), normal(4, dim, rng), {}};
      const auto canonical = embed::build_sequence(parts, embed::ConcatMode::kTsts, embed::ScanOrder::kSpatial);
      const auto ctags = embed::canonical_tags(m, lz, lx, traj, prompts);
      const std::size_t expect = 2 * m * lz + 2 * lx + (prompts ? 4 * traj + 4 : 0);
      for (auto mode : {embed::ConcatMode::kTsts, embed::ConcatMode::kTtss, embed::ConcatMode::kCrossTs}) {
        for (auto order : {embed::ScanOrder::kSpatial, embed::ScanOrder::kTemporal}) {
          const std::string where = "M=" + std::to_string(m) + " mode=" + embed::to_string(mode) +
                                    " order=" + embed::to_string(order) + (prompts ? " prompts" : "");
          ++r.cases;
          const auto seq = embed::build_sequence(parts, mode, order);
          if (seq.length() != expect || embed::sequence_length(m, lz, lx, traj, prompts) != expect) {
            fail(r, where + " length");
            continue;
          }
          auto a = seq.tags, b = ctags;
          std::sort(a.begin(), a.end());
          std::sort(b.begin(), b.end());
          if (a != b) fail(r, where + " tag multiset");
          for (std::size_t i = 0; i < seq.length(); ++i) {
            if (seq.tags[i] != ctags[seq.source[i]]) fail(r, where + " tag/source mismatch");
          }
          if (!(embed::to_canonical(seq.tokens, seq.source) == canonical.tokens)) fail(r, where + " inverse");
          const auto inv = embed::invert_permutation(seq.source);
          for (std::size_t i = 0; i < inv.size(); ++i)
            if (seq.source[inv[i]] != i) fail(r, where + " invert_permutation");
        }
      }
    }
  }
  return r;
}

CheckResult check_simd_equivalence(std::uint64_t seed) {
  CheckResult r = make_result("simd_equivalence", 1e-12);
  Rng rng(seed);
  const auto& scalar = simd::scalar_kernels<double>();
  const auto& active = simd::active_kernels<double>();
  for (int i = 0; i < 20; ++i) {
    const auto in = random_scan(rng, pick(rng, 1, 64), pick(rng, 1, 24), pick(rng, 1, 16), true);
    const auto a = ssm::selective_scan(in, scalar), b = ssm::selective_scan(in, active);
    record(r, std::max(normwise_rel(b.y, a.y), normwise_rel(b.h_final, a.h_final)), "scan " + std::to_string(i));
    ++r.cases;
  }
  for (std::size_t L : {5u, 40u}) {
    const auto x = normal(L, 12, rng);
    const auto w = bench::init_attention_weights<double>(12, seed + L);
    record(r, normwise_rel(bench::attention_reference(x, w, active), bench::attention_reference(x, w, scalar)),
           "attention L=" + std::to_string(L));
    ++r.cases;
  }
  r.name += std::string("[") + std::string(simd::active_isa()) + "]";
  return r;
}

CheckResult check_oracle_tracking(std::uint64_t seed) {
  CheckResult r = make_result("oracle_tracking", 1e-12);
  for (auto profile : {MotionProfile::kLinear, MotionProfile::kSinusoidal, MotionProfile::kOccluded}) {
    VideoSpec spec;
    spec.seed = seed + static_cast<std::uint64_t>(profile);
    spec.length = 24;
    spec.profile = profile;
    const auto v = generate_synthetic_video(spec);
    track::OraclePredictor oracle(v.gt);
    const auto recs = track::track_sequence(v.rgb, v.tir, v.gt.front(), oracle, track::TrackerOptions{});
    std::vector<Box> pred;
    for (const auto& rec : recs) pred.push_back(rec.box);
    const auto m = compute_metrics(pred, v.gt);
    double worst = 0.0;
    for (std::size_t i = 0; i < m.ious.size(); ++i) worst = std::max({worst, 1.0 - m.ious[i], m.center_errors[i]});
    record(r, worst, to_string(profile));
    ++r.cases;
  }
  return r;
}

CheckResult check_config_roundtrip(std::size_t trials, std::uint64_t seed) {
  CheckResult r = make_result("config_roundtrip", 0.0);
  Rng rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t i = 0; i < trials; ++i) {
    RunConfig c;
    c.templates = pick(rng, 1, 7);
    c.trajectory = pick(rng, 0, 7);
    c.nbins = static_cast<int>(pick(rng, 2, 1000));
    c.alpha = 1.0 + 2.0 * u(rng);
    c.lr_stage1 = u(rng) * 0.1;
    c.lr_stage2 = c.lr_stage1 / 10.0;
    c.prompt_noise = u(rng);
    c.seed = rng();
    c.sample_mode = u(rng) < 0.5 ? SampleMode::kRandom : SampleMode::kUniform;
    c.concat_mode = static_cast<embed::ConcatMode>(pick(rng, 0, 2));
    c.scan_order = u(rng) < 0.5 ? embed::ScanOrder::kSpatial : embed::ScanOrder::kTemporal;
    ++r.cases;
    try {
      if (!(parse_config(serialize_config(c)) == c)) fail(r, "trial " + std::to_string(i));
    } catch (const std::exception& e) {
      fail(r, std::string("trial ") + std::to_string(i) + ": " + e.what());
    }
  }
  return r;
}

}  // namespace ssmtrack::harness
