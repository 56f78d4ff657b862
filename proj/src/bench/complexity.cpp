// Copyright 2026 The ssmtrack Authors. Apache 2.0 License.
#include "ssmtrack/bench/complexity.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <new>
#include <numeric>
#include <sstream>

#include "ssmtrack/core/random.hpp"
#include "ssmtrack/ssm/scan.hpp"

namespace ssmtrack::bench {

std::string to_string(Kernel k) { return k == Kernel::kAttention ? "attention" : "scan"; }

Kernel parse_kernel(const std::string& s) {
  if (s == "attention") return Kernel::kAttention;
  if (s == "scan") return Kernel::kScan;
  throw ContractError("unknown bench kernel '" + s + "' (expected attention or scan)");
}

std::uint64_t flops_attention(std::uint64_t L, std::uint64_t D) {
  require(L >= 1 && D >= 1, "flops_attention: L and D must be >= 1");
  return 4 * L * L * D + 8 * L * D * D;
}

std::uint64_t flops_scan(std::uint64_t L, std::uint64_t D, std::uint64_t N) {
  require(L >= 1 && D >= 1 && N >= 1, "flops_scan: L, D and N must be >= 1");
  return kScanOpsPerElement * L * D * N;
}

std::uint64_t bytes_attention(std::uint64_t L, std::uint64_t D) {
  // x, Q, K^T, V^T, context, output; four weight matrices; one query block of score rows.
  return 4 * (6 * L * D + 4 * D * D + kAttentionQueryBlock * L);
}

std::uint64_t bytes_scan(std::uint64_t L, std::uint64_t D, std::uint64_t N) {
  // x, delta, y (L x D); B, C (L x N); A, h (D x N).
  return 4 * (3 * L * D + 2 * L * N + 2 * D * N);
}

template <typename T>
AttentionWeights<T> init_attention_weights(std::size_t dim, std::uint64_t seed) {
  require(dim >= 1, "init_attention_weights: dim must be >= 1");
  Rng rng(seed);
  const double std = 1.0 / std::sqrt(static_cast<double>(dim));
  AttentionWeights<T> w{Matrix<T>(dim, dim), Matrix<T>(dim, dim), Matrix<T>(dim, dim), Matrix<T>(dim, dim)};
  for (auto* m : {&w.wq, &w.wk, &w.wv, &w.wo}) fill_normal(*m, rng, std);
  return w;
}

namespace {

template <typename T>
void check_attention_shapes(const Matrix<T>& x, const AttentionWeights<T>& w) {
  const std::size_t d = x.cols();
  require(x.rows() >= 1 && d >= 1, "attention: empty input");
  for (const auto* m : {&w.wq, &w.wk, &w.wv, &w.wo}) {
    require(m->rows() == d && m->cols() == d, "attention: weights must be D x D");
  }
}

// out = x W, row by row.
template <typename T>
Matrix<T> project(const Matrix<T>& x, const Matrix<T>& w, const simd::KernelSet<T>& k) {
  Matrix<T> out(x.rows(), w.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t d = 0; d < x.cols(); ++d) k.axpy(x(i, d), w.row(d).data(), out.row(i).data(), w.cols());
  }
  return out;
}

template <typename T>
Matrix<T> transpose(const Matrix<T>& m) {
  Matrix<T> t(m.cols(), m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) t(j, i) = m(i, j);
  }
  return t;
}

}  // namespace

template <typename T>
Matrix<T> attention_reference(const Matrix<T>& x, const AttentionWeights<T>& w, const simd::KernelSet<T>& k) {
  check_attention_shapes(x, w);
  const std::size_t L = x.rows(), D = x.cols();
  Matrix<T> q = project(x, w.wq, k);
  const T scale = T(1) / std::sqrt(static_cast<T>(D));
  for (std::size_t i = 0; i < q.size(); ++i) q[i] *= scale;
  const Matrix<T> kt = transpose(project(x, w.wk, k));
  const Matrix<T> vt = transpose(project(x, w.wv, k));
  Matrix<T> ctx(L, D);
  Matrix<T> scores(kAttentionQueryBlock, L);
  for (std::size_t q0 = 0; q0 < L; q0 += kAttentionQueryBlock) {
    const std::size_t qn = std::min(kAttentionQueryBlock, L - q0);
    scores.fill(T(0));
    for (std::size_t j0 = 0; j0 < L; j0 += kAttentionKeyTile) {
      const std::size_t jn = std::min(kAttentionKeyTile, L - j0);
      for (std::size_t qi = 0; qi < qn; ++qi) {
        T* s = scores.row(qi).data() + j0;
        for (std::size_t d = 0; d < D; ++d) k.axpy(q(q0 + qi, d), kt.row(d).data() + j0, s, jn);
      }
    }
    for (std::size_t qi = 0; qi < qn; ++qi) {
      T* s = scores.row(qi).data();
      const T m = *std::max_element(s, s + L);
      for (std::size_t j = 0; j < L; ++j) s[j] -= m;
      k.vexp(s, s, L);
    }
    T sums[kAttentionQueryBlock] = {};
    for (std::size_t qi = 0; qi < qn; ++qi) {
      const T* s = scores.row(qi).data();
      sums[qi] = std::accumulate(s, s + L, T(0));
    }
    for (std::size_t j0 = 0; j0 < L; j0 += kAttentionKeyTile) {
      const std::size_t jn = std::min(kAttentionKeyTile, L - j0);
      for (std::size_t qi = 0; qi < qn; ++qi) {
        const T* s = scores.row(qi).data() + j0;
        for (std::size_t d = 0; d < D; ++d) ctx(q0 + qi, d) += k.dot(s, vt.row(d).data() + j0, jn);
      }
    }
    for (std::size_t qi = 0; qi < qn; ++qi) {
      for (std::size_t d = 0; d < D; ++d) ctx(q0 + qi, d) /= sums[qi];
    }
  }
  return project(ctx, w.wo, k);
}

template <typename T>
Matrix<T> attention_reference(const Matrix<T>& x, const AttentionWeights<T>& w) {
  return attention_reference(x, w, simd::active_kernels<T>());
}

template <typename T>
Matrix<T> attention_naive(const Matrix<T>& x, const AttentionWeights<T>& w) {
  check_attention_shapes(x, w);
  const std::size_t L = x.rows(), D = x.cols();
  auto matmul = [](const Matrix<T>& a, const Matrix<T>& b) {
    Matrix<T> c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
      for (std::size_t j = 0; j < b.cols(); ++j) {
        T acc = 0;
        for (std::size_t t = 0; t < a.cols(); ++t) acc += a(i, t) * b(t, j);
        c(i, j) = acc;
      }
    return c;
  };
  const Matrix<T> q = matmul(x, w.wq), kk = matmul(x, w.wk), v = matmul(x, w.wv);
  Matrix<T> s(L, L);
  for (std::size_t i = 0; i < L; ++i)
    for (std::size_t j = 0; j < L; ++j) {
      T acc = 0;
      for (std::size_t d = 0; d < D; ++d) acc += q(i, d) * kk(j, d);
      s(i, j) = acc / std::sqrt(static_cast<T>(D));
    }
  Matrix<T> ctx(L, D);
  for (std::size_t i = 0; i < L; ++i) {
    T m = s(i, 0);
    for (std::size_t j = 1; j < L; ++j) m = std::max(m, s(i, j));
    T z = 0;
    for (std::size_t j = 0; j < L; ++j) z += std::exp(s(i, j) - m);
    for (std::size_t j = 0; j < L; ++j) {
      const T p = std::exp(s(i, j) - m) / z;
      for (std::size_t d = 0; d < D; ++d) ctx(i, d) += p * v(j, d);
    }
  }
  return matmul(ctx, w.wo);
}

template AttentionWeights<float> init_attention_weights(std::size_t, std::uint64_t);
template AttentionWeights<double> init_attention_weights(std::size_t, std::uint64_t);
template Matrix<float> attention_reference(const Matrix<float>&, const AttentionWeights<float>&,
                                           const simd::KernelSet<float>&);
template Matrix<double> attention_reference(const Matrix<double>&, const AttentionWeights<double>&,
                                            const simd::KernelSet<double>&);
template Matrix<float> attention_reference(const Matrix<float>&, const AttentionWeights<float>&);
template Matrix<double> attention_reference(const Matrix<double>&, const AttentionWeights<double>&);
template Matrix<float> attention_naive(const Matrix<float>&, const AttentionWeights<float>&);
template Matrix<double> attention_naive(const Matrix<double>&, const AttentionWeights<double>&);

double trimmed_mean(std::vector<double> samples) {
  require(!samples.empty(), "trimmed_mean: no samples");
  std::sort(samples.begin(), samples.end());
  const std::size_t drop = samples.size() >= 3 ? 1 : 0;
  double sum = 0.0;
  for (std::size_t i = drop; i < samples.size() - drop; ++i) sum += samples[i];
  return sum / static_cast<double>(samples.size() - 2 * drop);
}

namespace {

template <class F>
double time_ns(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  const auto t1 = std::chrono::steady_clock::now();
  return static_cast<double>(std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count());
}

// Keeps results observable so the timed work is not elided.
volatile float g_sink = 0.0f;

BenchRecord measure(Kernel kernel, std::uint64_t L, const BenchOptions& opt) {
  BenchRecord r;
  r.kernel = kernel;
  r.L = L;
  r.D = opt.dim;
  r.N = kernel == Kernel::kScan ? opt.state : 0;
  r.flops_model = kernel == Kernel::kScan ? flops_scan(L, opt.dim, opt.state) : flops_attention(L, opt.dim);
  r.peak_bytes_model = kernel == Kernel::kScan ? bytes_scan(L, opt.dim, opt.state) : bytes_attention(L, opt.dim);
  r.repeats = opt.repeats;
  r.trimmed = opt.repeats >= 3;
  try {
    if (r.peak_bytes_model > opt.max_bytes) throw std::bad_alloc();
    Rng rng(opt.seed ^ (L * 0x9E3779B97F4A7C15ULL) ^ static_cast<std::uint64_t>(kernel));
    const std::size_t l = L, d = opt.dim, n = opt.state;
    std::vector<double> samples;
    if (kernel == Kernel::kScan) {
      Matrix<float> x(l, d), delta(l, d), B(l, n), C(l, n), A(d, n);
      fill_normal(x, rng);
      fill_uniform(delta, rng, 0.001, 0.1);
      fill_normal(B, rng);
      fill_normal(C, rng);
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < n; ++j) A(i, j) = -static_cast<float>(j + 1);
      const auto in = ssm::make_scan_inputs(std::move(x), std::move(delta), std::move(B), std::move(C), std::move(A));
      for (std::size_t i = 0; i < opt.warmups + opt.repeats; ++i) {
        const double ns = time_ns([&] { g_sink = g_sink + ssm::selective_scan(in).y[0]; });
        if (i >= opt.warmups) samples.push_back(ns);
      }
    } else {
      Matrix<float> x(l, d);
      fill_normal(x, rng);
      const auto w = init_attention_weights<float>(d, opt.seed + 1);
      for (std::size_t i = 0; i < opt.warmups + opt.repeats; ++i) {
        const double ns = time_ns([&] { g_sink = g_sink + attention_reference(x, w)[0]; });
        if (i >= opt.warmups) samples.push_back(ns);
      }
    }
    r.wall_ns = std::max(1.0, trimmed_mean(samples));
  } catch (const std::bad_alloc&) {
    r.truncated = true;
    r.wall_ns = 0.0;
  }
  return r;
}

}  // namespace

std::vector<BenchRecord> run_scaling_benchmark(const BenchOptions& opt) {
  require(!opt.lengths.empty(), "run_scaling_benchmark: no lengths");
  require(std::is_sorted(opt.lengths.begin(), opt.lengths.end()), "run_scaling_benchmark: lengths must be ascending");
  require(opt.lengths.front() >= 1, "run_scaling_benchmark: lengths must be >= 1");
  require(opt.repeats >= 5, "run_scaling_benchmark: repeats must be >= 5");
  require(opt.dim >= 1 && opt.state >= 1, "run_scaling_benchmark: dims must be >= 1");
  std::vector<BenchRecord> out;
  for (Kernel k : opt.kernels)
    for (std::uint64_t L : opt.lengths) out.push_back(measure(k, L, opt));
  return out;
}

double loglog_slope(const std::vector<BenchRecord>& records, Kernel kernel) {
  std::vector<double> xs, ys;
  for (const auto& r : records) {
    if (r.kernel != kernel || r.truncated) continue;
    xs.push_back(std::log(static_cast<double>(r.L)));
    ys.push_back(std::log(r.wall_ns));
  }
  require(xs.size() >= 2, "loglog_slope: need at least two untruncated records");
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  require(sxx > 0.0, "loglog_slope: lengths must differ");
  return sxy / sxx;
}

namespace {

constexpr char kHeader[] = "kernel,L,D,N,flops,wall_ns,peak_bytes";

std::string fmt(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

template <typename U>
U parse_num(const std::string& s, const std::string& what) {
  U v{};
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) throw IoError("bench CSV: bad " + what + " '" + s + "'");
  return v;
}

}  // namespace

std::string format_records(std::vector<BenchRecord> records) {
  require(!records.empty(), "emit_records: no records");
  std::stable_sort(records.begin(), records.end(), [](const BenchRecord& a, const BenchRecord& b) {
    const auto ka = to_string(a.kernel), kb = to_string(b.kernel);
    return ka != kb ? ka < kb : a.L < b.L;
  });
  std::string out = std::string(kHeader) + "\n";
  for (const auto& r : records) {
    out += to_string(r.kernel) + "," + std::to_string(r.L) + "," + std::to_string(r.D) + "," + std::to_string(r.N) +
           "," + std::to_string(r.flops_model) + "," + (r.truncated ? std::string("truncated") : fmt(r.wall_ns)) +
           "," + std::to_string(r.peak_bytes_model) + "\n";
  }
  return out;
}

void emit_records(const std::vector<BenchRecord>& records, const std::filesystem::path& path) {
  const std::string text = format_records(records);
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open for writing: " + path.string());
  os << text;
  if (!os) throw IoError("write failed: " + path.string());
}

std::vector<BenchRecord> parse_records(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line != kHeader) throw IoError("bench CSV: missing header");
  std::vector<BenchRecord> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    if (f.size() != 7) throw IoError("bench CSV: expected 7 fields in '" + line + "'");
    BenchRecord r;
    try {
      r.kernel = parse_kernel(f[0]);
    } catch (const ContractError& e) {
      throw IoError(std::string("bench CSV: ") + e.what());
    }
    r.L = parse_num<std::uint64_t>(f[1], "L");
    r.D = parse_num<std::uint64_t>(f[2], "D");
    r.N = parse_num<std::uint64_t>(f[3], "N");
    r.flops_model = parse_num<std::uint64_t>(f[4], "flops");
    if (f[5] == "truncated") {
      r.truncated = true;
    } else {
      r.wall_ns = parse_num<double>(f[5], "wall_ns");
    }
    r.peak_bytes_model = parse_num<std::uint64_t>(f[6], "peak_bytes");
    out.push_back(r);
  }
  return out;
}

std::vector<BenchRecord> read_records(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open for reading: " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_records(ss.str());
}

}  // namespace ssmtrack::bench
