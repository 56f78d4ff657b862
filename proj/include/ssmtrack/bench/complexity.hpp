// Copyright 2026 The ssmtrack Authors. Apache 2.0 License.
#pragma once

// Wall-time scaling of the selective scan against an exact softmax-attention
// reference, with analytic FLOP and working-set models.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ssmtrack/core/tensor.hpp"
#include "ssmtrack/simd/kernels.hpp"

namespace ssmtrack::bench {

enum class Kernel { kAttention, kScan };

std::string to_string(Kernel k);
Kernel parse_kernel(const std::string& s);

// Per-element op count of the scan recurrence: discretize (exp, multiply, drive) 5,
// state update 2, output contraction 2, skip 1.
inline constexpr std::uint64_t kScanOpsPerElement = 10;

// Score and value matmuls (4 L^2 D) plus the four projections (8 L D^2).
std::uint64_t flops_attention(std::uint64_t L, std::uint64_t D);
std::uint64_t flops_scan(std::uint64_t L, std::uint64_t D, std::uint64_t N);

// Working-set bytes of the implementations below for float data.
std::uint64_t bytes_attention(std::uint64_t L, std::uint64_t D);
std::uint64_t bytes_scan(std::uint64_t L, std::uint64_t D, std::uint64_t N);

inline constexpr std::size_t kAttentionQueryBlock = 8;
inline constexpr std::size_t kAttentionKeyTile = 256;

template <typename T>
struct AttentionWeights {
  Matrix<T> wq, wk, wv, wo;  // D x D each
};

template <typename T>
AttentionWeights<T> init_attention_weights(std::size_t dim, std::uint64_t seed);

// Single-head softmax(Q K^T / sqrt(D)) V with input and output projections. Exact
// two-pass softmax per query row; keys are streamed in tiles so memory stays O(L D).
template <typename T>
Matrix<T> attention_reference(const Matrix<T>& x, const AttentionWeights<T>& w, const simd::KernelSet<T>& kernels);

template <typename T>
Matrix<T> attention_reference(const Matrix<T>& x, const AttentionWeights<T>& w);

// Materializes the full L x L score matrix with plain loops; test oracle.
template <typename T>
Matrix<T> attention_naive(const Matrix<T>& x, const AttentionWeights<T>& w);

struct BenchRecord {
  Kernel kernel = Kernel::kScan;
  std::uint64_t L = 0, D = 0, N = 0;
  std::uint64_t flops_model = 0;
  double wall_ns = 0.0;  // trimmed mean
  std::uint64_t peak_bytes_model = 0;
  std::size_t repeats = 0;
  bool trimmed = false;
  bool truncated = false;  // allocation failed; wall_ns is meaningless

  bool operator==(const BenchRecord&) const = default;
};

struct BenchOptions {
  std::vector<std::uint64_t> lengths;  // ascending
  std::uint64_t dim = 64;
  std::uint64_t state = 16;
  std::size_t repeats = 5;
  std::size_t warmups = 2;
  std::uint64_t seed = 0;
  std::vector<Kernel> kernels = {Kernel::kAttention, Kernel::kScan};
  // Runs whose modeled working set exceeds this are recorded as truncated without allocating.
  std::uint64_t max_bytes = std::uint64_t(8) << 30;
};

// Times float kernels with the active SIMD table, single-threaded.
std::vector<BenchRecord> run_scaling_benchmark(const BenchOptions& opt);

// Mean after dropping the lowest and highest sample (plain mean below 3 samples).
double trimmed_mean(std::vector<double> samples);

// Least-squares slope of log(wall_ns) against log(L) for one kernel's untruncated records.
double loglog_slope(const std::vector<BenchRecord>& records, Kernel kernel);

// CSV with header `kernel,L,D,N,flops,wall_ns,peak_bytes`, rows sorted by (kernel, L).
// Truncated records carry the literal `truncated` in the wall_ns column.
std::string format_records(std::vector<BenchRecord> records);
void emit_records(const std::vector<BenchRecord>& records, const std::filesystem::path& path);
std::vector<BenchRecord> parse_records(const std::string& text);
std::vector<BenchRecord> read_records(const std::filesystem::path& path);

}  // namespace ssmtrack::bench
