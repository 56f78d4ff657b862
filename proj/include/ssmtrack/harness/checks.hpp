// Copyright 2026 The ssmtrack Authors. Apache 2.0 License.
#pragma once
// Randomized invariant checks shared by the `selftest` subcommand and the
// acceptance suite. Each check is deterministic in its seed.
#include <cstddef>
#include <cstdint>
#include <string>

namespace ssmtrack::harness {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::size_t cases = 0;
  double worst = 0.0;      // largest observed error (0 for exact checks)
  double tolerance = 0.0;  // pass threshold on `worst`
  std::string note;        // first failure, if any
};

// `PASS name cases=... worst=... tol=...`; fixed formatting.
std::string format_check(const CheckResult& r);

// selective_scan against the transfer-product oracle on instances with
// L <= max_len, D <= max_channels, N <= max_state; infinity-norm relative error.
CheckResult check_scan_oracle(std::size_t instances, std::uint64_t seed, std::size_t max_len = 128,
                              std::size_t max_channels = 16, std::size_t max_state = 8, double tol = 1e-10);

// Every ScanGradients field and the input gradient of a 2-layer encoder against
// central differences; entry-wise relative error with a 1e-4 absolute floor.
CheckResult check_gradients(std::size_t instances, std::uint64_t seed, double tol = 1e-4);

// ZOH composition: Abar(d1 + d2) = Abar(d2) Abar(d1) and
// drive(d1 + d2) = Abar(d2) drive(d1) + drive(d2) for a constant input.
CheckResult check_zoh_semigroup(std::size_t trials, std::uint64_t seed, double tol = 1e-12);

// Exhaustive over current frame in [0, max_frame] and capacity in [1, max_capacity].
CheckResult check_template_selection(std::size_t max_frame = 10000, std::size_t max_capacity = 16);

// Bin totality on arbitrary inputs and the alpha / (2 nbins) round-trip bound in range.
CheckResult check_coordinate_vocabulary(std::size_t samples, std::uint64_t seed);

// Lengths, tag-multiset permutation and exact inverse for M in {1, 3, 7} across all modes and orders.
CheckResult check_sequence_assembly(std::uint64_t seed);

// Vector kernel tables against the scalar reference (passes trivially without AVX2).
CheckResult check_simd_equivalence(std::uint64_t seed);

// Oracle-predictor tracking of synthetic videos must reproduce ground truth (SR = PR = 1).
CheckResult check_oracle_tracking(std::uint64_t seed);

// serialize/parse identity on randomized run configurations.
CheckResult check_config_roundtrip(std::size_t trials, std::uint64_t seed);

}  // namespace ssmtrack::harness
