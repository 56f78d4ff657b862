// Copyright 2026 The ssmtrack Authors. Apache 2.0 License.
#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "ssmtrack/core/tensor.hpp"

namespace ssmtrack {

using Rng = std::mt19937_64;

// Normal sample truncated (by resampling) to +-2 standard deviations.
inline double truncated_normal(Rng& rng, double stddev) {
  std::normal_distribution<double> dist(0.0, 1.0);
  for (;;) {
    const double z = dist(rng);
    if (std::abs(z) <= 2.0) return z * stddev;
  }
}

template <typename T>
void fill_truncated_normal(Matrix<T>& m, Rng& rng, double stddev) {
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = static_cast<T>(truncated_normal(rng, stddev));
}

template <typename T>
void fill_normal(Matrix<T>& m, Rng& rng, double stddev = 1.0) {
  std::normal_distribution<double> dist(0.0, stddev);
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = static_cast<T>(dist(rng));
}

template <typename T>
void fill_uniform(Matrix<T>& m, Rng& rng, double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = static_cast<T>(dist(rng));
}

}  // namespace ssmtrack
