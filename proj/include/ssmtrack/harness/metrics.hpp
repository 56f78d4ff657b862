// Copyright 2026 The ssmtrack Authors. Apache 2.0 License.
#pragma once

#include <vector>

#include "ssmtrack/core/box.hpp"

namespace ssmtrack::harness {

inline constexpr double kPrecisionThresholdPx = 20.0;
inline constexpr int kSuccessThresholds = 21;

struct MetricReport {
  double precision = 0.0;  // PR: fraction of frames with center error <= 20 px
  double success = 0.0;    // SR: mean success rate over IoU thresholds 0, 0.05, ..., 1
  std::vector<double> ious;
  std::vector<double> center_errors;
};

// A frame succeeds at threshold t when IoU > 0 and IoU >= t.
MetricReport compute_metrics(const std::vector<Box>& pred, const std::vector<Box>& gt);

}  // namespace ssmtrack::harness
