// Copyright 2026 The ssmtrack Authors. Apache 2.0 License.
#include "ssmtrack/harness/metrics.hpp"

#include "ssmtrack/core/errors.hpp"

namespace ssmtrack::harness {

MetricReport compute_metrics(const std::vector<Box>& pred, const std::vector<Box>& gt) {
  require(pred.size() == gt.size(), "compute_metrics: " + std::to_string(pred.size()) + " predictions for " +
                                        std::to_string(gt.size()) + " ground-truth boxes");
  MetricReport r;
  if (gt.empty()) return r;
  const double n = static_cast<double>(gt.size());
  std::size_t precise = 0;
  std::vector<std::size_t> hits(kSuccessThresholds, 0);
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const double o = iou(pred[i], gt[i]);
    const double e = center_distance(pred[i], gt[i]);
    r.ious.push_back(o);
    r.center_errors.push_back(e);
    if (e <= kPrecisionThresholdPx) ++precise;
    if (o <= 0.0) continue;
    for (int k = 0; k < kSuccessThresholds; ++k) {
      if (o >= static_cast<double>(k) / (kSuccessThresholds - 1)) ++hits[k];
    }
  }
  r.precision = static_cast<double>(precise) / n;
  double sum = 0.0;
  for (std::size_t h : hits) sum += static_cast<double>(h) / n;
  r.success = sum / kSuccessThresholds;
  return r;
}

}  // namespace ssmtrack::harness
