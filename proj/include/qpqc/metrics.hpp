#pragma once

#include <span>
#include <vector>

namespace qpqc {

struct ClassificationMetrics {
  double accuracy = 0.0;
  double precision = 0.0;  // macro average
  double recall = 0.0;     // macro average
  double f1 = 0.0;         // mean of per-class F1
  std::vector<std::vector<long>> confusion;  // [true][predicted]
};

/// Classes with no predictions (or no members) contribute 0 to the macro precision (recall).
ClassificationMetrics compute_metrics(std::span<const int> labels, std::span<const int> predictions, int class_count);

}  // namespace qpqc
