#include "qpqc/metrics.hpp"

#include "qpqc/error.hpp"

namespace qpqc {

ClassificationMetrics compute_metrics(std::span<const int> labels, std::span<const int> predictions, int class_count) {
  if (labels.size() != predictions.size()) throw ShapeError("compute_metrics: label/prediction length mismatch");
  if (class_count < 1) throw ShapeError("compute_metrics: class_count must be positive");
  const auto k = static_cast<std::size_t>(class_count);
  ClassificationMetrics m;
  m.confusion.assign(k, std::vector<long>(k, 0));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= class_count || predictions[i] < 0 || predictions[i] >= class_count) {
      throw ShapeError("compute_metrics: class index out of range");
    }
    ++m.confusion[static_cast<std::size_t>(labels[i])][static_cast<std::size_t>(predictions[i])];
  }
  if (labels.empty()) return m;
  long correct = 0;
  for (std::size_t c = 0; c < k; ++c) {
    long predicted = 0, actual = 0;
    for (std::size_t o = 0; o < k; ++o) {
      predicted += m.confusion[o][c];
      actual += m.confusion[c][o];
    }
    const long tp = m.confusion[c][c];
    correct += tp;
    const double p = predicted > 0 ? static_cast<double>(tp) / static_cast<double>(predicted) : 0.0;
    const double r = actual > 0 ? static_cast<double>(tp) / static_cast<double>(actual) : 0.0;
    m.precision += p;
    m.recall += r;
    m.f1 += p + r > 0 ? 2 * p * r / (p + r) : 0.0;
  }
  m.precision /= static_cast<double>(k);
  m.recall /= static_cast<double>(k);
  m.f1 /= static_cast<double>(k);
  m.accuracy = static_cast<double>(correct) / static_cast<double>(labels.size());
  return m;
}

}  // namespace qpqc
