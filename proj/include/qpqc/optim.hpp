#pragma once

#include <span>
#include <vector>

namespace qpqc {

struct LossResult {
  double loss = 0.0;
  std::vector<double> d_scores;
};

/// Softmax over the scores, then negative log-likelihood of `label`.
LossResult cross_entropy(std::span<const double> scores, int label);

/// Negative log-likelihood of the class probabilities renormalized to sum to
/// one (Histogram heads, no softmax).
LossResult histogram_nll(std::span<const double> probabilities, int label);

struct AdamConfig {
  double learning_rate = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void validate() const;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  long step = 0;
};

/// Bias-corrected Adam update, no weight decay.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state, const AdamConfig& cfg);

}  // namespace qpqc
