#include "qpqc/optim.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qpqc/error.hpp"

namespace qpqc {

namespace {

void check_label(std::size_t k, int label) {
  if (k < 2) throw ShapeError("loss needs at least 2 classes");
  if (label < 0 || static_cast<std::size_t>(label) >= k) {
    throw ShapeError("label " + std::to_string(label) + " out of range for " + std::to_string(k) + " classes");
  }
}

}  // namespace

LossResult cross_entropy(std::span<const double> scores, int label) {
  check_label(scores.size(), label);
  const double mx = *std::max_element(scores.begin(), scores.end());
  double z = 0.0;
  for (double s : scores) z += std::exp(s - mx);
  LossResult r;
  r.loss = -(scores[label] - mx - std::log(z));
  r.d_scores.resize(scores.size());
  for (std::size_t k = 0; k < scores.size(); ++k) r.d_scores[k] = std::exp(scores[k] - mx) / z;
  r.d_scores[label] -= 1.0;
  return r;
}

LossResult histogram_nll(std::span<const double> probabilities, int label) {
  check_label(probabilities.size(), label);
  constexpr double kFloor = 1e-12;
  double total = 0.0;
  for (double p : probabilities) total += p;
  total = std::max(total, kFloor);
  const double py = std::max(probabilities[label], kFloor);
  LossResult r;
  r.loss = -std::log(py / total);
  r.d_scores.assign(probabilities.size(), 1.0 / total);
  r.d_scores[label] -= 1.0 / py;
  return r;
}

void AdamConfig::validate() const {
  if (!(learning_rate > 0)) throw ConfigError("learning rate must be positive");
  if (beta1 < 0 || beta1 >= 1 || beta2 < 0 || beta2 >= 1) throw ConfigError("Adam betas must lie in [0, 1)");
  if (!(epsilon > 0)) throw ConfigError("Adam epsilon must be positive");
}

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& st, const AdamConfig& cfg) {
  if (params.size() != grads.size()) throw ShapeError("parameter and gradient lengths differ");
  if (st.m.empty()) {
    st.m.assign(params.size(), 0.0);
    st.v.assign(params.size(), 0.0);
  }
  if (st.m.size() != params.size()) throw ShapeError("optimizer state does not match the parameters");
  ++st.step;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(st.step));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(st.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    st.m[i] = cfg.beta1 * st.m[i] + (1 - cfg.beta1) * grads[i];
    st.v[i] = cfg.beta2 * st.v[i] + (1 - cfg.beta2) * grads[i] * grads[i];
    params[i] -= cfg.learning_rate * (st.m[i] / c1) / (std::sqrt(st.v[i] / c2) + cfg.epsilon);
  }
}

}  // namespace qpqc
