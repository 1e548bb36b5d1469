#include "qpqc/expressibility.hpp"

#include <cmath>

#include "qpqc/error.hpp"
#include "qpqc/linalg.hpp"
#include "qpqc/parallel.hpp"

namespace qpqc {

namespace {

void check_request(int n_qubits, int t, std::size_t n_pairs) {
  if (n_qubits < 1 || n_qubits > 12) throw CapacityError("frame potential: n_qubits must be in [1, 12]");
  if (t != 1 && t != 2) throw ConfigError("frame potential: only t = 1 and t = 2 are supported");
  if (n_pairs < 100) throw ConfigError("frame potential: n_pairs must be at least 100");
}

StateVector encoded_state(const EncodingSpec& spec, int n_qubits, const InputDistribution& dist, Rng& rng) {
  if (is_amplitude(spec.kind)) {
    std::vector<double> x(std::size_t{1} << n_qubits);
    for (auto& v : x) v = rng.uniform(dist.feature_lo, dist.feature_hi);
    return amplitude_prepare(x, build_ordering(spec.ordering, {1, static_cast<int>(x.size()), 1}, spec.ordering_seed,
                                               n_qubits),
                             n_qubits);
  }
  std::vector<double> x(static_cast<std::size_t>(n_qubits));
  for (auto& v : x) v = rng.uniform(dist.feature_lo, dist.feature_hi);
  EncodingSpec s = spec;
  s.qaoa_params.resize(encoding_param_count(spec, n_qubits));
  for (auto& v : s.qaoa_params) v = rng.uniform(dist.param_lo, dist.param_hi);
  StateVector psi = StateVector::zero(n_qubits);
  run(psi, encode(s, x, n_qubits));
  return psi;
}

}  // namespace

double haar_frame_potential(std::uint64_t dimension, int t) {
  if (dimension < 2) throw ConfigError("haar_frame_potential: dimension must be at least 2");
  const auto d = static_cast<double>(dimension);
  if (t == 1) return 1.0 / d;
  if (t == 2) return 2.0 / (d * (d + 1.0));
  throw ConfigError("haar_frame_potential: only t = 1 and t = 2 are supported");
}

std::vector<double> sample_overlaps(const EncodingSpec& spec, int n_qubits, std::size_t n_pairs, std::uint64_t seed,
                                    const InputDistribution& dist, int workers) {
  spec.validate();
  std::vector<double> out(n_pairs);
  parallel_for(n_pairs, workers, [&](std::size_t i) {
    Rng rng(derive_seed(seed, i));
    const auto a = encoded_state(spec, n_qubits, dist, rng);
    const auto b = encoded_state(spec, n_qubits, dist, rng);
    out[i] = std::norm(a.inner(b));
  });
  return out;
}

std::vector<double> sample_haar_overlaps(int n_qubits, std::size_t n_pairs, std::uint64_t seed, int workers) {
  std::vector<double> out(n_pairs);
  parallel_for(n_pairs, workers, [&](std::size_t i) {
    Rng rng(derive_seed(seed, i));
    const auto a = haar_state(n_qubits, rng);
    const auto b = haar_state(n_qubits, rng);
    out[i] = std::norm(a.inner(b));
  });
  return out;
}

FramePotentialEstimate summarize_overlaps(std::span<const double> overlaps, int t, std::uint64_t dimension) {
  const std::size_t n = overlaps.size();
  if (n < 2) throw ConfigError("frame potential: need at least 2 samples");
  FramePotentialEstimate e;
  e.t = t;
  e.samples = n;
  e.haar_ref = haar_frame_potential(dimension, t);
  std::vector<double> y(n);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = std::pow(overlaps[i], t);
    sum += y[i];
  }
  e.mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (double v : y) {
    const double loo = (sum - v) / static_cast<double>(n - 1);
    ss += (loo - e.mean) * (loo - e.mean);
  }
  e.std_error = std::sqrt(static_cast<double>(n - 1) / static_cast<double>(n) * ss);
  e.ratio = e.mean / e.haar_ref;
  return e;
}

FramePotentialEstimate estimate_frame_potential(const EncodingSpec& spec, int n_qubits, int t, std::size_t n_pairs,
                                                std::uint64_t seed, const InputDistribution& dist) {
  check_request(n_qubits, t, n_pairs);
  const auto overlaps = sample_overlaps(spec, n_qubits, n_pairs, seed, dist);
  return summarize_overlaps(overlaps, t, std::uint64_t{1} << n_qubits);
}

FramePotentialEstimate estimate_haar_frame_potential(int n_qubits, int t, std::size_t n_pairs, std::uint64_t seed) {
  check_request(n_qubits, t, n_pairs);
  const auto overlaps = sample_haar_overlaps(n_qubits, n_pairs, seed);
  return summarize_overlaps(overlaps, t, std::uint64_t{1} << n_qubits);
}

}  // namespace qpqc
