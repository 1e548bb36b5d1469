#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qpqc/encodings.hpp"

namespace qpqc {

struct FramePotentialEstimate {
  int t = 1;
  double mean = 0.0;
  double std_error = 0.0;  // jackknife
  std::size_t samples = 0;
  double haar_ref = 0.0;
  double ratio = 0.0;  // mean / haar_ref
};

/// Ranges the encoded inputs are drawn from, uniformly and independently per state.
struct InputDistribution {
  double feature_lo = 0.0;
  double feature_hi = 1.0;
  double param_lo = 0.0;  // QAOA trainable angles
  double param_hi = 1.0;
};

/// t!(d-1)!/(d+t-1)!, the frame potential of Haar-random states. t must be 1 or 2.
double haar_frame_potential(std::uint64_t dimension, int t);

/// Squared overlaps |<psi|phi>|^2 of n_pairs independently encoded state pairs.
/// Pair i draws from its own stream, so the result does not depend on the worker count.
std::vector<double> sample_overlaps(const EncodingSpec& spec, int n_qubits, std::size_t n_pairs, std::uint64_t seed,
                                    const InputDistribution& dist = {}, int workers = 0);
/// Same with Haar-random states in place of the encoding.
std::vector<double> sample_haar_overlaps(int n_qubits, std::size_t n_pairs, std::uint64_t seed, int workers = 0);

/// Mean of overlap^t with its jackknife standard error, normalized by the Haar value for `dimension`.
FramePotentialEstimate summarize_overlaps(std::span<const double> overlaps, int t, std::uint64_t dimension);

/// Throws CapacityError for more than 12 qubits, ConfigError for n_pairs < 100 or t outside {1, 2}.
FramePotentialEstimate estimate_frame_potential(const EncodingSpec& spec, int n_qubits, int t, std::size_t n_pairs,
                                                std::uint64_t seed, const InputDistribution& dist = {});
FramePotentialEstimate estimate_haar_frame_potential(int n_qubits, int t, std::size_t n_pairs, std::uint64_t seed);

}  // namespace qpqc
