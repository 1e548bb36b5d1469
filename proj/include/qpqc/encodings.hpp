#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qpqc/gates.hpp"

namespace qpqc {

enum class EncodingKind : std::uint8_t {
  AngleX,
  AngleY,
  AngleZ,
  Amplitude,
  IQP,
  QAOA_X,
  QAOA_Y,
  QAOA_Z,
  Ring,
  Waterfall,
};

enum class OrderingKind : std::uint8_t { Flatten, Squared, VHLines, Random };

std::string to_string(EncodingKind kind);
std::string to_string(OrderingKind kind);
/// Case-insensitive; throws ConfigError on unknown names.
EncodingKind parse_encoding(const std::string& name);
OrderingKind parse_ordering(const std::string& name);

bool is_amplitude(EncodingKind kind);
bool is_qaoa(EncodingKind kind);

struct EncodingSpec {
  EncodingKind kind = EncodingKind::AngleX;
  int layers = 1;  // IQP / QAOA / Ring / Waterfall only
  OrderingKind ordering = OrderingKind::Flatten;  // Amplitude only
  std::optional<std::uint64_t> ordering_seed;  // Random ordering only
  std::vector<double> qaoa_params;  // baked into `encode`; templates use parameter slots

  /// Throws ConfigError on violated invariants.
  void validate() const;
};

/// Trainable angles owned by the encoding (non-zero only for QAOA: 2 per qubit per layer).
std::size_t encoding_param_count(const EncodingSpec& spec, int n_qubits);

/// Symbolic encoding circuit: feature j appears as AngleRef::feature(j) and
/// QAOA angles as parameter slots starting at `param_offset`.
GateSequence encode_template(const EncodingSpec& spec, int n_qubits, std::uint32_t param_offset = 0);

/// Concrete encoding circuit for one feature vector; QAOA angles come from
/// spec.qaoa_params. Throws ShapeError on feature-length mismatch.
GateSequence encode(const EncodingSpec& spec, std::span<const double> features, int n_qubits);

/// Image dimensions, height x width x channels.
struct ImageShape {
  int height = 0;
  int width = 0;
  int channels = 1;

  std::size_t size() const { return static_cast<std::size_t>(height) * width * channels; }
  friend bool operator==(const ImageShape&, const ImageShape&) = default;
};

/// Pixel-to-amplitude assignment.
///
/// Pixels are indexed channel-major (c * H * W + y * W + x). Each channel
/// plane is laid out by the same spatial ordering and the planes are stacked
/// contiguously; indices past H*W*C are zero padding. `permutation` is a
/// bijection on [0, 2^n_qubits).
struct Ordering {
  std::vector<std::uint32_t> permutation;
  int n_qubits = 0;

  std::size_t size() const { return permutation.size(); }
  std::vector<std::uint32_t> inverse() const;
  static Ordering identity(int n_qubits);
};

/// `n_qubits` = 0 selects the smallest register that fits the image.
/// Throws CapacityError when the image does not fit, ShapeError when the
/// spatial ordering's tile does not divide the image.
Ordering build_ordering(OrderingKind kind, ImageShape shape, std::optional<std::uint64_t> seed = std::nullopt,
                        int n_qubits = 0);

/// Normalized state with amps[permutation[i]] = features[i] / |features|.
StateVector amplitude_prepare(std::span<const double> features, const Ordering& ordering, int n_qubits);

/// Groups of 4 amplitude indices mixed by a two-qubit gate whose lower
/// target bit has significance p: all other bits fixed, bits p and p+1
/// enumerated. Groups are sorted by their smallest member.
std::vector<std::array<std::uint32_t, 4>> mixing_groups(int p, int n_qubits);

/// Qubit pair (as gate targets) that sits at position p of an n-qubit register.
std::array<int, 2> qubits_at_position(int p, int n_qubits);

struct LocalityReport {
  bool pass = false;
  double max_off_group = 0.0;    // largest |d out_i / d in_j| with j outside i's group
  double max_kernel_error = 0.0; // apply_gate vs. explicit Kronecker unitary
  int trials = 0;
};

/// Places `trials` Haar-random 4x4 unitaries at position p, expands each to
/// the full 2^n unitary by Kronecker products and checks that every output
/// amplitude depends only on inputs in its mixing group. `groups` overrides
/// the table under test (used as a negative control).
LocalityReport verify_kernel_locality(int p, int n_qubits, int trials, std::uint64_t seed = 7,
                                      const std::vector<std::array<std::uint32_t, 4>>* groups = nullptr);

}  // namespace qpqc
