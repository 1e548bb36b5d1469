#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qpqc {

using cplx = std::complex<double>;

inline constexpr int kMaxQubits = 26;

/// Dense amplitude vector for n qubits.
///
/// Qubit 0 is the most significant bit of the amplitude index (big-endian),
/// so a gate on the two highest-numbered qubits mixes consecutive
/// amplitudes. Qubit q therefore lives at bit position n_qubits - 1 - q.
class StateVector {
 public:
  /// |0...0> on n qubits; throws CapacityError outside [1, kMaxQubits].
  static StateVector zero(int n_qubits);

  /// Takes ownership of `amps`; size must be a power of two.
  static StateVector from_amplitudes(std::vector<cplx> amps);

  int n_qubits() const { return n_qubits_; }
  std::size_t dimension() const { return amps_.size(); }

  std::span<cplx> amplitudes() { return amps_; }
  std::span<const cplx> amplitudes() const { return amps_; }
  cplx& operator[](std::size_t i) { return amps_[i]; }
  const cplx& operator[](std::size_t i) const { return amps_[i]; }

  double norm_squared() const;

  /// <this|other>
  cplx inner(const StateVector& other) const;

 private:
  StateVector(int n, std::vector<cplx> amps) : n_qubits_(n), amps_(std::move(amps)) {}

  int n_qubits_ = 0;
  std::vector<cplx> amps_;
};

StateVector new_zero_state(int n_qubits);

/// Bit position of qubit q in an n-qubit amplitude index.
constexpr int bit_of(int q, int n_qubits) { return n_qubits - 1 - q; }

/// Tensor product of single-qubit Paulis, one letter per qubit.
class PauliString {
 public:
  PauliString() = default;
  /// Letters from {I, X, Y, Z}; throws ShapeError on anything else.
  explicit PauliString(std::string_view letters);

  std::size_t size() const { return letters_.size(); }
  char operator[](std::size_t q) const { return letters_[q]; }
  const std::string& letters() const { return letters_; }
  bool is_identity() const;

  friend bool operator==(const PauliString&, const PauliString&) = default;

 private:
  std::string letters_;
};

/// Probability of each computational basis outcome, |amp_i|^2.
std::vector<double> basis_probabilities(const StateVector& state);

/// <psi|P|psi> for a Pauli string over all qubits of the state.
double expectation_pauli(const StateVector& state, const PauliString& pauli);

/// P|psi>, written into `out` (resized as needed).
void apply_pauli(const StateVector& state, const PauliString& pauli, StateVector& out);

}  // namespace qpqc
