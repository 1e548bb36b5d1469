#include "qpqc/state_vector.hpp"

#include <bit>
#include <string>

#include "qpqc/error.hpp"

namespace qpqc {

namespace {

struct PauliMasks {
  std::uint64_t x = 0;  // bits flipped (X or Y)
  std::uint64_t z = 0;  // bits with a sign (Y or Z)
  cplx phase{1.0, 0.0};  // i^(number of Y)
};

PauliMasks masks_of(const PauliString& p, int n_qubits) {
  if (static_cast<int>(p.size()) != n_qubits) {
    throw ShapeError("Pauli string length " + std::to_string(p.size()) + " does not match " +
                     std::to_string(n_qubits) + " qubits");
  }
  PauliMasks m;
  int n_y = 0;
  for (int q = 0; q < n_qubits; ++q) {
    const std::uint64_t bit = 1ULL << bit_of(q, n_qubits);
    switch (p[q]) {
      case 'X': m.x |= bit; break;
      case 'Y': m.x |= bit; m.z |= bit; ++n_y; break;
      case 'Z': m.z |= bit; break;
      default: break;
    }
  }
  static constexpr cplx kPowers[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  m.phase = kPowers[n_y % 4];
  return m;
}

}  // namespace

StateVector StateVector::zero(int n_qubits) {
  if (n_qubits < 1 || n_qubits > kMaxQubits) {
    throw CapacityError("qubit count " + std::to_string(n_qubits) + " outside [1, " +
                        std::to_string(kMaxQubits) + "]");
  }
  std::vector<cplx> amps(std::size_t{1} << n_qubits);
  amps[0] = 1.0;
  return StateVector(n_qubits, std::move(amps));
}

StateVector StateVector::from_amplitudes(std::vector<cplx> amps) {
  const std::size_t dim = amps.size();
  if (dim < 2 || !std::has_single_bit(dim)) {
    throw ShapeError("amplitude count " + std::to_string(dim) + " is not a power of two >= 2");
  }
  const int n = std::countr_zero(dim);
  if (n > kMaxQubits) throw CapacityError("state exceeds " + std::to_string(kMaxQubits) + " qubits");
  return StateVector(n, std::move(amps));
}

StateVector new_zero_state(int n_qubits) { return StateVector::zero(n_qubits); }

double StateVector::norm_squared() const {
  double s = 0.0;
  for (const auto& a : amps_) s += std::norm(a);
  return s;
}

cplx StateVector::inner(const StateVector& other) const {
  if (other.dimension() != dimension()) throw ShapeError("inner product of states with different sizes");
  cplx s = 0.0;
  for (std::size_t i = 0; i < amps_.size(); ++i) s += std::conj(amps_[i]) * other.amps_[i];
  return s;
}

PauliString::PauliString(std::string_view letters) : letters_(letters) {
  for (char c : letters_) {
    if (c != 'I' && c != 'X' && c != 'Y' && c != 'Z') {
      throw ShapeError("invalid Pauli letter '" + std::string(1, c) + "' in \"" + letters_ + "\"");
    }
  }
}

bool PauliString::is_identity() const {
  for (char c : letters_) {
    if (c != 'I') return false;
  }
  return true;
}

std::vector<double> basis_probabilities(const StateVector& state) {
  std::vector<double> probs(state.dimension());
  const auto amps = state.amplitudes();
  for (std::size_t i = 0; i < probs.size(); ++i) probs[i] = std::norm(amps[i]);
  return probs;
}

double expectation_pauli(const StateVector& state, const PauliString& pauli) {
  const PauliMasks m = masks_of(pauli, state.n_qubits());
  const auto amps = state.amplitudes();
  cplx acc = 0.0;
  for (std::size_t i = 0; i < amps.size(); ++i) {
    const cplx term = std::conj(amps[i ^ m.x]) * amps[i];
    acc += (std::popcount(i & m.z) & 1) ? -term : term;
  }
  return (m.phase * acc).real();
}

void apply_pauli(const StateVector& state, const PauliString& pauli, StateVector& out) {
  const PauliMasks m = masks_of(pauli, state.n_qubits());
  if (out.dimension() != state.dimension()) out = state;
  const auto in = state.amplitudes();
  auto dst = out.amplitudes();
  for (std::size_t j = 0; j < in.size(); ++j) {
    const std::size_t src = j ^ m.x;
    const cplx v = m.phase * in[src];
    dst[j] = (std::popcount(src & m.z) & 1) ? -v : v;
  }
}

}  // namespace qpqc
