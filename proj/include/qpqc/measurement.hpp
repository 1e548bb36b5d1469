#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qpqc/state_vector.hpp"

namespace qpqc {

enum class MeasurementKind : std::uint8_t { PauliX, PauliY, PauliZ, Histogram, Paulis };

std::string to_string(MeasurementKind kind);
MeasurementKind parse_measurement(const std::string& name);

struct MeasurementSpec {
  MeasurementKind kind = MeasurementKind::PauliZ;
  std::vector<int> measured_qubits;  // the first is the most significant histogram bit
  int class_count = 2;
  std::vector<PauliString> pauli_strings;  // Paulis only
  std::optional<std::uint64_t> pauli_seed;

  /// Throws ShapeError / ConfigError when the spec cannot serve n_qubits.
  void validate(int n_qubits) const;
};

/// Length of the vector returned by `measure`.
std::size_t measurement_size(const MeasurementSpec& spec);

/// Single-qubit expectations (PauliX/Y/Z, basis change then Z), marginal
/// probabilities over measured_qubits (Histogram) or the class observables'
/// expectations (Paulis).
std::vector<double> measure(const StateVector& state, const MeasurementSpec& spec);

/// out = (sum_k weights[k] O_k) |state>, O_k being the Hermitian operator
/// whose expectation is measure(...)[k]. Used for reverse-mode gradients.
void apply_weighted_observable(const StateVector& state, const MeasurementSpec& spec, std::span<const double> weights,
                               StateVector& out);

/// First K entries of the measurement; throws ShapeError if fewer exist.
std::vector<double> class_scores(std::span<const double> meas_output, const MeasurementSpec& spec);

/// Argmax; ties go to the lowest index.
int predict(std::span<const double> scores);

/// K distinct non-identity strings on n qubits, uniform and seed-determined.
/// Throws CapacityError when K > 4^n - 1.
std::vector<PauliString> draw_pauli_strings(int k, int n_qubits, std::uint64_t seed);

/// Fills measured_qubits (and Pauli strings) for a classifier head over the
/// given active qubits: PauliX/Y/Z use the first K active qubits, Histogram
/// the first ceil(log2 K), Paulis act on all active qubits (identity elsewhere).
MeasurementSpec classifier_measurement(MeasurementKind kind, int class_count, std::span<const int> active,
                                       int n_qubits, std::uint64_t pauli_seed);

/// Single-qubit expectations on every qubit, for circuits used as layers.
MeasurementSpec all_qubit_measurement(MeasurementKind kind, int n_qubits);

}  // namespace qpqc
