#pragma once

#include <optional>
#include <span>
#include <vector>

#include "qpqc/ansatz.hpp"
#include "qpqc/encodings.hpp"
#include "qpqc/gates.hpp"
#include "qpqc/measurement.hpp"

namespace qpqc {

/// Declarative PQC: encoding -> ansatz -> measurement on n_qubits.
struct CircuitSpec {
  EncodingSpec encoding;
  AnsatzSpec ansatz;
  MeasurementSpec measurement;
  int n_qubits = 1;
  std::optional<Ordering> ordering;  // Amplitude only; identity when absent
};

struct CircuitGradient {
  std::vector<double> output;    // forward values
  std::vector<double> d_params;  // aligned with the circuit's parameter vector
  std::vector<double> d_inputs;  // aligned with the feature vector
};

/// Compiled PQC. The parameter vector is [encoding angles (QAOA) | ansatz
/// angles]. Evaluation methods are const and safe to call concurrently.
///
/// Gates that can only contribute a global phase given the known |0>
/// qubits at that point (diagonal gates on untouched qubits, controlled gates
/// with an untouched control) are not applied by forward/gradients.
class Circuit {
 public:
  explicit Circuit(const CircuitSpec& spec);
  /// `ansatz` is a template whose parameter slots start after the
  /// encoding's own parameters.
  Circuit(const EncodingSpec& encoding, GateSequence ansatz, MeasurementSpec measurement, int n_qubits,
          std::optional<Ordering> ordering = std::nullopt);

  int n_qubits() const { return n_qubits_; }
  const EncodingSpec& encoding() const { return encoding_; }
  const MeasurementSpec& measurement() const { return measurement_; }
  /// Encoding followed by ansatz, all angles symbolic.
  const GateSequence& gates() const { return gates_; }
  std::size_t param_count() const { return param_count_; }
  std::size_t encoding_param_count() const { return encoding_params_; }
  std::size_t output_size() const { return measurement_size(measurement_); }
  /// Angle encodings: n_qubits. Amplitude: the maximum length (2^n).
  std::size_t feature_count() const;

  StateVector initial_state(std::span<const double> features) const;
  /// Final state before measurement (equal to the full circuit up to a global phase).
  StateVector state(std::span<const double> params, std::span<const double> features) const;
  std::vector<double> forward(std::span<const double> params, std::span<const double> features) const;

  /// Gradient of sum_k upstream[k] * output[k]; empty upstream means all ones.
  CircuitGradient grad_adjoint(std::span<const double> params, std::span<const double> features,
                               std::span<const double> upstream = {}) const;
  /// Same quantity by shifted evaluations of each parameterized gate
  /// (two-term rule for single-axis rotations and RZZ, four-term rule for
  /// controlled rotations). Amplitude input gradients use the analytic
  /// normalization map since they have no gate to shift.
  CircuitGradient grad_parameter_shift(std::span<const double> params, std::span<const double> features,
                                       std::span<const double> upstream = {}) const;

 private:
  void check_inputs(std::span<const double> params, std::span<const double> features) const;
  std::vector<double> weights_or_ones(std::span<const double> upstream) const;
  /// Runs the applied gates; `shift_gate` (if < gates) gets `delta` added to its angle.
  StateVector evolve(const Bindings& b, std::span<const double> features, std::size_t shift_gate, double delta) const;
  void chain_angle(const AngleRef& ref, double d_angle, std::span<const double> features, CircuitGradient& g) const;
  void amplitude_input_grad(std::span<const double> features, const StateVector& lambda0, CircuitGradient& g) const;

  EncodingSpec encoding_;
  MeasurementSpec measurement_;
  int n_qubits_ = 0;
  Ordering ordering_;
  GateSequence gates_;
  std::vector<bool> applied_;
  std::size_t param_count_ = 0;
  std::size_t encoding_params_ = 0;
};

std::vector<double> circuit_forward(const CircuitSpec& spec, std::span<const double> params,
                                    std::span<const double> features);
CircuitGradient grad_parameter_shift(const CircuitSpec& spec, std::span<const double> params,
                                     std::span<const double> features, std::span<const double> upstream = {});
CircuitGradient grad_adjoint(const CircuitSpec& spec, std::span<const double> params,
                             std::span<const double> features, std::span<const double> upstream = {});

}  // namespace qpqc
