#include "qpqc/circuit.hpp"

#include <cmath>
#include <numbers>

#include "qpqc/error.hpp"

namespace qpqc {

namespace {

// Which gates can change more than the global phase, given that every qubit
// starts in |0> (angle encodings) or none is known (amplitude encoding).
std::vector<bool> phase_relevant_gates(const GateSequence& seq, bool all_fresh) {
  std::vector<bool> fresh(static_cast<std::size_t>(seq.n_qubits()), all_fresh);
  std::vector<bool> applied;
  applied.reserve(seq.size());
  for (const auto& g : seq.gates()) {
    const int a = g.targets[0], b = g.targets[1];
    if (is_diagonal(g.kind)) {
      const bool all = fresh[a] && (g.arity() == 1 || fresh[b]);
      const bool controlled_off =
          (is_controlled_rotation(g.kind) && fresh[a]) || (g.kind == GateKind::CZ && (fresh[a] || fresh[b]));
      applied.push_back(!(all || controlled_off));
      continue;
    }
    if ((g.kind == GateKind::CNOT || is_controlled_rotation(g.kind)) && fresh[a]) {
      applied.push_back(false);
      continue;
    }
    applied.push_back(true);
    if (g.kind == GateKind::CNOT || is_controlled_rotation(g.kind)) {
      fresh[b] = false;
    } else {
      fresh[a] = false;
      if (g.arity() == 2) fresh[b] = false;
    }
  }
  return applied;
}

}  // namespace

Circuit::Circuit(const CircuitSpec& spec)
    : Circuit(spec.encoding,
              build_ansatz_template(spec.ansatz, spec.n_qubits,
                                    static_cast<std::uint32_t>(qpqc::encoding_param_count(spec.encoding, spec.n_qubits))),
              spec.measurement, spec.n_qubits, spec.ordering) {}

Circuit::Circuit(const EncodingSpec& encoding, GateSequence ansatz, MeasurementSpec measurement, int n_qubits,
                 std::optional<Ordering> ordering)
    : encoding_(encoding), measurement_(std::move(measurement)), n_qubits_(n_qubits), gates_(n_qubits) {
  if (n_qubits < 1 || n_qubits > kMaxQubits) throw CapacityError("qubit count out of range");
  if (ansatz.n_qubits() != n_qubits) throw ShapeError("ansatz register does not match the circuit");
  encoding_.validate();
  measurement_.validate(n_qubits);
  encoding_params_ = qpqc::encoding_param_count(encoding_, n_qubits);
  if (is_amplitude(encoding_.kind)) {
    ordering_ = ordering ? *ordering : Ordering::identity(n_qubits);
    if (ordering_.n_qubits > n_qubits) throw ShapeError("ordering built for a larger register");
  } else {
    gates_.append(encode_template(encoding_, n_qubits, 0));
  }
  gates_.append(ansatz);
  param_count_ = encoding_params_ + ansatz.param_slot_count();
  for (const auto& g : gates_.gates()) {
    if (auto slot = g.param_slot(); slot && *slot >= param_count_) {
      throw ShapeError("parameter slot " + std::to_string(*slot) + " beyond the circuit's parameter vector");
    }
    if (g.parameterized() && g.kind != GateKind::RX && g.kind != GateKind::RY && g.kind != GateKind::RZ &&
        g.kind != GateKind::RZZ && !is_controlled_rotation(g.kind)) {
      throw UnsupportedGateError(gate_name(g.kind) + " is not a differentiable rotation");
    }
  }
  applied_ = phase_relevant_gates(gates_, !is_amplitude(encoding_.kind));
}

std::size_t Circuit::feature_count() const {
  return is_amplitude(encoding_.kind) ? std::min(ordering_.size(), std::size_t{1} << n_qubits_)
                                      : static_cast<std::size_t>(n_qubits_);
}

void Circuit::check_inputs(std::span<const double> params, std::span<const double> features) const {
  if (params.size() != param_count_) {
    throw ShapeError("circuit expects " + std::to_string(param_count_) + " parameters, got " +
                     std::to_string(params.size()));
  }
  if (is_amplitude(encoding_.kind) ? features.size() > feature_count() : features.size() != feature_count()) {
    throw ShapeError("circuit expects " + std::to_string(feature_count()) + " features, got " +
                     std::to_string(features.size()));
  }
}

StateVector Circuit::initial_state(std::span<const double> features) const {
  if (is_amplitude(encoding_.kind)) return amplitude_prepare(features, ordering_, n_qubits_);
  return StateVector::zero(n_qubits_);
}

StateVector Circuit::evolve(const Bindings& b, std::span<const double> features, std::size_t shift_gate,
                            double delta) const {
  StateVector psi = initial_state(features);
  const auto& gates = gates_.gates();
  for (std::size_t i = 0; i < gates.size(); ++i) {
    if (!applied_[i]) continue;
    const double angle = gates[i].parameterized() ? b.resolve(gates[i].angle) + (i == shift_gate ? delta : 0.0) : 0.0;
    apply_gate(psi, gates[i], angle);
  }
  return psi;
}

StateVector Circuit::state(std::span<const double> params, std::span<const double> features) const {
  check_inputs(params, features);
  return evolve(Bindings{params, features}, features, SIZE_MAX, 0.0);
}

std::vector<double> Circuit::forward(std::span<const double> params, std::span<const double> features) const {
  return measure(state(params, features), measurement_);
}

std::vector<double> Circuit::weights_or_ones(std::span<const double> upstream) const {
  if (upstream.empty()) return std::vector<double>(output_size(), 1.0);
  if (upstream.size() != output_size()) throw ShapeError("upstream gradient length mismatch");
  return {upstream.begin(), upstream.end()};
}

void Circuit::chain_angle(const AngleRef& ref, double d_angle, std::span<const double> features,
                          CircuitGradient& g) const {
  switch (ref.source) {
    case AngleRef::Source::Constant:
      break;
    case AngleRef::Source::Param:
      g.d_params[ref.index] += ref.scale * d_angle;
      break;
    case AngleRef::Source::Feature:
      g.d_inputs[ref.index] += ref.scale * d_angle;
      break;
    case AngleRef::Source::FeatureProduct:
      g.d_inputs[ref.index] += ref.scale * features[ref.index2] * d_angle;
      g.d_inputs[ref.index2] += ref.scale * features[ref.index] * d_angle;
      break;
  }
}

void Circuit::amplitude_input_grad(std::span<const double> features, const StateVector& lambda0,
                                   CircuitGradient& g) const {
  // f depends on the normalized state psi0 = v / |v| with v[perm[i]] = x_i.
  // df/dpsi0 (real directions) = 2 Re lambda0; project out the radial part.
  double norm = 0.0;
  for (double x : features) norm += x * x;
  norm = std::sqrt(norm);
  double radial = 0.0;
  for (std::size_t i = 0; i < features.size(); ++i) {
    radial += 2.0 * lambda0[ordering_.permutation[i]].real() * features[i] / norm;
  }
  for (std::size_t i = 0; i < features.size(); ++i) {
    const double gi = 2.0 * lambda0[ordering_.permutation[i]].real();
    g.d_inputs[i] = (gi - radial * features[i] / norm) / norm;
  }
}

CircuitGradient Circuit::grad_adjoint(std::span<const double> params, std::span<const double> features,
                                      std::span<const double> upstream) const {
  check_inputs(params, features);
  const Bindings b{params, features};
  const auto w = weights_or_ones(upstream);
  CircuitGradient g;
  g.d_params.assign(param_count_, 0.0);
  g.d_inputs.assign(features.size(), 0.0);

  StateVector psi = evolve(b, features, SIZE_MAX, 0.0);
  g.output = measure(psi, measurement_);
  StateVector lambda = psi;
  apply_weighted_observable(psi, measurement_, w, lambda);

  const auto& gates = gates_.gates();
  for (std::size_t i = gates.size(); i-- > 0;) {
    if (!applied_[i]) continue;
    const auto& gate = gates[i];
    const double angle = gate.parameterized() ? b.resolve(gate.angle) : 0.0;
    if (gate.parameterized() && gate.angle.source != AngleRef::Source::Constant) {
      chain_angle(gate.angle, generator_inner(lambda, gate, psi).imag(), features, g);
    }
    apply_gate_adjoint(psi, gate, angle);
    apply_gate_adjoint(lambda, gate, angle);
  }
  if (is_amplitude(encoding_.kind)) amplitude_input_grad(features, lambda, g);
  return g;
}

CircuitGradient Circuit::grad_parameter_shift(std::span<const double> params, std::span<const double> features,
                                              std::span<const double> upstream) const {
  check_inputs(params, features);
  const Bindings b{params, features};
  const auto w = weights_or_ones(upstream);
  const auto f = [&](std::size_t gate, double delta) {
    const auto out = measure(evolve(b, features, gate, delta), measurement_);
    double s = 0.0;
    for (std::size_t k = 0; k < out.size(); ++k) s += w[k] * out[k];
    return s;
  };
  CircuitGradient g;
  g.d_params.assign(param_count_, 0.0);
  g.d_inputs.assign(features.size(), 0.0);
  g.output = measure(evolve(b, features, SIZE_MAX, 0.0), measurement_);

  constexpr double kHalfPi = std::numbers::pi / 2;
  const double c_plus = (std::numbers::sqrt2 + 1) / (4 * std::numbers::sqrt2);
  const double c_minus = (std::numbers::sqrt2 - 1) / (4 * std::numbers::sqrt2);
  const auto& gates = gates_.gates();
  for (std::size_t i = 0; i < gates.size(); ++i) {
    const auto& gate = gates[i];
    if (!applied_[i] || !gate.parameterized() || gate.angle.source == AngleRef::Source::Constant) continue;
    double d;
    if (is_controlled_rotation(gate.kind)) {
      d = c_plus * (f(i, kHalfPi) - f(i, -kHalfPi)) - c_minus * (f(i, 3 * kHalfPi) - f(i, -3 * kHalfPi));
    } else {
      d = (f(i, kHalfPi) - f(i, -kHalfPi)) / 2;
    }
    chain_angle(gate.angle, d, features, g);
  }
  if (is_amplitude(encoding_.kind)) {
    // Back-propagate the weighted observable to the initial state.
    StateVector psi = evolve(b, features, SIZE_MAX, 0.0);
    StateVector lambda = psi;
    apply_weighted_observable(psi, measurement_, w, lambda);
    for (std::size_t i = gates.size(); i-- > 0;) {
      if (applied_[i]) apply_gate_adjoint(lambda, gates[i], gates[i].parameterized() ? b.resolve(gates[i].angle) : 0.0);
    }
    amplitude_input_grad(features, lambda, g);
  }
  return g;
}

std::vector<double> circuit_forward(const CircuitSpec& spec, std::span<const double> params,
                                    std::span<const double> features) {
  return Circuit(spec).forward(params, features);
}

CircuitGradient grad_parameter_shift(const CircuitSpec& spec, std::span<const double> params,
                                     std::span<const double> features, std::span<const double> upstream) {
  return Circuit(spec).grad_parameter_shift(params, features, upstream);
}

CircuitGradient grad_adjoint(const CircuitSpec& spec, std::span<const double> params,
                             std::span<const double> features, std::span<const double> upstream) {
  return Circuit(spec).grad_adjoint(params, features, upstream);
}

}  // namespace qpqc
