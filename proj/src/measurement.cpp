#include "qpqc/measurement.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <set>

#include "qpqc/error.hpp"
#include "qpqc/gates.hpp"
#include "qpqc/linalg.hpp"
#include "qpqc/random.hpp"

namespace qpqc {

namespace {

constexpr MeasurementKind kAllMeasurements[] = {MeasurementKind::PauliX, MeasurementKind::PauliY,
                                                MeasurementKind::PauliZ, MeasurementKind::Histogram,
                                                MeasurementKind::Paulis};

bool single_qubit(MeasurementKind kind) {
  return kind == MeasurementKind::PauliX || kind == MeasurementKind::PauliY || kind == MeasurementKind::PauliZ;
}

char pauli_letter(MeasurementKind kind) {
  switch (kind) {
    case MeasurementKind::PauliX: return 'X';
    case MeasurementKind::PauliY: return 'Y';
    default: return 'Z';
  }
}

PauliString single(char letter, int q, int n) {
  std::string s(static_cast<std::size_t>(n), 'I');
  s[static_cast<std::size_t>(q)] = letter;
  return PauliString(s);
}

// Outcome index of basis state i restricted to the measured qubits.
std::size_t outcome_of(std::size_t i, std::span<const int> measured, int n) {
  std::size_t k = 0;
  for (int q : measured) k = (k << 1) | ((i >> bit_of(q, n)) & 1u);
  return k;
}

}  // namespace

std::string to_string(MeasurementKind kind) {
  switch (kind) {
    case MeasurementKind::PauliX: return "PauliX";
    case MeasurementKind::PauliY: return "PauliY";
    case MeasurementKind::PauliZ: return "PauliZ";
    case MeasurementKind::Histogram: return "Histogram";
    case MeasurementKind::Paulis: return "Paulis";
  }
  return "?";
}

MeasurementKind parse_measurement(const std::string& name) {
  const std::string key = normalize_name(name);
  for (auto k : kAllMeasurements) {
    if (normalize_name(to_string(k)) == key) return k;
  }
  throw ConfigError("unknown measurement '" + name + "'");
}

void MeasurementSpec::validate(int n) const {
  for (int q : measured_qubits) {
    if (q < 0 || q >= n) throw ShapeError("measured qubit " + std::to_string(q) + " out of range");
  }
  if (std::set<int>(measured_qubits.begin(), measured_qubits.end()).size() != measured_qubits.size()) {
    throw ShapeError("measured qubits repeat");
  }
  if (class_count < 1) throw ConfigError("class_count must be positive");
  if (kind == MeasurementKind::Paulis) {
    if (pauli_strings.size() != static_cast<std::size_t>(class_count)) {
      throw ConfigError("Paulis measurement needs exactly one string per class");
    }
    for (std::size_t i = 0; i < pauli_strings.size(); ++i) {
      if (pauli_strings[i].size() != static_cast<std::size_t>(n)) throw ShapeError("Pauli string length mismatch");
      if (pauli_strings[i].is_identity()) throw ConfigError("identity is not a class observable");
      for (std::size_t j = 0; j < i; ++j) {
        if (pauli_strings[i] == pauli_strings[j]) throw ConfigError("class observables must be distinct");
      }
    }
  } else if (measured_qubits.empty()) {
    throw ShapeError("no measured qubits");
  }
  if (kind == MeasurementKind::Histogram && measured_qubits.size() > 20) {
    throw CapacityError("histogram over more than 20 qubits");
  }
}

std::size_t measurement_size(const MeasurementSpec& spec) {
  switch (spec.kind) {
    case MeasurementKind::Histogram: return std::size_t{1} << spec.measured_qubits.size();
    case MeasurementKind::Paulis: return spec.pauli_strings.size();
    default: return spec.measured_qubits.size();
  }
}

std::vector<double> measure(const StateVector& state, const MeasurementSpec& spec) {
  const int n = state.n_qubits();
  spec.validate(n);
  std::vector<double> out;
  switch (spec.kind) {
    case MeasurementKind::PauliX:
    case MeasurementKind::PauliY:
    case MeasurementKind::PauliZ: {
      const char letter = pauli_letter(spec.kind);
      for (int q : spec.measured_qubits) {
        if (letter == 'Z') {
          out.push_back(expectation_pauli(state, single('Z', q, n)));
          continue;
        }
        // Rotate the measured qubit into the Z basis: H for X, S^dagger then H for Y.
        StateVector rotated = state;
        if (letter == 'Y') apply_gate(rotated, GateOp::fixed(GateKind::Sdg, q));
        apply_gate(rotated, GateOp::fixed(GateKind::H, q));
        out.push_back(expectation_pauli(rotated, single('Z', q, n)));
      }
      break;
    }
    case MeasurementKind::Histogram: {
      out.assign(measurement_size(spec), 0.0);
      const auto amps = state.amplitudes();
      for (std::size_t i = 0; i < amps.size(); ++i) out[outcome_of(i, spec.measured_qubits, n)] += std::norm(amps[i]);
      break;
    }
    case MeasurementKind::Paulis:
      for (const auto& p : spec.pauli_strings) out.push_back(expectation_pauli(state, p));
      break;
  }
  return out;
}

void apply_weighted_observable(const StateVector& state, const MeasurementSpec& spec, std::span<const double> weights,
                               StateVector& out) {
  const int n = state.n_qubits();
  if (weights.size() != measurement_size(spec)) throw ShapeError("observable weight count mismatch");
  out = StateVector::from_amplitudes(std::vector<cplx>(state.dimension()));
  auto dst = out.amplitudes();
  const auto src = state.amplitudes();
  if (spec.kind == MeasurementKind::Histogram) {
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = weights[outcome_of(i, spec.measured_qubits, n)] * src[i];
    return;
  }
  StateVector term = out;
  const auto accumulate = [&](const PauliString& p, double w) {
    if (w == 0.0) return;
    apply_pauli(state, p, term);
    const auto t = term.amplitudes();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += w * t[i];
  };
  if (spec.kind == MeasurementKind::Paulis) {
    for (std::size_t k = 0; k < spec.pauli_strings.size(); ++k) accumulate(spec.pauli_strings[k], weights[k]);
  } else {
    const char letter = pauli_letter(spec.kind);
    for (std::size_t k = 0; k < spec.measured_qubits.size(); ++k) {
      accumulate(single(letter, spec.measured_qubits[k], n), weights[k]);
    }
  }
}

std::vector<double> class_scores(std::span<const double> meas_output, const MeasurementSpec& spec) {
  const auto k = static_cast<std::size_t>(spec.class_count);
  if (meas_output.size() < k) {
    throw ShapeError(std::to_string(spec.class_count) + " classes but only " + std::to_string(meas_output.size()) +
                     " measurement outputs");
  }
  return {meas_output.begin(), meas_output.begin() + static_cast<std::ptrdiff_t>(k)};
}

int predict(std::span<const double> scores) {
  if (scores.empty()) throw ShapeError("no scores");
  return static_cast<int>(std::max_element(scores.begin(), scores.end()) - scores.begin());
}

std::vector<PauliString> draw_pauli_strings(int k, int n, std::uint64_t seed) {
  if (k < 0 || n < 1) throw ShapeError("invalid Pauli draw request");
  // 4^n - 1 non-identity strings; guard against overflow for large n.
  const bool fits = n < 31 && static_cast<std::uint64_t>(k) <= (std::uint64_t{1} << (2 * n)) - 1;
  if (!fits && n < 31) {
    throw CapacityError("only " + std::to_string((std::uint64_t{1} << (2 * n)) - 1) +
                        " non-identity Pauli strings on " + std::to_string(n) + " qubits");
  }
  Rng rng(seed);
  std::vector<PauliString> out;
  std::set<std::string> seen;
  static constexpr char kLetters[] = {'I', 'X', 'Y', 'Z'};
  while (out.size() < static_cast<std::size_t>(k)) {
    std::string s(static_cast<std::size_t>(n), 'I');
    for (auto& c : s) c = kLetters[rng.below(4)];
    if (s == std::string(static_cast<std::size_t>(n), 'I') || !seen.insert(s).second) continue;
    out.emplace_back(s);
  }
  return out;
}

MeasurementSpec classifier_measurement(MeasurementKind kind, int class_count, std::span<const int> active, int n,
                                       std::uint64_t pauli_seed) {
  MeasurementSpec spec;
  spec.kind = kind;
  spec.class_count = class_count;
  std::size_t width = 0;
  switch (kind) {
    case MeasurementKind::Histogram:
      width = static_cast<std::size_t>(std::bit_width(static_cast<unsigned>(std::max(class_count - 1, 1))));
      break;
    case MeasurementKind::Paulis:
      width = active.size();
      break;
    default:
      width = static_cast<std::size_t>(class_count);
  }
  if (width > active.size()) {
    throw ConfigError(to_string(kind) + " head for " + std::to_string(class_count) + " classes needs " +
                      std::to_string(width) + " qubits, only " + std::to_string(active.size()) + " active");
  }
  spec.measured_qubits.assign(active.begin(), active.begin() + static_cast<std::ptrdiff_t>(width));
  if (kind == MeasurementKind::Paulis) {
    spec.pauli_seed = pauli_seed;
    const auto local = draw_pauli_strings(class_count, static_cast<int>(width), pauli_seed);
    for (const auto& p : local) {
      std::string s(static_cast<std::size_t>(n), 'I');
      for (std::size_t i = 0; i < width; ++i) s[static_cast<std::size_t>(spec.measured_qubits[i])] = p[i];
      spec.pauli_strings.emplace_back(s);
    }
  }
  spec.validate(n);
  return spec;
}

MeasurementSpec all_qubit_measurement(MeasurementKind kind, int n) {
  if (!single_qubit(kind)) throw ConfigError("layer circuits use PauliX, PauliY or PauliZ measurement");
  MeasurementSpec spec;
  spec.kind = kind;
  spec.class_count = n;
  for (int q = 0; q < n; ++q) spec.measured_qubits.push_back(q);
  return spec;
}

}  // namespace qpqc
