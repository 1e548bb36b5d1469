#include "qpqc/gates.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <string>

#include "qpqc/error.hpp"

namespace qpqc {

namespace {

constexpr cplx kI{0.0, 1.0};

std::size_t insert_zero(std::size_t x, int bit) {
  const std::size_t low = x & ((std::size_t{1} << bit) - 1);
  return ((x >> bit) << (bit + 1)) | low;
}

std::array<cplx, 4> rotation_2x2(GateKind kind, double angle) {
  const double c = std::cos(angle / 2);
  const double s = std::sin(angle / 2);
  switch (kind) {
    case GateKind::RX:
    case GateKind::CRX:
      return {cplx(c, 0), cplx(0, -s), cplx(0, -s), cplx(c, 0)};
    case GateKind::RY:
    case GateKind::CRY:
      return {cplx(c, 0), cplx(-s, 0), cplx(s, 0), cplx(c, 0)};
    case GateKind::RZ:
    case GateKind::CRZ:
      return {std::polar(1.0, -angle / 2), 0.0, 0.0, std::polar(1.0, angle / 2)};
    default:
      throw UnsupportedGateError("not a single-axis rotation: " + gate_name(kind));
  }
}

std::array<cplx, 4> fixed_2x2(GateKind kind) {
  const double r = std::numbers::sqrt2 / 2;
  switch (kind) {
    case GateKind::H: return {r, r, r, -r};
    case GateKind::X: return {0.0, 1.0, 1.0, 0.0};
    case GateKind::Y: return {0.0, -kI, kI, 0.0};
    case GateKind::Z: return {1.0, 0.0, 0.0, -1.0};
    case GateKind::S: return {1.0, 0.0, 0.0, kI};
    case GateKind::Sdg: return {1.0, 0.0, 0.0, -kI};
    default: throw UnsupportedGateError("not a fixed single-qubit gate: " + gate_name(kind));
  }
}

void check_unitary(std::span<const cplx> m, std::size_t dim) {
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = 0; j < dim; ++j) {
      cplx s = 0.0;
      for (std::size_t k = 0; k < dim; ++k) s += std::conj(m[k * dim + i]) * m[k * dim + j];
      if (std::abs(s - (i == j ? 1.0 : 0.0)) > 1e-10) throw ShapeError("gate matrix is not unitary");
    }
  }
}

// Applies a 2x2 matrix to the target restricted to indices whose `mask` bits are all set.
void apply_2x2_masked(std::span<cplx> a, int bit, const std::array<cplx, 4>& m, std::size_t mask) {
  const std::size_t s = std::size_t{1} << bit;
  for (std::size_t base = 0; base < a.size(); base += 2 * s) {
    for (std::size_t i = base; i < base + s; ++i) {
      if ((i & mask) != mask) continue;
      const cplx x = a[i];
      const cplx y = a[i + s];
      a[i] = m[0] * x + m[1] * y;
      a[i + s] = m[2] * x + m[3] * y;
    }
  }
}

void apply_2x2(std::span<cplx> a, int bit, const std::array<cplx, 4>& m) {
  const std::size_t s = std::size_t{1} << bit;
  for (std::size_t base = 0; base < a.size(); base += 2 * s) {
    for (std::size_t i = base; i < base + s; ++i) {
      const cplx x = a[i];
      const cplx y = a[i + s];
      a[i] = m[0] * x + m[1] * y;
      a[i + s] = m[2] * x + m[3] * y;
    }
  }
}

// Real rotation [[c, -s], [s, c]]; RY's matrix, cheaper than the complex path.
void apply_real_rotation(std::span<cplx> a, int bit, double c, double s) {
  const std::size_t step = std::size_t{1} << bit;
  for (std::size_t base = 0; base < a.size(); base += 2 * step) {
    for (std::size_t i = base; i < base + step; ++i) {
      const cplx x = a[i];
      const cplx y = a[i + step];
      a[i] = c * x - s * y;
      a[i + step] = s * x + c * y;
    }
  }
}

void apply_diag_1q(std::span<cplx> a, int bit, cplx d0, cplx d1) {
  const std::size_t mask = std::size_t{1} << bit;
  for (std::size_t i = 0; i < a.size(); ++i) a[i] *= (i & mask) ? d1 : d0;
}

void apply_rotation(StateVector& state, const GateOp& g, double angle) {
  const int n = state.n_qubits();
  auto a = state.amplitudes();
  switch (g.kind) {
    case GateKind::RZ:
      apply_diag_1q(a, bit_of(g.targets[0], n), std::polar(1.0, -angle / 2), std::polar(1.0, angle / 2));
      return;
    case GateKind::RX:
      apply_2x2(a, bit_of(g.targets[0], n), rotation_2x2(g.kind, angle));
      return;
    case GateKind::RY:
      apply_real_rotation(a, bit_of(g.targets[0], n), std::cos(angle / 2), std::sin(angle / 2));
      return;
    case GateKind::RZZ: {
      const std::size_t m = (std::size_t{1} << bit_of(g.targets[0], n)) | (std::size_t{1} << bit_of(g.targets[1], n));
      const cplx even = std::polar(1.0, -angle / 2);
      const cplx odd = std::polar(1.0, angle / 2);
      for (std::size_t i = 0; i < a.size(); ++i) a[i] *= (std::popcount(i & m) & 1) ? odd : even;
      return;
    }
    case GateKind::CRX:
    case GateKind::CRY:
    case GateKind::CRZ:
      apply_2x2_masked(a, bit_of(g.targets[1], n), rotation_2x2(g.kind, angle),
                       std::size_t{1} << bit_of(g.targets[0], n));
      return;
    default:
      throw UnsupportedGateError("not a rotation: " + gate_name(g.kind));
  }
}

}  // namespace

int gate_arity(GateKind kind) {
  switch (kind) {
    case GateKind::CNOT:
    case GateKind::CZ:
    case GateKind::RZZ:
    case GateKind::CRX:
    case GateKind::CRY:
    case GateKind::CRZ:
    case GateKind::Unitary2:
      return 2;
    default:
      return 1;
  }
}

bool is_parameterized(GateKind kind) {
  switch (kind) {
    case GateKind::RX:
    case GateKind::RY:
    case GateKind::RZ:
    case GateKind::RZZ:
    case GateKind::CRX:
    case GateKind::CRY:
    case GateKind::CRZ:
      return true;
    default:
      return false;
  }
}

bool is_controlled_rotation(GateKind kind) {
  return kind == GateKind::CRX || kind == GateKind::CRY || kind == GateKind::CRZ;
}

bool is_diagonal(GateKind kind) {
  switch (kind) {
    case GateKind::Z:
    case GateKind::S:
    case GateKind::Sdg:
    case GateKind::CZ:
    case GateKind::RZ:
    case GateKind::RZZ:
    case GateKind::CRZ:
      return true;
    default:
      return false;
  }
}

std::string gate_name(GateKind kind) {
  switch (kind) {
    case GateKind::H: return "H";
    case GateKind::X: return "X";
    case GateKind::Y: return "Y";
    case GateKind::Z: return "Z";
    case GateKind::S: return "S";
    case GateKind::Sdg: return "Sdg";
    case GateKind::CNOT: return "CNOT";
    case GateKind::CZ: return "CZ";
    case GateKind::RX: return "RX";
    case GateKind::RY: return "RY";
    case GateKind::RZ: return "RZ";
    case GateKind::RZZ: return "RZZ";
    case GateKind::CRX: return "CRX";
    case GateKind::CRY: return "CRY";
    case GateKind::CRZ: return "CRZ";
    case GateKind::Unitary1: return "U1";
    case GateKind::Unitary2: return "U2";
  }
  return "?";
}

double Bindings::resolve(const AngleRef& ref) const {
  auto at = [](std::span<const double> v, std::uint32_t i, const char* what) {
    if (i >= v.size()) {
      throw ShapeError(std::string(what) + " slot " + std::to_string(i) + " out of range (" +
                       std::to_string(v.size()) + " bound)");
    }
    return v[i];
  };
  switch (ref.source) {
    case AngleRef::Source::Constant: return ref.scale;
    case AngleRef::Source::Param: return ref.scale * at(params, ref.index, "parameter");
    case AngleRef::Source::Feature: return ref.scale * at(features, ref.index, "feature");
    case AngleRef::Source::FeatureProduct:
      return ref.scale * at(features, ref.index, "feature") * at(features, ref.index2, "feature");
  }
  return 0.0;
}

GateOp GateOp::fixed(GateKind kind, int q) {
  if (gate_arity(kind) != 1 || is_parameterized(kind) || kind == GateKind::Unitary1) {
    throw ShapeError(gate_name(kind) + " is not a fixed single-qubit gate");
  }
  return GateOp{kind, {q, q}, {}, {}};
}

GateOp GateOp::fixed(GateKind kind, int q0, int q1) {
  if (kind != GateKind::CNOT && kind != GateKind::CZ) throw ShapeError(gate_name(kind) + " is not a fixed two-qubit gate");
  return GateOp{kind, {q0, q1}, {}, {}};
}

GateOp GateOp::rotation(GateKind kind, int q, AngleRef angle) {
  if (!is_parameterized(kind) || gate_arity(kind) != 1) throw ShapeError(gate_name(kind) + " is not a single-qubit rotation");
  return GateOp{kind, {q, q}, angle, {}};
}

GateOp GateOp::rotation(GateKind kind, int q0, int q1, AngleRef angle) {
  if (!is_parameterized(kind) || gate_arity(kind) != 2) throw ShapeError(gate_name(kind) + " is not a two-qubit rotation");
  return GateOp{kind, {q0, q1}, angle, {}};
}

GateOp GateOp::unitary(std::span<const cplx> m, int q) {
  if (m.size() != 4) throw ShapeError("single-qubit unitary needs 4 entries");
  check_unitary(m, 2);
  return GateOp{GateKind::Unitary1, {q, q}, {}, {m.begin(), m.end()}};
}

GateOp GateOp::unitary(std::span<const cplx> m, int q0, int q1) {
  if (m.size() != 16) throw ShapeError("two-qubit unitary needs 16 entries");
  check_unitary(m, 4);
  return GateOp{GateKind::Unitary2, {q0, q1}, {}, {m.begin(), m.end()}};
}

std::optional<std::uint32_t> GateOp::param_slot() const {
  if (parameterized() && angle.source == AngleRef::Source::Param) return angle.index;
  return std::nullopt;
}

std::vector<cplx> gate_matrix(const GateOp& g, double angle) {
  switch (g.kind) {
    case GateKind::Unitary1:
    case GateKind::Unitary2:
      return g.matrix;
    case GateKind::CNOT:
      return {1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 1, 0, 0, 1, 0};
    case GateKind::CZ:
      return {1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, -1};
    case GateKind::RZZ: {
      const cplx e = std::polar(1.0, -angle / 2);
      const cplx o = std::polar(1.0, angle / 2);
      return {e, 0, 0, 0, 0, o, 0, 0, 0, 0, o, 0, 0, 0, 0, e};
    }
    case GateKind::CRX:
    case GateKind::CRY:
    case GateKind::CRZ: {
      const auto r = rotation_2x2(g.kind, angle);
      return {1, 0, 0, 0, 0, 1, 0, 0, 0, 0, r[0], r[1], 0, 0, r[2], r[3]};
    }
    case GateKind::RX:
    case GateKind::RY:
    case GateKind::RZ: {
      const auto r = rotation_2x2(g.kind, angle);
      return {r.begin(), r.end()};
    }
    default: {
      const auto m = fixed_2x2(g.kind);
      return {m.begin(), m.end()};
    }
  }
}

void GateSequence::push(GateOp gate) {
  const int arity = gate.arity();
  for (int k = 0; k < arity; ++k) {
    if (gate.targets[k] < 0 || gate.targets[k] >= n_qubits_) {
      throw ShapeError(gate_name(gate.kind) + " target " + std::to_string(gate.targets[k]) + " outside register of " +
                       std::to_string(n_qubits_) + " qubits");
    }
  }
  if (arity == 2 && gate.targets[0] == gate.targets[1]) {
    throw ShapeError(gate_name(gate.kind) + " targets must be distinct");
  }
  gates_.push_back(std::move(gate));
}

void GateSequence::append(const GateSequence& other) {
  if (other.n_qubits_ > n_qubits_) throw ShapeError("appended sequence acts on more qubits");
  for (const auto& g : other.gates_) push(g);
}

std::size_t GateSequence::count(GateKind kind) const {
  std::size_t c = 0;
  for (const auto& g : gates_) c += g.kind == kind;
  return c;
}

std::size_t GateSequence::two_qubit_count() const {
  std::size_t c = 0;
  for (const auto& g : gates_) c += g.arity() == 2;
  return c;
}

std::size_t GateSequence::param_slot_count() const {
  std::size_t c = 0;
  for (const auto& g : gates_) c += g.param_slot().has_value();
  return c;
}

void apply_matrix_1q(StateVector& state, int q, std::span<const cplx> m) {
  apply_2x2(state.amplitudes(), bit_of(q, state.n_qubits()), {m[0], m[1], m[2], m[3]});
}

void apply_matrix_2q(StateVector& state, int q0, int q1, std::span<const cplx> m) {
  const int n = state.n_qubits();
  const int b0 = bit_of(q0, n);
  const int b1 = bit_of(q1, n);
  const int lo = std::min(b0, b1);
  const int hi = std::max(b0, b1);
  const std::size_t s0 = std::size_t{1} << b0;
  const std::size_t s1 = std::size_t{1} << b1;
  auto a = state.amplitudes();
  const std::size_t quarter = a.size() >> 2;
  for (std::size_t k = 0; k < quarter; ++k) {
    const std::size_t i = insert_zero(insert_zero(k, lo), hi);
    const std::size_t idx[4] = {i, i | s1, i | s0, i | s0 | s1};
    const cplx v[4] = {a[idx[0]], a[idx[1]], a[idx[2]], a[idx[3]]};
    for (int r = 0; r < 4; ++r) {
      a[idx[r]] = m[4 * r] * v[0] + m[4 * r + 1] * v[1] + m[4 * r + 2] * v[2] + m[4 * r + 3] * v[3];
    }
  }
}

void apply_gate(StateVector& state, const GateOp& g, double angle) {
  const int n = state.n_qubits();
  auto a = state.amplitudes();
  switch (g.kind) {
    case GateKind::X: {
      const std::size_t s = std::size_t{1} << bit_of(g.targets[0], n);
      for (std::size_t i = 0; i < a.size(); ++i) {
        if (!(i & s)) std::swap(a[i], a[i | s]);
      }
      return;
    }
    case GateKind::Z:
      apply_diag_1q(a, bit_of(g.targets[0], n), 1.0, -1.0);
      return;
    case GateKind::S:
      apply_diag_1q(a, bit_of(g.targets[0], n), 1.0, kI);
      return;
    case GateKind::Sdg:
      apply_diag_1q(a, bit_of(g.targets[0], n), 1.0, -kI);
      return;
    case GateKind::H:
    case GateKind::Y:
      apply_2x2(a, bit_of(g.targets[0], n), fixed_2x2(g.kind));
      return;
    case GateKind::CNOT: {
      const std::size_t c = std::size_t{1} << bit_of(g.targets[0], n);
      const std::size_t t = std::size_t{1} << bit_of(g.targets[1], n);
      for (std::size_t i = 0; i < a.size(); ++i) {
        if ((i & c) && !(i & t)) std::swap(a[i], a[i | t]);
      }
      return;
    }
    case GateKind::CZ: {
      const std::size_t m = (std::size_t{1} << bit_of(g.targets[0], n)) | (std::size_t{1} << bit_of(g.targets[1], n));
      for (std::size_t i = 0; i < a.size(); ++i) {
        if ((i & m) == m) a[i] = -a[i];
      }
      return;
    }
    case GateKind::Unitary1:
      apply_matrix_1q(state, g.targets[0], g.matrix);
      return;
    case GateKind::Unitary2:
      apply_matrix_2q(state, g.targets[0], g.targets[1], g.matrix);
      return;
    default:
      apply_rotation(state, g, angle);
  }
}

void apply_gate(StateVector& state, const GateOp& gate, const Bindings& bindings) {
  apply_gate(state, gate, gate.parameterized() ? bindings.resolve(gate.angle) : 0.0);
}

void apply_gate_adjoint(StateVector& state, const GateOp& g, double angle) {
  switch (g.kind) {
    case GateKind::S:
      apply_gate(state, GateOp::fixed(GateKind::Sdg, g.targets[0]), 0.0);
      return;
    case GateKind::Sdg:
      apply_gate(state, GateOp::fixed(GateKind::S, g.targets[0]), 0.0);
      return;
    case GateKind::Unitary1:
    case GateKind::Unitary2: {
      const std::size_t d = g.kind == GateKind::Unitary1 ? 2 : 4;
      std::vector<cplx> dag(d * d);
      for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) dag[i * d + j] = std::conj(g.matrix[j * d + i]);
      }
      if (d == 2) {
        apply_matrix_1q(state, g.targets[0], dag);
      } else {
        apply_matrix_2q(state, g.targets[0], g.targets[1], dag);
      }
      return;
    }
    default:
      // Remaining fixed gates are self-inverse; rotations invert by negating the angle.
      apply_gate(state, g, g.parameterized() ? -angle : 0.0);
  }
}

void run(StateVector& state, const GateSequence& seq, const Bindings& bindings) {
  if (seq.n_qubits() != state.n_qubits()) {
    throw ShapeError("sequence for " + std::to_string(seq.n_qubits()) + " qubits applied to a " +
                     std::to_string(state.n_qubits()) + "-qubit state");
  }
  for (const auto& g : seq.gates()) apply_gate(state, g, bindings);
}

GateSequence bind(const GateSequence& seq, const Bindings& bindings) {
  GateSequence out(seq.n_qubits());
  for (GateOp g : seq.gates()) {
    if (g.parameterized()) g.angle = AngleRef::constant(bindings.resolve(g.angle));
    out.push(std::move(g));
  }
  return out;
}

cplx generator_inner(const StateVector& lhs, const GateOp& g, const StateVector& rhs) {
  const int n = rhs.n_qubits();
  const auto l = lhs.amplitudes();
  const auto r = rhs.amplitudes();
  std::size_t control = 0;
  GateKind axis = g.kind;
  int target = g.targets[0];
  switch (g.kind) {
    case GateKind::CRX: axis = GateKind::RX; control = std::size_t{1} << bit_of(g.targets[0], n); target = g.targets[1]; break;
    case GateKind::CRY: axis = GateKind::RY; control = std::size_t{1} << bit_of(g.targets[0], n); target = g.targets[1]; break;
    case GateKind::CRZ: axis = GateKind::RZ; control = std::size_t{1} << bit_of(g.targets[0], n); target = g.targets[1]; break;
    case GateKind::RX:
    case GateKind::RY:
    case GateKind::RZ:
    case GateKind::RZZ:
      break;
    default:
      throw UnsupportedGateError(gate_name(g.kind) + " has no rotation generator");
  }
  const std::size_t s = std::size_t{1} << bit_of(target, n);
  cplx acc = 0.0;
  switch (axis) {
    case GateKind::RX:
      for (std::size_t i = 0; i < r.size(); ++i) {
        if ((i & control) == control) acc += std::conj(l[i]) * r[i ^ s];
      }
      break;
    case GateKind::RY:
      for (std::size_t i = 0; i < r.size(); ++i) {
        if ((i & control) != control) continue;
        const cplx t = std::conj(l[i]) * r[i ^ s];
        acc += (i & s) ? kI * t : -kI * t;
      }
      break;
    case GateKind::RZ:
      for (std::size_t i = 0; i < r.size(); ++i) {
        if ((i & control) != control) continue;
        const cplx t = std::conj(l[i]) * r[i];
        acc += (i & s) ? -t : t;
      }
      break;
    case GateKind::RZZ: {
      const std::size_t m = s | (std::size_t{1} << bit_of(g.targets[1], n));
      for (std::size_t i = 0; i < r.size(); ++i) {
        const cplx t = std::conj(l[i]) * r[i];
        acc += (std::popcount(i & m) & 1) ? -t : t;
      }
      break;
    }
    default:
      break;
  }
  return acc;
}

}  // namespace qpqc
