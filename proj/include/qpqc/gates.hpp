#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qpqc/state_vector.hpp"

namespace qpqc {

enum class GateKind : std::uint8_t {
  H,
  X,
  Y,
  Z,
  S,
  Sdg,
  CNOT,  // targets {control, target}
  CZ,
  RX,
  RY,
  RZ,
  RZZ,  // exp(-i theta/2 Z⊗Z)
  CRX,  // targets {control, target}
  CRY,
  CRZ,
  Unitary1,  // explicit 2x2 matrix
  Unitary2,  // explicit 4x4 matrix, row index = 2*bit(targets[0]) + bit(targets[1])
};

int gate_arity(GateKind kind);
bool is_parameterized(GateKind kind);
bool is_controlled_rotation(GateKind kind);
/// Diagonal in the computational basis.
bool is_diagonal(GateKind kind);
std::string gate_name(GateKind kind);

/// Where a rotation angle comes from when the circuit is evaluated:
/// angle = scale * source, source being 1, params[index], features[index] or
/// features[index] * features[index2].
struct AngleRef {
  enum class Source : std::uint8_t { Constant, Param, Feature, FeatureProduct };

  Source source = Source::Constant;
  double scale = 0.0;
  std::uint32_t index = 0;
  std::uint32_t index2 = 0;

  static AngleRef constant(double angle) { return {Source::Constant, angle, 0, 0}; }
  static AngleRef param(std::uint32_t slot, double scale = 1.0) { return {Source::Param, scale, slot, 0}; }
  static AngleRef feature(std::uint32_t i, double scale = 1.0) { return {Source::Feature, scale, i, 0}; }
  static AngleRef feature_product(std::uint32_t i, std::uint32_t j, double scale = 1.0) {
    return {Source::FeatureProduct, scale, i, j};
  }
};

/// Parameter and feature values a gate sequence is evaluated against.
struct Bindings {
  std::span<const double> params;
  std::span<const double> features;

  double resolve(const AngleRef& ref) const;
};

/// One gate application. Named kinds carry their matrix implicitly; the
/// Unitary kinds carry it explicitly and are checked for unitarity on
/// construction.
struct GateOp {
  GateKind kind = GateKind::X;
  std::array<int, 2> targets{0, 0};
  AngleRef angle;
  std::vector<cplx> matrix;  // Unitary1/Unitary2 only, row-major

  static GateOp fixed(GateKind kind, int q);
  static GateOp fixed(GateKind kind, int q0, int q1);
  static GateOp rotation(GateKind kind, int q, AngleRef angle);
  static GateOp rotation(GateKind kind, int q0, int q1, AngleRef angle);
  /// Throws ShapeError if `m` is not unitary within 1e-10.
  static GateOp unitary(std::span<const cplx> m, int q);
  static GateOp unitary(std::span<const cplx> m, int q0, int q1);

  int arity() const { return gate_arity(kind); }
  bool parameterized() const { return is_parameterized(kind); }
  /// Only meaningful for parameterized gates.
  std::optional<std::uint32_t> param_slot() const;
};

/// Matrix of a gate at a concrete angle (2x2 or 4x4, row-major).
std::vector<cplx> gate_matrix(const GateOp& gate, double angle);

/// Ordered gate list over a fixed register.
class GateSequence {
 public:
  GateSequence() = default;
  explicit GateSequence(int n_qubits) : n_qubits_(n_qubits) {}

  int n_qubits() const { return n_qubits_; }
  const std::vector<GateOp>& gates() const { return gates_; }
  std::size_t size() const { return gates_.size(); }
  bool empty() const { return gates_.empty(); }

  /// Throws ShapeError when targets are out of range or coincide.
  void push(GateOp gate);
  void append(const GateSequence& other);

  std::size_t count(GateKind kind) const;
  std::size_t two_qubit_count() const;
  std::size_t param_slot_count() const;

 private:
  int n_qubits_ = 0;
  std::vector<GateOp> gates_;
};

void apply_gate(StateVector& state, const GateOp& gate, double angle);
/// Resolves the angle from `bindings` first.
void apply_gate(StateVector& state, const GateOp& gate, const Bindings& bindings = {});
/// Applies U^dagger.
void apply_gate_adjoint(StateVector& state, const GateOp& gate, double angle);

void run(StateVector& state, const GateSequence& seq, const Bindings& bindings = {});

/// Replaces every angle by its resolved constant value.
GateSequence bind(const GateSequence& seq, const Bindings& bindings);

/// Inner product <lhs| G |rhs> with G the rotation generator of `gate`
/// (angle derivative: dU/dtheta = -i/2 G U).
cplx generator_inner(const StateVector& lhs, const GateOp& gate, const StateVector& rhs);

/// 2x2 or 4x4 matrix helpers applied to explicit qubits; exposed for
/// oracles and the derivative path.
void apply_matrix_1q(StateVector& state, int q, std::span<const cplx> m);
void apply_matrix_2q(StateVector& state, int q0, int q1, std::span<const cplx> m);

}  // namespace qpqc
