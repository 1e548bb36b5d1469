#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qpqc/gates.hpp"
#include "qpqc/random.hpp"

namespace qpqc {

enum class AnsatzKind : std::uint8_t { NoEntanglement, FullEntanglement, Ring, NQ, QCNN, SimplifiedTwoDesign };
enum class FcDepth : std::uint8_t { Shallow, Deep };

std::string to_string(AnsatzKind kind);
std::string to_string(FcDepth depth);
AnsatzKind parse_ansatz(const std::string& name);
FcDepth parse_fc_depth(const std::string& name);

/// SimplifiedTwoDesign layer count for the QCNN fully connected block.
int qcnn_fc_layers(FcDepth depth);

struct AnsatzSpec {
  AnsatzKind kind = AnsatzKind::NoEntanglement;
  int layers = 1;  // conv-pool layers for QCNN
  std::optional<std::uint64_t> seed;  // NoEntanglement gate placement
  FcDepth qcnn_fc_depth = FcDepth::Shallow;

  void validate() const;
};

/// Flat trainable parameters with named index ranges.
class ParamStore {
 public:
  struct Block {
    std::string name;
    std::size_t offset = 0;
    std::size_t count = 0;
  };

  /// Appends a zero-filled block; returns its offset. Names must be unique.
  std::size_t add_block(const std::string& name, std::size_t count);
  const Block& block(const std::string& name) const;
  bool has_block(const std::string& name) const;
  std::span<double> view(const std::string& name);
  std::span<const double> view(const std::string& name) const;

  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }
  const std::vector<Block>& layout() const { return layout_; }
  std::size_t size() const { return values_.size(); }

  /// Fills every value uniformly in [lo, hi).
  void fill_uniform(Rng& rng, double lo, double hi);

 private:
  std::vector<double> values_;
  std::vector<Block> layout_;
};

/// Exact number of trainable angles of build_ansatz_template(spec, n).
std::size_t parameter_count(const AnsatzSpec& spec, int n_qubits);

/// Symbolic ansatz with parameter slots starting at `param_offset`.
GateSequence build_ansatz_template(const AnsatzSpec& spec, int n_qubits, std::uint32_t param_offset = 0);

/// Concrete ansatz; throws ShapeError unless params.size() == parameter_count.
GateSequence build_ansatz(const AnsatzSpec& spec, int n_qubits, std::span<const double> params);

struct QcnnCircuit {
  GateSequence gates;
  std::vector<int> active_trace;  // active-qubit count before each layer and after the last
};

/// Conv-pool stack followed by a SimplifiedTwoDesign block over all qubits.
/// Throws ShapeError when fewer than 2 qubits would remain active.
QcnnCircuit build_qcnn_template(int n_qubits, int n_conv_pool_layers, FcDepth depth, std::uint32_t param_offset = 0);
QcnnCircuit build_qcnn(int n_qubits, int n_conv_pool_layers, FcDepth depth, std::span<const double> params);
std::size_t qcnn_parameter_count(int n_qubits, int n_conv_pool_layers, FcDepth depth);

// Building blocks; `slot` is advanced past the parameters consumed.

/// Rot(a, b, c) = RZ(a) RY(b) RZ(c) on q; 3 slots.
void append_rot(GateSequence& seq, int q, std::uint32_t& slot);
/// Rot(a)xRot(b), CNOT(a->b), Rot(a)xRot(b); 12 slots.
void append_conv_block(GateSequence& seq, int a, int b, std::uint32_t& slot);
/// Controlled Rot from `control` onto `target`; 3 slots.
void append_pool(GateSequence& seq, int control, int target, std::uint32_t& slot);
/// General two-qubit unitary in the 3-CNOT form; 15 slots.
void append_two_qubit_unitary(GateSequence& seq, int a, int b, std::uint32_t& slot);
/// RY on every listed qubit, then `layers` blocks of CZ + RY pairs on even
/// then odd neighbours (neighbours in list order); |q| + 2 L (|q| - 1) slots.
void append_simplified_two_design(GateSequence& seq, std::span<const int> qubits, int layers, std::uint32_t& slot);

}  // namespace qpqc
