#include "qpqc/ansatz.hpp"

#include <algorithm>
#include <numeric>

#include "qpqc/error.hpp"
#include "qpqc/linalg.hpp"

namespace qpqc {

namespace {

constexpr AnsatzKind kAllAnsaetze[] = {AnsatzKind::NoEntanglement, AnsatzKind::FullEntanglement, AnsatzKind::Ring,
                                       AnsatzKind::NQ, AnsatzKind::QCNN, AnsatzKind::SimplifiedTwoDesign};

AngleRef next_param(std::uint32_t& slot) { return AngleRef::param(slot++); }

void append_ry_rz(GateSequence& seq, int n, std::uint32_t& slot) {
  for (int q = 0; q < n; ++q) {
    seq.push(GateOp::rotation(GateKind::RY, q, next_param(slot)));
    seq.push(GateOp::rotation(GateKind::RZ, q, next_param(slot)));
  }
}

// Bernoulli(0.5) placement mask, layer-major.
std::vector<bool> no_entanglement_mask(const AnsatzSpec& spec, int n) {
  Rng rng(*spec.seed);
  std::vector<bool> mask(static_cast<std::size_t>(spec.layers) * n);
  for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = rng.bernoulli(0.5);
  return mask;
}

}  // namespace

std::string to_string(AnsatzKind kind) {
  switch (kind) {
    case AnsatzKind::NoEntanglement: return "NoEntanglement";
    case AnsatzKind::FullEntanglement: return "FullEntanglement";
    case AnsatzKind::Ring: return "Ring";
    case AnsatzKind::NQ: return "NQ";
    case AnsatzKind::QCNN: return "QCNN";
    case AnsatzKind::SimplifiedTwoDesign: return "SimplifiedTwoDesign";
  }
  return "?";
}

std::string to_string(FcDepth depth) { return depth == FcDepth::Shallow ? "shallow" : "deep"; }

AnsatzKind parse_ansatz(const std::string& name) {
  const std::string key = normalize_name(name);
  for (auto k : kAllAnsaetze) {
    if (normalize_name(to_string(k)) == key) return k;
  }
  throw ConfigError("unknown ansatz '" + name + "'");
}

FcDepth parse_fc_depth(const std::string& name) {
  const std::string key = normalize_name(name);
  if (key == "shallow") return FcDepth::Shallow;
  if (key == "deep") return FcDepth::Deep;
  throw ConfigError("unknown fc depth '" + name + "'");
}

int qcnn_fc_layers(FcDepth depth) { return depth == FcDepth::Shallow ? 1 : 3; }

void AnsatzSpec::validate() const {
  if (layers < 1) throw ConfigError("ansatz layers must be >= 1");
  if ((kind == AnsatzKind::NoEntanglement) != seed.has_value()) {
    throw ConfigError("ansatz seed must be given exactly for NoEntanglement");
  }
}

std::size_t ParamStore::add_block(const std::string& name, std::size_t count) {
  if (has_block(name)) throw ConfigError("duplicate parameter block '" + name + "'");
  const std::size_t offset = values_.size();
  layout_.push_back({name, offset, count});
  values_.resize(offset + count, 0.0);
  return offset;
}

const ParamStore::Block& ParamStore::block(const std::string& name) const {
  for (const auto& b : layout_) {
    if (b.name == name) return b;
  }
  throw ShapeError("no parameter block '" + name + "'");
}

bool ParamStore::has_block(const std::string& name) const {
  return std::any_of(layout_.begin(), layout_.end(), [&](const Block& b) { return b.name == name; });
}

std::span<double> ParamStore::view(const std::string& name) {
  const auto& b = block(name);
  return std::span<double>(values_).subspan(b.offset, b.count);
}

std::span<const double> ParamStore::view(const std::string& name) const {
  const auto& b = block(name);
  return std::span<const double>(values_).subspan(b.offset, b.count);
}

void ParamStore::fill_uniform(Rng& rng, double lo, double hi) {
  for (auto& v : values_) v = rng.uniform(lo, hi);
}

void append_rot(GateSequence& seq, int q, std::uint32_t& slot) {
  const auto a = next_param(slot), b = next_param(slot), c = next_param(slot);
  seq.push(GateOp::rotation(GateKind::RZ, q, c));
  seq.push(GateOp::rotation(GateKind::RY, q, b));
  seq.push(GateOp::rotation(GateKind::RZ, q, a));
}

void append_conv_block(GateSequence& seq, int a, int b, std::uint32_t& slot) {
  append_rot(seq, a, slot);
  append_rot(seq, b, slot);
  seq.push(GateOp::fixed(GateKind::CNOT, a, b));
  append_rot(seq, a, slot);
  append_rot(seq, b, slot);
}

void append_pool(GateSequence& seq, int control, int target, std::uint32_t& slot) {
  const auto a = next_param(slot), b = next_param(slot), c = next_param(slot);
  seq.push(GateOp::rotation(GateKind::CRZ, control, target, c));
  seq.push(GateOp::rotation(GateKind::CRY, control, target, b));
  seq.push(GateOp::rotation(GateKind::CRZ, control, target, a));
}

void append_two_qubit_unitary(GateSequence& seq, int a, int b, std::uint32_t& slot) {
  append_rot(seq, a, slot);
  append_rot(seq, b, slot);
  seq.push(GateOp::fixed(GateKind::CNOT, b, a));
  seq.push(GateOp::rotation(GateKind::RZ, a, next_param(slot)));
  seq.push(GateOp::rotation(GateKind::RY, b, next_param(slot)));
  seq.push(GateOp::fixed(GateKind::CNOT, a, b));
  seq.push(GateOp::rotation(GateKind::RY, b, next_param(slot)));
  seq.push(GateOp::fixed(GateKind::CNOT, b, a));
  append_rot(seq, a, slot);
  append_rot(seq, b, slot);
}

void append_simplified_two_design(GateSequence& seq, std::span<const int> qubits, int layers, std::uint32_t& slot) {
  const int m = static_cast<int>(qubits.size());
  for (int q : qubits) seq.push(GateOp::rotation(GateKind::RY, q, next_param(slot)));
  for (int l = 0; l < layers; ++l) {
    for (int start : {0, 1}) {
      for (int i = start; i + 1 < m; i += 2) {
        seq.push(GateOp::fixed(GateKind::CZ, qubits[i], qubits[i + 1]));
        seq.push(GateOp::rotation(GateKind::RY, qubits[i], next_param(slot)));
        seq.push(GateOp::rotation(GateKind::RY, qubits[i + 1], next_param(slot)));
      }
    }
  }
}

QcnnCircuit build_qcnn_template(int n, int n_layers, FcDepth depth, std::uint32_t param_offset) {
  if (n < 4) throw ShapeError("QCNN needs at least 4 qubits");
  if (n_layers < 1) throw ConfigError("QCNN needs at least one conv-pool layer");
  QcnnCircuit out{GateSequence(n), {}};
  std::vector<int> active(static_cast<std::size_t>(n));
  std::iota(active.begin(), active.end(), 0);
  std::uint32_t slot = param_offset;
  out.active_trace.push_back(n);
  for (int l = 0; l < n_layers; ++l) {
    const int m = static_cast<int>(active.size());
    if (m / 2 + m % 2 < 2) {
      throw ShapeError("QCNN with " + std::to_string(n_layers) + " layers leaves fewer than 2 active qubits");
    }
    for (int start : {0, 1}) {
      for (int i = start; i + 1 < m; i += 2) append_conv_block(out.gates, active[i], active[i + 1], slot);
    }
    std::vector<int> kept;
    for (int i = 0; i < m; i += 2) {
      if (i + 1 < m) append_pool(out.gates, active[i + 1], active[i], slot);
      kept.push_back(active[i]);
    }
    active = std::move(kept);
    out.active_trace.push_back(static_cast<int>(active.size()));
  }
  std::vector<int> all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), 0);
  append_simplified_two_design(out.gates, all, qcnn_fc_layers(depth), slot);
  return out;
}

std::size_t qcnn_parameter_count(int n, int n_layers, FcDepth depth) {
  return build_qcnn_template(n, n_layers, depth).gates.param_slot_count();
}

QcnnCircuit build_qcnn(int n, int n_layers, FcDepth depth, std::span<const double> params) {
  auto tpl = build_qcnn_template(n, n_layers, depth);
  const std::size_t expected = tpl.gates.param_slot_count();
  if (params.size() != expected) {
    throw ShapeError("QCNN expects " + std::to_string(expected) + " parameters, got " + std::to_string(params.size()));
  }
  tpl.gates = bind(tpl.gates, Bindings{params, {}});
  return tpl;
}

GateSequence build_ansatz_template(const AnsatzSpec& spec, int n, std::uint32_t param_offset) {
  spec.validate();
  if (spec.kind == AnsatzKind::QCNN) return build_qcnn_template(n, spec.layers, spec.qcnn_fc_depth, param_offset).gates;
  GateSequence seq(n);
  std::uint32_t slot = param_offset;
  switch (spec.kind) {
    case AnsatzKind::NoEntanglement: {
      const auto mask = no_entanglement_mask(spec, n);
      for (std::size_t i = 0; i < mask.size(); ++i) {
        if (mask[i]) seq.push(GateOp::rotation(GateKind::RZ, static_cast<int>(i % n), next_param(slot)));
      }
      break;
    }
    case AnsatzKind::FullEntanglement:
      for (int l = 0; l < spec.layers; ++l) {
        for (int q = 0; q < n; ++q) append_rot(seq, q, slot);
        if (n < 2) continue;
        const int r = l % (n - 1) + 1;
        for (int q = 0; q < n; ++q) seq.push(GateOp::fixed(GateKind::CNOT, q, (q + r) % n));
      }
      break;
    case AnsatzKind::Ring:
      for (int l = 0; l < spec.layers; ++l) {
        append_ry_rz(seq, n, slot);
        if (n == 2) {
          seq.push(GateOp::fixed(GateKind::CZ, 0, 1));
        } else if (n > 2) {
          for (int q = 0; q < n; ++q) seq.push(GateOp::fixed(GateKind::CZ, q, (q + 1) % n));
        }
      }
      break;
    case AnsatzKind::NQ:
      for (int l = 0; l < spec.layers; ++l) {
        append_ry_rz(seq, n, slot);
        for (int q = 0; q + 1 < n; ++q) seq.push(GateOp::fixed(GateKind::CNOT, q, q + 1));
      }
      break;
    case AnsatzKind::SimplifiedTwoDesign: {
      std::vector<int> all(static_cast<std::size_t>(n));
      std::iota(all.begin(), all.end(), 0);
      append_simplified_two_design(seq, all, spec.layers, slot);
      break;
    }
    case AnsatzKind::QCNN:
      break;
  }
  return seq;
}

std::size_t parameter_count(const AnsatzSpec& spec, int n) {
  spec.validate();
  const auto nl = static_cast<std::size_t>(spec.layers) * n;
  switch (spec.kind) {
    case AnsatzKind::NoEntanglement: {
      const auto mask = no_entanglement_mask(spec, n);
      return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), true));
    }
    case AnsatzKind::FullEntanglement: return 3 * nl;
    case AnsatzKind::Ring:
    case AnsatzKind::NQ: return 2 * nl;
    case AnsatzKind::SimplifiedTwoDesign:
      return static_cast<std::size_t>(n) + 2 * static_cast<std::size_t>(spec.layers) * (n - 1);
    case AnsatzKind::QCNN: return qcnn_parameter_count(n, spec.layers, spec.qcnn_fc_depth);
  }
  return 0;
}

GateSequence build_ansatz(const AnsatzSpec& spec, int n, std::span<const double> params) {
  const std::size_t expected = parameter_count(spec, n);
  if (params.size() != expected) {
    throw ShapeError(to_string(spec.kind) + " expects " + std::to_string(expected) + " parameters, got " +
                     std::to_string(params.size()));
  }
  return bind(build_ansatz_template(spec, n), Bindings{params, {}});
}

}  // namespace qpqc
