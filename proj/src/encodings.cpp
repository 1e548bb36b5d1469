#include "qpqc/encodings.hpp"

#include <bit>
#include <cmath>
#include <numeric>
#include <string>

#include "qpqc/error.hpp"
#include "qpqc/linalg.hpp"
#include "qpqc/random.hpp"

namespace qpqc {

namespace {

constexpr EncodingKind kAllEncodings[] = {
    EncodingKind::AngleX, EncodingKind::AngleY, EncodingKind::AngleZ, EncodingKind::Amplitude,
    EncodingKind::IQP,    EncodingKind::QAOA_X, EncodingKind::QAOA_Y, EncodingKind::QAOA_Z,
    EncodingKind::Ring,   EncodingKind::Waterfall,
};

constexpr OrderingKind kAllOrderings[] = {OrderingKind::Flatten, OrderingKind::Squared, OrderingKind::VHLines,
                                          OrderingKind::Random};

GateKind axis_rotation(EncodingKind kind) {
  switch (kind) {
    case EncodingKind::AngleX:
    case EncodingKind::QAOA_X:
      return GateKind::RX;
    case EncodingKind::AngleY:
    case EncodingKind::QAOA_Y:
      return GateKind::RY;
    default:
      return GateKind::RZ;
  }
}

int qaoa_ring_size(int n) { return n >= 2 ? n : 0; }

// Position of each pixel of an H x W plane inside the plane's amplitude block.
std::vector<std::uint32_t> spatial_order(OrderingKind kind, int h, int w, std::optional<std::uint64_t> seed) {
  std::vector<std::uint32_t> pos(static_cast<std::size_t>(h) * w);
  switch (kind) {
    case OrderingKind::Flatten:
      std::iota(pos.begin(), pos.end(), 0u);
      break;
    case OrderingKind::Squared:
      if (h % 2 || w % 2) throw ShapeError("Squared ordering needs even height and width");
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          const std::uint32_t block = static_cast<std::uint32_t>((y / 2) * (w / 2) + x / 2);
          pos[y * w + x] = 4 * block + 2 * (y % 2) + (x % 2);
        }
      }
      break;
    case OrderingKind::VHLines:
      // 4x4 tiles, row-major inside: bits 0-1 walk a row (position-0 gate),
      // bits 2-3 walk a column (position-2 gate).
      if (h % 4 || w % 4) throw ShapeError("VHLines ordering needs height and width divisible by 4");
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          const std::uint32_t tile = static_cast<std::uint32_t>((y / 4) * (w / 4) + x / 4);
          pos[y * w + x] = 16 * tile + 4 * (y % 4) + (x % 4);
        }
      }
      break;
    case OrderingKind::Random: {
      if (!seed) throw ConfigError("Random ordering requires a seed");
      std::iota(pos.begin(), pos.end(), 0u);
      Rng rng(*seed);
      rng.shuffle(std::span<std::uint32_t>(pos));
      break;
    }
  }
  return pos;
}

}  // namespace

std::string to_string(EncodingKind kind) {
  switch (kind) {
    case EncodingKind::AngleX: return "AngleX";
    case EncodingKind::AngleY: return "AngleY";
    case EncodingKind::AngleZ: return "AngleZ";
    case EncodingKind::Amplitude: return "Amplitude";
    case EncodingKind::IQP: return "IQP";
    case EncodingKind::QAOA_X: return "QAOA_X";
    case EncodingKind::QAOA_Y: return "QAOA_Y";
    case EncodingKind::QAOA_Z: return "QAOA_Z";
    case EncodingKind::Ring: return "Ring";
    case EncodingKind::Waterfall: return "Waterfall";
  }
  return "?";
}

std::string to_string(OrderingKind kind) {
  switch (kind) {
    case OrderingKind::Flatten: return "Flatten";
    case OrderingKind::Squared: return "Squared";
    case OrderingKind::VHLines: return "VHLines";
    case OrderingKind::Random: return "Random";
  }
  return "?";
}

EncodingKind parse_encoding(const std::string& name) {
  const std::string key = normalize_name(name);
  for (auto k : kAllEncodings) {
    if (normalize_name(to_string(k)) == key) return k;
  }
  throw ConfigError("unknown encoding '" + name + "'");
}

OrderingKind parse_ordering(const std::string& name) {
  const std::string key = normalize_name(name);
  for (auto k : kAllOrderings) {
    if (normalize_name(to_string(k)) == key) return k;
  }
  throw ConfigError("unknown ordering '" + name + "'");
}

bool is_amplitude(EncodingKind kind) { return kind == EncodingKind::Amplitude; }

bool is_qaoa(EncodingKind kind) {
  return kind == EncodingKind::QAOA_X || kind == EncodingKind::QAOA_Y || kind == EncodingKind::QAOA_Z;
}

void EncodingSpec::validate() const {
  if (layers < 1) throw ConfigError("encoding layers must be >= 1");
  if (kind == EncodingKind::Amplitude && (ordering == OrderingKind::Random) != ordering_seed.has_value()) {
    throw ConfigError("ordering_seed must be given exactly when the ordering is Random");
  }
}

std::size_t encoding_param_count(const EncodingSpec& spec, int n_qubits) {
  if (!is_qaoa(spec.kind)) return 0;
  return static_cast<std::size_t>(spec.layers) * (qaoa_ring_size(n_qubits) + n_qubits);
}

GateSequence encode_template(const EncodingSpec& spec, int n, std::uint32_t param_offset) {
  spec.validate();
  if (spec.kind == EncodingKind::Amplitude) {
    throw ConfigError("amplitude encoding is a state preparation; use amplitude_prepare");
  }
  GateSequence seq(n);
  const auto feature = [](int j) { return AngleRef::feature(static_cast<std::uint32_t>(j)); };
  switch (spec.kind) {
    case EncodingKind::AngleX:
    case EncodingKind::AngleY:
    case EncodingKind::AngleZ:
      for (int j = 0; j < n; ++j) seq.push(GateOp::rotation(axis_rotation(spec.kind), j, feature(j)));
      break;
    case EncodingKind::IQP:
      for (int l = 0; l < spec.layers; ++l) {
        for (int j = 0; j < n; ++j) seq.push(GateOp::fixed(GateKind::H, j));
        for (int j = 0; j < n; ++j) seq.push(GateOp::rotation(GateKind::RZ, j, feature(j)));
        for (int j = 0; j < n; ++j) {
          for (int k = j + 1; k < n; ++k) {
            seq.push(GateOp::rotation(GateKind::RZZ, j, k,
                                      AngleRef::feature_product(static_cast<std::uint32_t>(j),
                                                                static_cast<std::uint32_t>(k))));
          }
        }
      }
      break;
    case EncodingKind::QAOA_X:
    case EncodingKind::QAOA_Y:
    case EncodingKind::QAOA_Z: {
      std::uint32_t slot = param_offset;
      const GateKind field = axis_rotation(spec.kind);
      for (int l = 0; l < spec.layers; ++l) {
        for (int j = 0; j < n; ++j) seq.push(GateOp::rotation(GateKind::RX, j, feature(j)));
        for (int j = 0; j < qaoa_ring_size(n); ++j) {
          seq.push(GateOp::rotation(GateKind::RZZ, j, (j + 1) % n, AngleRef::param(slot++)));
        }
        for (int j = 0; j < n; ++j) seq.push(GateOp::rotation(field, j, AngleRef::param(slot++)));
      }
      break;
    }
    case EncodingKind::Ring:
      if (n < 2) throw ShapeError("ring encoding needs at least 2 qubits");
      for (int l = 0; l < spec.layers; ++l) {
        for (int j = 0; j < n; ++j) seq.push(GateOp::rotation(GateKind::RY, j, feature(j)));
        for (int j = 0; j < n; ++j) seq.push(GateOp::fixed(GateKind::CNOT, j, (j + 1) % n));
      }
      break;
    case EncodingKind::Waterfall:
      for (int l = 0; l < spec.layers; ++l) {
        for (int j = 0; j < n; ++j) seq.push(GateOp::rotation(GateKind::RY, j, feature(j)));
        for (int j = 0; j < n; ++j) {
          for (int k = j + 1; k < n; ++k) seq.push(GateOp::fixed(GateKind::CNOT, j, k));
        }
      }
      break;
    case EncodingKind::Amplitude:
      break;
  }
  return seq;
}

GateSequence encode(const EncodingSpec& spec, std::span<const double> features, int n_qubits) {
  if (features.size() != static_cast<std::size_t>(n_qubits)) {
    throw ShapeError(to_string(spec.kind) + " encoding expects " + std::to_string(n_qubits) + " features, got " +
                     std::to_string(features.size()));
  }
  const std::size_t n_params = encoding_param_count(spec, n_qubits);
  if (spec.qaoa_params.size() != n_params) {
    throw ShapeError("QAOA encoding expects " + std::to_string(n_params) + " angles, got " +
                     std::to_string(spec.qaoa_params.size()));
  }
  return bind(encode_template(spec, n_qubits), Bindings{spec.qaoa_params, features});
}

std::vector<std::uint32_t> Ordering::inverse() const {
  std::vector<std::uint32_t> inv(permutation.size());
  for (std::size_t i = 0; i < permutation.size(); ++i) inv[permutation[i]] = static_cast<std::uint32_t>(i);
  return inv;
}

Ordering Ordering::identity(int n_qubits) {
  Ordering o;
  o.n_qubits = n_qubits;
  o.permutation.resize(std::size_t{1} << n_qubits);
  std::iota(o.permutation.begin(), o.permutation.end(), 0u);
  return o;
}

Ordering build_ordering(OrderingKind kind, ImageShape shape, std::optional<std::uint64_t> seed, int n_qubits) {
  if (shape.height < 1 || shape.width < 1 || shape.channels < 1) throw ShapeError("image shape must be positive");
  const std::size_t pixels = shape.size();
  const int needed = std::max(1, static_cast<int>(std::bit_width(pixels - 1)));
  if (n_qubits == 0) n_qubits = needed;
  if (n_qubits > kMaxQubits || needed > n_qubits) {
    throw CapacityError("image of " + std::to_string(pixels) + " values does not fit in " +
                        std::to_string(n_qubits) + " qubits");
  }
  const auto plane = spatial_order(kind, shape.height, shape.width, seed);
  const std::uint32_t hw = static_cast<std::uint32_t>(plane.size());
  Ordering o = Ordering::identity(n_qubits);
  for (int c = 0; c < shape.channels; ++c) {
    for (std::uint32_t p = 0; p < hw; ++p) o.permutation[c * hw + p] = c * hw + plane[p];
  }
  return o;
}

StateVector amplitude_prepare(std::span<const double> features, const Ordering& ordering, int n_qubits) {
  const std::size_t dim = std::size_t{1} << n_qubits;
  if (n_qubits < 1 || n_qubits > kMaxQubits) throw CapacityError("qubit count out of range");
  if (features.size() > dim || features.size() > ordering.size()) {
    throw ShapeError(std::to_string(features.size()) + " features exceed " + std::to_string(std::min(dim, ordering.size())) +
                     " amplitudes");
  }
  if (ordering.n_qubits > n_qubits) throw ShapeError("ordering built for a larger register");
  double norm = 0.0;
  for (double f : features) norm += f * f;
  if (norm == 0.0) throw DegenerateInputError("amplitude encoding of an all-zero feature vector");
  norm = std::sqrt(norm);
  std::vector<cplx> amps(dim);
  for (std::size_t i = 0; i < features.size(); ++i) amps[ordering.permutation[i]] = features[i] / norm;
  return StateVector::from_amplitudes(std::move(amps));
}

std::vector<std::array<std::uint32_t, 4>> mixing_groups(int p, int n_qubits) {
  if (n_qubits < 2 || p < 0 || p > n_qubits - 2) {
    throw ShapeError("gate position " + std::to_string(p) + " invalid for " + std::to_string(n_qubits) + " qubits");
  }
  const std::uint32_t step = 1u << p;
  const std::uint32_t dim = 1u << n_qubits;
  std::vector<std::array<std::uint32_t, 4>> groups;
  groups.reserve(dim / 4);
  for (std::uint32_t l = 0; l < dim; ++l) {
    if (l & (3u << p)) continue;  // only representatives with both bits clear
    groups.push_back({l, l + step, l + 2 * step, l + 3 * step});
  }
  return groups;
}

std::array<int, 2> qubits_at_position(int p, int n_qubits) {
  if (n_qubits < 2 || p < 0 || p > n_qubits - 2) throw ShapeError("gate position out of range");
  return {n_qubits - 2 - p, n_qubits - 1 - p};
}

LocalityReport verify_kernel_locality(int p, int n, int trials, std::uint64_t seed,
                                      const std::vector<std::array<std::uint32_t, 4>>* groups) {
  if (n > 8) throw CapacityError("locality verification limited to 8 qubits");
  const auto own_groups = mixing_groups(p, n);
  const auto& table = groups ? *groups : own_groups;
  const std::size_t dim = std::size_t{1} << n;
  std::vector<std::uint32_t> group_of(dim, UINT32_MAX);
  for (std::size_t gi = 0; gi < table.size(); ++gi) {
    for (auto idx : table[gi]) {
      if (idx < dim) group_of[idx] = static_cast<std::uint32_t>(gi);
    }
  }

  LocalityReport report;
  report.trials = trials;
  Rng rng(seed);
  const auto [q0, q1] = qubits_at_position(p, n);
  const std::size_t low = std::size_t{1} << p;
  const std::size_t high = dim / (4 * low);
  for (int t = 0; t < trials; ++t) {
    const auto g = haar_unitary(4, rng);
    // Full unitary I_high ⊗ G ⊗ I_low, entry by entry.
    std::vector<cplx> full(dim * dim);
    for (std::size_t r = 0; r < dim; ++r) {
      const std::size_t rh = r / (4 * low), rg = (r / low) % 4, rl = r % low;
      for (std::size_t c = 0; c < dim; ++c) {
        const std::size_t ch = c / (4 * low), cg = (c / low) % 4, cl = c % low;
        if (rh == ch && rl == cl) full[r * dim + c] = g[rg * 4 + cg];
      }
    }
    (void)high;
    // The Jacobian d out_i / d in_j of a linear map is its matrix entry.
    for (std::size_t i = 0; i < dim; ++i) {
      for (std::size_t j = 0; j < dim; ++j) {
        if (group_of[i] != UINT32_MAX && group_of[i] == group_of[j]) continue;
        report.max_off_group = std::max(report.max_off_group, std::abs(full[i * dim + j]));
      }
    }
    const GateOp gate = GateOp::unitary(g, q0, q1);
    for (std::size_t j = 0; j < dim; ++j) {
      std::vector<cplx> basis(dim);
      basis[j] = 1.0;
      auto state = StateVector::from_amplitudes(std::move(basis));
      apply_gate(state, gate);
      for (std::size_t i = 0; i < dim; ++i) {
        report.max_kernel_error = std::max(report.max_kernel_error, std::abs(state[i] - full[i * dim + j]));
      }
    }
  }
  report.pass = report.max_off_group < 1e-10 && report.max_kernel_error < 1e-10;
  return report;
}

}  // namespace qpqc
