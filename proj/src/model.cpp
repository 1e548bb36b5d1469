#include "qpqc/model.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <sstream>

#include "qpqc/error.hpp"
#include "qpqc/linalg.hpp"
#include "qpqc/optim.hpp"

namespace qpqc {

namespace {

constexpr Arch kAllArchs[] = {Arch::HQNNParallel,    Arch::HQNNQuanv,         Arch::QCNN,          Arch::SEQNN_TwoKernel,
                              Arch::SEQNN_FC,        Arch::ClassicalParallel, Arch::ClassicalQuanv};

constexpr double kPi = std::numbers::pi;

// SimplifiedTwoDesign depth of the SEQNN fully connected block.
int seqnn_fc_layers(FcDepth depth) { return depth == FcDepth::Shallow ? 10 : 19; }

class LayerStage final : public Stage {
 public:
  explicit LayerStage(LayerSpec spec) : spec_(spec) {}
  std::string name() const override { return to_string(spec_.kind); }
  std::vector<std::size_t> output_shape(std::span<const std::size_t> in) const override {
    return spec_.output_shape(in);
  }
  std::size_t param_count() const override { return spec_.weight_count(); }
  void init(std::span<double> w, Rng& rng) const override {
    const auto v = he_init(spec_, rng);
    std::copy(v.begin(), v.end(), w.begin());
  }
  Tensor forward(std::span<const double> w, const Tensor& in, StageCache& cache) const override {
    return layer_forward(spec_, w, in, &cache.layer);
  }
  Tensor backward(std::span<const double> w, const StageCache& cache, const Tensor& d_out,
                  std::span<double> d_w) const override {
    auto g = layer_backward(spec_, w, cache.layer, d_out);
    for (std::size_t i = 0; i < g.d_weights.size(); ++i) d_w[i] += g.d_weights[i];
    return std::move(g.d_input);
  }

 private:
  LayerSpec spec_;
};

// pi * sigmoid(x): maps unbounded activations onto rotation angles in (0, pi).
class SquashStage final : public Stage {
 public:
  std::string name() const override { return "angle_squash"; }
  std::vector<std::size_t> output_shape(std::span<const std::size_t> in) const override { return {in.begin(), in.end()}; }
  std::size_t param_count() const override { return 0; }
  void init(std::span<double>, Rng&) const override {}
  Tensor forward(std::span<const double>, const Tensor& in, StageCache& cache) const override {
    cache.input = in;
    Tensor out(in.shape);
    for (std::size_t i = 0; i < in.size(); ++i) out[i] = kPi / (1.0 + std::exp(-in[i]));
    return out;
  }
  Tensor backward(std::span<const double>, const StageCache& cache, const Tensor& d_out,
                  std::span<double>) const override {
    Tensor d(cache.input.shape);
    for (std::size_t i = 0; i < d.size(); ++i) {
      const double s = 1.0 / (1.0 + std::exp(-cache.input[i]));
      d[i] = d_out[i] * kPi * s * (1.0 - s);
    }
    return d;
  }
};

void write_u32(std::ostream& os, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) os.put(static_cast<char>((v >> (8 * i)) & 0xFF));
}
void write_u64(std::ostream& os, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) os.put(static_cast<char>((v >> (8 * i)) & 0xFF));
}
std::uint64_t read_uint(std::istream& is, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) {
    const int c = is.get();
    if (c == EOF) throw IngestionError("checkpoint truncated");
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
  }
  return v;
}

constexpr char kCheckpointMagic[8] = {'Q', 'P', 'Q', 'C', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kCheckpointVersion = 1;

}  // namespace

std::string to_string(Arch arch) {
  switch (arch) {
    case Arch::HQNNParallel: return "HQNNParallel";
    case Arch::HQNNQuanv: return "HQNNQuanv";
    case Arch::QCNN: return "QCNN";
    case Arch::SEQNN_TwoKernel: return "SEQNN_TwoKernel";
    case Arch::SEQNN_FC: return "SEQNN_FC";
    case Arch::ClassicalParallel: return "ClassicalParallel";
    case Arch::ClassicalQuanv: return "ClassicalQuanv";
  }
  return "?";
}

Arch parse_arch(const std::string& name) {
  const std::string key = normalize_name(name);
  for (auto a : kAllArchs) {
    if (normalize_name(to_string(a)) == key) return a;
  }
  throw ConfigError("unknown architecture '" + name + "'");
}

bool is_pure_quantum(Arch arch) {
  return arch == Arch::QCNN || arch == Arch::SEQNN_TwoKernel || arch == Arch::SEQNN_FC;
}

int amplitude_qubits(ImageShape shape) {
  return std::max(1, static_cast<int>(std::bit_width(shape.size() - 1)));
}

void ModelConfig::validate() const {
  if (class_count < 2) throw ConfigError("class_count must be at least 2");
  if (image_shape.height < 1 || image_shape.width < 1 || image_shape.channels < 1) {
    throw ConfigError("image shape must be positive");
  }
  if (arch == Arch::ClassicalParallel || arch == Arch::ClassicalQuanv) {
    if (arch == Arch::ClassicalQuanv && qks != 2 && qks != 3) throw ConfigError("qks must be 2 or 3");
    return;
  }
  encoding.validate();
  if (is_pure_quantum(arch)) {
    if (!is_amplitude(encoding.kind)) throw ConfigError(to_string(arch) + " uses amplitude encoding only");
    if (amplitude_qubits(image_shape) < 4) throw ConfigError(to_string(arch) + " needs at least 4 qubits");
    if (arch == Arch::QCNN && ansatz.kind != AnsatzKind::QCNN) throw ConfigError("QCNN needs the QCNN ansatz");
    if (amplitude_qubits(image_shape) > 20) throw CapacityError("image too large for a pure-quantum model");
    return;
  }
  ansatz.validate();
  if (measurement != MeasurementKind::PauliX && measurement != MeasurementKind::PauliY &&
      measurement != MeasurementKind::PauliZ) {
    throw ConfigError("hybrid models measure PauliX, PauliY or PauliZ");
  }
  if (ansatz.kind == AnsatzKind::QCNN) throw ConfigError("the QCNN ansatz belongs to the QCNN architecture");
  if (arch == Arch::HQNNQuanv) {
    if (qks != 2 && qks != 3) throw ConfigError("qks must be 2 or 3");
    if (qubits_per_circuit != 0 && qubits_per_circuit != qks * qks) {
      throw ConfigError("quanvolution registers have qks^2 qubits");
    }
  }
  if (arch == Arch::HQNNParallel && qubits_per_circuit < 0) throw ConfigError("qubits_per_circuit must be >= 0");
}

std::string ModelConfig::describe() const {
  std::ostringstream os;
  os.precision(17);
  os << "arch=" << to_string(arch) << ";encoding=" << to_string(encoding.kind) << ";enc_layers=" << encoding.layers
     << ";ordering=" << to_string(encoding.ordering)
     << ";ordering_seed=" << (encoding.ordering_seed ? std::to_string(*encoding.ordering_seed) : "-")
     << ";ansatz=" << to_string(ansatz.kind) << ";ansatz_layers=" << ansatz.layers
     << ";ansatz_seed=" << (ansatz.seed ? std::to_string(*ansatz.seed) : "-")
     << ";fc_depth=" << to_string(ansatz.qcnn_fc_depth) << ";measurement=" << to_string(measurement)
     << ";shape=" << image_shape.height << "x" << image_shape.width << "x" << image_shape.channels
     << ";qubits=" << qubits_per_circuit << ";qks=" << qks << ";classes=" << class_count << ";seed=" << seed;
  return os.str();
}

std::uint64_t config_hash(const ModelConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : config.describe()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<LayerSpec> feature_extractor(ImageShape s) {
  const int c = s.channels;
  if (s.height == 16 && s.width == 16) {
    return {LayerSpec::conv2d(c, 12, 3, 1, 1), LayerSpec::relu(), LayerSpec::conv2d(12, 12, 3, 2, 1)};
  }
  if (s.height == 32 && s.width == 32) {
    return {LayerSpec::conv2d(c, 12, 3, 1, 1), LayerSpec::relu(),  LayerSpec::conv2d(12, 24, 3, 2, 1),
            LayerSpec::relu(),                 LayerSpec::conv2d(24, 48, 3, 2, 1), LayerSpec::relu(),
            LayerSpec::conv2d(48, 48, 3, 2, 1)};
  }
  return {LayerSpec::conv2d(c, c, 3, 2, 1)};
}

// ---------------------------------------------------------------- quantum linear

QuantumLinearStage::QuantumLinearStage(std::size_t input_width, const EncodingSpec& encoding,
                                       const AnsatzSpec& ansatz, MeasurementKind measurement, int q,
                                       std::uint64_t seed)
    : input_width_(input_width) {
  if (q < 1) throw ConfigError("qubits_per_circuit must be positive");
  features_per_circuit_ = is_amplitude(encoding.kind) ? std::size_t{1} << q : static_cast<std::size_t>(q);
  if (input_width == 0 || input_width % features_per_circuit_ != 0) {
    throw ShapeError("quantum linear layer: width " + std::to_string(input_width) + " is not a multiple of " +
                     std::to_string(features_per_circuit_) + " features per circuit");
  }
  const std::size_t count = input_width / features_per_circuit_;
  for (std::size_t j = 0; j < count; ++j) {
    CircuitSpec spec;
    spec.encoding = encoding;
    spec.ansatz = ansatz;
    if (ansatz.kind == AnsatzKind::NoEntanglement) spec.ansatz.seed = derive_seed(ansatz.seed.value_or(seed), j);
    spec.measurement = all_qubit_measurement(measurement, q);
    spec.n_qubits = q;
    circuits_.emplace_back(spec);
  }
  param_offsets_.push_back(0);
  for (const auto& c : circuits_) param_offsets_.push_back(param_offsets_.back() + c.param_count());
  outputs_per_circuit_ = static_cast<std::size_t>(q);
}

std::vector<std::size_t> QuantumLinearStage::output_shape(std::span<const std::size_t> in) const {
  if (shape_size(in) != input_width_) throw ShapeError("quantum linear layer input width mismatch");
  return {output_width()};
}

void QuantumLinearStage::init(std::span<double> w, Rng& rng) const {
  for (auto& v : w) v = rng.uniform(-kPi, kPi);
}

Tensor QuantumLinearStage::forward(std::span<const double> w, const Tensor& in, StageCache& cache) const {
  output_shape(in.shape);
  cache.input = in;
  Tensor out({output_width()});
  for (std::size_t j = 0; j < circuits_.size(); ++j) {
    const auto& c = circuits_[j];
    const auto y = c.forward(w.subspan(param_offsets_[j], c.param_count()),
                             std::span<const double>(in.data).subspan(j * features_per_circuit_, features_per_circuit_));
    std::copy(y.begin(), y.end(), out.data.begin() + static_cast<std::ptrdiff_t>(j * outputs_per_circuit_));
  }
  return out;
}

Tensor QuantumLinearStage::backward(std::span<const double> w, const StageCache& cache, const Tensor& d_out,
                                    std::span<double> d_w) const {
  if (d_out.size() != output_width()) throw StateError("quantum linear layer gradient width mismatch");
  Tensor d_in(cache.input.shape);
  for (std::size_t j = 0; j < circuits_.size(); ++j) {
    const auto& c = circuits_[j];
    const auto g = c.grad_adjoint(
        w.subspan(param_offsets_[j], c.param_count()),
        std::span<const double>(cache.input.data).subspan(j * features_per_circuit_, features_per_circuit_),
        std::span<const double>(d_out.data).subspan(j * outputs_per_circuit_, outputs_per_circuit_));
    for (std::size_t i = 0; i < g.d_params.size(); ++i) d_w[param_offsets_[j] + i] += g.d_params[i];
    std::copy(g.d_inputs.begin(), g.d_inputs.end(),
              d_in.data.begin() + static_cast<std::ptrdiff_t>(j * features_per_circuit_));
  }
  return d_in;
}

// ---------------------------------------------------------------- quanvolution

namespace {

Circuit quanv_circuit(int qks, const EncodingSpec& encoding, const AnsatzSpec& ansatz, MeasurementKind m) {
  const int q = qks * qks;
  const auto offset = static_cast<std::uint32_t>(encoding_param_count(encoding, q));
  GateSequence body = build_ansatz_template(ansatz, q, offset);
  body.append(build_ansatz_template(ansatz, q, offset + static_cast<std::uint32_t>(body.param_slot_count())));
  return Circuit(encoding, std::move(body), all_qubit_measurement(m, q), q);
}

}  // namespace

QuanvolutionStage::QuanvolutionStage(ImageShape shape, int qks, const EncodingSpec& encoding,
                                     const AnsatzSpec& ansatz, MeasurementKind measurement)
    : shape_(shape), qks_(qks), circuit_(quanv_circuit(qks, encoding, ansatz, measurement)) {
  if (shape.height < qks || shape.width < qks) throw ShapeError("image smaller than the quantum kernel");
}

std::vector<std::size_t> QuanvolutionStage::output_shape(std::span<const std::size_t> in) const {
  if (in.size() != 3 || in[0] != static_cast<std::size_t>(shape_.channels) ||
      in[1] != static_cast<std::size_t>(shape_.height) || in[2] != static_cast<std::size_t>(shape_.width)) {
    throw ShapeError("quanvolution expects " + shape_string(std::vector<std::size_t>{
                                                   static_cast<std::size_t>(shape_.channels),
                                                   static_cast<std::size_t>(shape_.height),
                                                   static_cast<std::size_t>(shape_.width)}));
  }
  const std::size_t q = static_cast<std::size_t>(qks_ * qks_);
  return {in[0] * q, in[1] - qks_ + 1, in[2] - qks_ + 1};
}

void QuanvolutionStage::init(std::span<double> w, Rng& rng) const {
  for (auto& v : w) v = rng.uniform(-kPi, kPi);
}

std::vector<double> QuanvolutionStage::patch(const Tensor& image, std::size_t c, std::size_t y, std::size_t x) const {
  std::vector<double> p;
  p.reserve(static_cast<std::size_t>(qks_ * qks_));
  for (int dy = 0; dy < qks_; ++dy) {
    for (int dx = 0; dx < qks_; ++dx) p.push_back(image.at(c, y + dy, x + dx));
  }
  if (is_amplitude(circuit_.encoding().kind)) {
    for (auto& v : p) v += 1e-8;
    return p;
  }
  const auto [lo, hi] = std::minmax_element(p.begin(), p.end());
  const double a = *lo, span = *hi - *lo;
  for (auto& v : p) v = span > 0 ? (v - a) / span * kPi : 0.0;
  return p;
}

Tensor QuanvolutionStage::forward(std::span<const double> w, const Tensor& in, StageCache& cache) const {
  Tensor out(output_shape(in.shape));
  cache.input = in;
  const std::size_t q = static_cast<std::size_t>(qks_ * qks_), oh = out.dim(1), ow = out.dim(2);
  for (std::size_t c = 0; c < in.dim(0); ++c) {
    for (std::size_t y = 0; y < oh; ++y) {
      for (std::size_t x = 0; x < ow; ++x) {
        const auto v = circuit_.forward(w, patch(in, c, y, x));
        for (std::size_t k = 0; k < q; ++k) out.at(c * q + k, y, x) = v[k];
      }
    }
  }
  return out;
}

Tensor QuanvolutionStage::backward(std::span<const double> w, const StageCache& cache, const Tensor& d_out,
                                   std::span<double> d_w) const {
  const auto shape = output_shape(cache.input.shape);
  if (d_out.shape != shape) throw StateError("quanvolution gradient shape mismatch");
  const std::size_t q = static_cast<std::size_t>(qks_ * qks_);
  std::vector<double> up(q);
  for (std::size_t c = 0; c < cache.input.dim(0); ++c) {
    for (std::size_t y = 0; y < shape[1]; ++y) {
      for (std::size_t x = 0; x < shape[2]; ++x) {
        bool any = false;
        for (std::size_t k = 0; k < q; ++k) any |= (up[k] = d_out.at(c * q + k, y, x)) != 0.0;
        if (!any) continue;
        const auto g = circuit_.grad_adjoint(w, patch(cache.input, c, y, x), up);
        for (std::size_t i = 0; i < g.d_params.size(); ++i) d_w[i] += g.d_params[i];
      }
    }
  }
  return Tensor(cache.input.shape);
}

// ---------------------------------------------------------------- pure quantum

QuantumClassifierStage::QuantumClassifierStage(Circuit circuit) : circuit_(std::move(circuit)) {}

std::vector<std::size_t> QuantumClassifierStage::output_shape(std::span<const std::size_t> in) const {
  if (shape_size(in) > circuit_.feature_count()) throw ShapeError("image does not fit the amplitude register");
  return {static_cast<std::size_t>(circuit_.measurement().class_count)};
}

void QuantumClassifierStage::init(std::span<double> w, Rng& rng) const {
  for (auto& v : w) v = rng.uniform(-kPi, kPi);
}

Tensor QuantumClassifierStage::forward(std::span<const double> w, const Tensor& in, StageCache& cache) const {
  cache.input = in;
  const auto meas = circuit_.forward(w, in.data);
  return Tensor(output_shape(in.shape), class_scores(meas, circuit_.measurement()));
}

Tensor QuantumClassifierStage::backward(std::span<const double> w, const StageCache& cache, const Tensor& d_out,
                                        std::span<double> d_w) const {
  std::vector<double> up(circuit_.output_size(), 0.0);
  std::copy(d_out.data.begin(), d_out.data.end(), up.begin());
  const auto g = circuit_.grad_adjoint(w, cache.input.data, up);
  for (std::size_t i = 0; i < g.d_params.size(); ++i) d_w[i] += g.d_params[i];
  return Tensor(cache.input.shape, g.d_inputs);
}

// ---------------------------------------------------------------- model

void Model::add_stage(std::unique_ptr<Stage> stage, const std::string& block) {
  const auto in = shapes_.back();
  shapes_.push_back(stage->output_shape(in));
  offsets_.push_back(params_.add_block(std::to_string(stages_.size()) + "_" + block, stage->param_count()));
  stages_.push_back(std::move(stage));
}

Model::Model(const ModelConfig& config) : config_(config) {
  config_.validate();
  const ImageShape s = config_.image_shape;
  shapes_.push_back({static_cast<std::size_t>(s.channels), static_cast<std::size_t>(s.height),
                     static_cast<std::size_t>(s.width)});
  const int k = config_.class_count;
  const auto layer = [&](LayerSpec spec) { add_stage(std::make_unique<LayerStage>(spec), to_string(spec.kind)); };
  const auto width = [&] { return static_cast<int>(shape_size(shapes_.back())); };

  switch (config_.arch) {
    case Arch::HQNNParallel:
    case Arch::ClassicalParallel: {
      for (const auto& l : feature_extractor(s)) layer(l);
      layer(LayerSpec::flatten());
      if (config_.arch == Arch::ClassicalParallel) {
        layer(LayerSpec::dense(width(), 256));
        layer(LayerSpec::leaky_relu());
        layer(LayerSpec::dense(256, 64));
        layer(LayerSpec::leaky_relu());
        layer(LayerSpec::dense(64, k));
        break;
      }
      if (!is_amplitude(config_.encoding.kind)) add_stage(std::make_unique<SquashStage>(), "squash");
      const int q = config_.qubits_per_circuit ? config_.qubits_per_circuit : 8;
      add_stage(std::make_unique<QuantumLinearStage>(shape_size(shapes_.back()), config_.encoding, config_.ansatz,
                                                     config_.measurement, q, config_.seed),
                "quantum");
      layer(LayerSpec::dense(width(), 128));
      layer(LayerSpec::relu());
      layer(LayerSpec::dense(128, k));
      break;
    }
    case Arch::HQNNQuanv:
    case Arch::ClassicalQuanv: {
      const int maps = s.channels * config_.qks * config_.qks;
      if (config_.arch == Arch::HQNNQuanv) {
        add_stage(std::make_unique<QuanvolutionStage>(s, config_.qks, config_.encoding, config_.ansatz,
                                                      config_.measurement),
                  "quanv");
      } else {
        layer(LayerSpec::conv2d(s.channels, maps, 3, 2, 1));
      }
      layer(LayerSpec::relu());
      layer(LayerSpec::conv2d(maps, 32, 3, 1, 1));
      layer(LayerSpec::relu());
      layer(LayerSpec::conv2d(32, 64, 3, 1, 1));
      layer(LayerSpec::relu());
      layer(LayerSpec::global_avg_pool());
      layer(LayerSpec::dense(64, 128));
      layer(LayerSpec::relu());
      layer(LayerSpec::dense(128, k));
      break;
    }
    case Arch::QCNN:
    case Arch::SEQNN_TwoKernel:
    case Arch::SEQNN_FC: {
      const int n = amplitude_qubits(s);
      GateSequence body(n);
      std::vector<int> active;
      std::uint32_t slot = 0;
      if (config_.arch == Arch::QCNN) {
        body = build_qcnn_template(n, config_.ansatz.layers, config_.ansatz.qcnn_fc_depth).gates;
        for (int q = 0; q < n; ++q) active.push_back(q);
      } else {
        std::vector<bool> pooled(static_cast<std::size_t>(n), false);
        if (config_.arch == Arch::SEQNN_TwoKernel) {
          for (int p : {0, 2}) {
            const auto [a, b] = qubits_at_position(p, n);
            append_two_qubit_unitary(body, a, b, slot);
          }
          for (int p : {0, 2}) {
            const auto [a, b] = qubits_at_position(p, n);
            append_pool(body, b, a, slot);
            pooled[static_cast<std::size_t>(b)] = true;
          }
        }
        for (int q = 0; q < n; ++q) {
          if (!pooled[static_cast<std::size_t>(q)]) active.push_back(q);
        }
        append_simplified_two_design(body, active, seqnn_fc_layers(config_.ansatz.qcnn_fc_depth), slot);
      }
      const auto ordering =
          build_ordering(config_.encoding.ordering, s, config_.encoding.ordering_seed, n);
      auto meas = classifier_measurement(config_.measurement, k, active, n, derive_seed(config_.seed, 0xBA5E));
      add_stage(std::make_unique<QuantumClassifierStage>(
                    Circuit(config_.encoding, std::move(body), std::move(meas), n, ordering)),
                "quantum");
      probability_head_ = config_.measurement == MeasurementKind::Histogram;
      break;
    }
  }
  if (shapes_.back() != std::vector<std::size_t>{static_cast<std::size_t>(k)}) {
    throw ShapeError("model does not end in " + std::to_string(k) + " scores");
  }
  for (std::size_t i = 0; i < stages_.size(); ++i) {
    Rng rng(derive_seed(config_.seed, 1000 + i));
    stages_[i]->init(std::span<double>(params_.values()).subspan(offsets_[i], stages_[i]->param_count()), rng);
  }
}

std::size_t Model::quantum_param_count() const {
  std::size_t n = 0;
  for (const auto& s : stages_) n += s->quantum() ? s->param_count() : 0;
  return n;
}

std::vector<double> Model::forward(const Tensor& image) const {
  Tensor x = image;
  StageCache cache;
  const std::span<const double> w(params_.values());
  for (std::size_t i = 0; i < stages_.size(); ++i) {
    x = stages_[i]->forward(w.subspan(offsets_[i], stages_[i]->param_count()), x, cache);
  }
  return x.data;
}

std::vector<double> Model::scores_loss(std::span<const double> scores, int label, double& loss) const {
  auto r = probability_head_ ? histogram_nll(scores, label) : cross_entropy(scores, label);
  loss = r.loss;
  return std::move(r.d_scores);
}

double Model::loss(const Tensor& image, int label) const {
  double l = 0.0;
  scores_loss(forward(image), label, l);
  return l;
}

Model::SampleResult Model::loss_and_grad(const Tensor& image, int label) const {
  const std::span<const double> w(params_.values());
  std::vector<StageCache> caches(stages_.size());
  Tensor x = image;
  for (std::size_t i = 0; i < stages_.size(); ++i) {
    x = stages_[i]->forward(w.subspan(offsets_[i], stages_[i]->param_count()), x, caches[i]);
  }
  SampleResult r;
  r.scores = x.data;
  Tensor d({x.size()}, scores_loss(r.scores, label, r.loss));
  r.grad.assign(params_.size(), 0.0);
  for (std::size_t i = stages_.size(); i-- > 0;) {
    const auto n = stages_[i]->param_count();
    d = stages_[i]->backward(w.subspan(offsets_[i], n), caches[i], d,
                             std::span<double>(r.grad).subspan(offsets_[i], n));
    if (stages_[i]->quantum()) r.d_quantum_input = d.data;
  }
  return r;
}

void Model::save(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write checkpoint " + path);
  os.write(kCheckpointMagic, sizeof kCheckpointMagic);
  write_u32(os, kCheckpointVersion);
  write_u64(os, config_hash(config_));
  write_u32(os, static_cast<std::uint32_t>(params_.layout().size()));
  for (const auto& b : params_.layout()) {
    write_u32(os, static_cast<std::uint32_t>(b.name.size()));
    os.write(b.name.data(), static_cast<std::streamsize>(b.name.size()));
    write_u64(os, b.count);
  }
  write_u64(os, params_.size());
  for (double v : params_.values()) write_u64(os, std::bit_cast<std::uint64_t>(v));
  if (!os) throw Error("failed writing checkpoint " + path);
}

void Model::load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IngestionError("cannot open checkpoint " + path);
  char magic[8];
  is.read(magic, sizeof magic);
  if (!is || std::memcmp(magic, kCheckpointMagic, sizeof magic) != 0) throw IngestionError(path + ": not a checkpoint");
  if (read_uint(is, 4) != kCheckpointVersion) throw IngestionError(path + ": unsupported checkpoint version");
  if (read_uint(is, 8) != config_hash(config_)) throw IngestionError(path + ": checkpoint is for another config");
  const auto blocks = read_uint(is, 4);
  if (blocks != params_.layout().size()) throw IngestionError(path + ": block table mismatch");
  for (const auto& b : params_.layout()) {
    const auto len = read_uint(is, 4);
    std::string name(len, '\0');
    is.read(name.data(), static_cast<std::streamsize>(len));
    if (name != b.name || read_uint(is, 8) != b.count) throw IngestionError(path + ": block table mismatch");
  }
  if (read_uint(is, 8) != params_.size()) throw IngestionError(path + ": parameter count mismatch");
  for (auto& v : params_.values()) v = std::bit_cast<double>(read_uint(is, 8));
}

}  // namespace qpqc
