#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "qpqc/ansatz.hpp"
#include "qpqc/circuit.hpp"
#include "qpqc/encodings.hpp"
#include "qpqc/layers.hpp"
#include "qpqc/measurement.hpp"
#include "qpqc/tensor.hpp"

namespace qpqc {

enum class Arch : std::uint8_t {
  HQNNParallel,
  HQNNQuanv,
  QCNN,
  SEQNN_TwoKernel,
  SEQNN_FC,
  ClassicalParallel,
  ClassicalQuanv,
};

std::string to_string(Arch arch);
Arch parse_arch(const std::string& name);
bool is_pure_quantum(Arch arch);

struct ModelConfig {
  Arch arch = Arch::HQNNParallel;
  EncodingSpec encoding;
  AnsatzSpec ansatz;
  MeasurementKind measurement = MeasurementKind::PauliZ;
  ImageShape image_shape{16, 16, 3};
  int qubits_per_circuit = 0;  // HQNNParallel; 0 = 8. Quanv registers are qks^2.
  int qks = 2;
  int class_count = 10;
  std::uint64_t seed = 0;

  /// Throws ConfigError on inconsistent combinations.
  void validate() const;
  /// Canonical text of every field; hashed into checkpoints.
  std::string describe() const;
};

std::uint64_t config_hash(const ModelConfig& config);

/// Per-stage scratch kept between forward and backward.
struct StageCache {
  Tensor input;
  LayerCache layer;
};

/// One step of a model pipeline with its own slice of the parameters.
class Stage {
 public:
  virtual ~Stage() = default;
  virtual std::string name() const = 0;
  virtual std::vector<std::size_t> output_shape(std::span<const std::size_t> input) const = 0;
  virtual std::size_t param_count() const = 0;
  virtual bool quantum() const { return false; }
  virtual void init(std::span<double> w, Rng& rng) const = 0;
  virtual Tensor forward(std::span<const double> w, const Tensor& input, StageCache& cache) const = 0;
  /// Accumulates into d_w; returns the input gradient.
  virtual Tensor backward(std::span<const double> w, const StageCache& cache, const Tensor& d_output,
                          std::span<double> d_w) const = 0;
};

/// Bank of independent PQCs over consecutive chunks of a feature vector.
class QuantumLinearStage final : public Stage {
 public:
  QuantumLinearStage(std::size_t input_width, const EncodingSpec& encoding, const AnsatzSpec& ansatz,
                     MeasurementKind measurement, int qubits_per_circuit, std::uint64_t seed);

  std::string name() const override { return "quantum_linear"; }
  std::vector<std::size_t> output_shape(std::span<const std::size_t> input) const override;
  std::size_t param_count() const override { return param_offsets_.back(); }
  bool quantum() const override { return true; }
  void init(std::span<double> w, Rng& rng) const override;
  Tensor forward(std::span<const double> w, const Tensor& input, StageCache& cache) const override;
  Tensor backward(std::span<const double> w, const StageCache& cache, const Tensor& d_output,
                  std::span<double> d_w) const override;

  std::size_t circuit_count() const { return circuits_.size(); }
  std::size_t features_per_circuit() const { return features_per_circuit_; }
  std::size_t output_width() const { return circuits_.size() * outputs_per_circuit_; }
  const Circuit& circuit(std::size_t j) const { return circuits_[j]; }

 private:
  std::vector<Circuit> circuits_;
  std::size_t input_width_ = 0;
  std::size_t features_per_circuit_ = 0;
  std::size_t outputs_per_circuit_ = 0;
  std::vector<std::size_t> param_offsets_;  // circuit j owns [offsets[j], offsets[j+1])
};

/// Shared-parameter PQC slid over qks x qks patches of every channel.
class QuanvolutionStage final : public Stage {
 public:
  QuanvolutionStage(ImageShape shape, int qks, const EncodingSpec& encoding, const AnsatzSpec& ansatz,
                    MeasurementKind measurement);

  std::string name() const override { return "quanvolution"; }
  std::vector<std::size_t> output_shape(std::span<const std::size_t> input) const override;
  std::size_t param_count() const override { return circuit_.param_count(); }
  bool quantum() const override { return true; }
  void init(std::span<double> w, Rng& rng) const override;
  Tensor forward(std::span<const double> w, const Tensor& input, StageCache& cache) const override;
  /// Input gradients are not propagated (the layer reads raw pixels).
  Tensor backward(std::span<const double> w, const StageCache& cache, const Tensor& d_output,
                  std::span<double> d_w) const override;

  /// Flattened, rescaled patch fed to the circuit.
  std::vector<double> patch(const Tensor& image, std::size_t c, std::size_t y, std::size_t x) const;
  const Circuit& circuit() const { return circuit_; }

 private:
  ImageShape shape_;
  int qks_ = 2;
  Circuit circuit_;
};

/// Amplitude-encoded classifier circuit over a whole image; outputs K class scores.
class QuantumClassifierStage final : public Stage {
 public:
  explicit QuantumClassifierStage(Circuit circuit);

  std::string name() const override { return "quantum_classifier"; }
  std::vector<std::size_t> output_shape(std::span<const std::size_t> input) const override;
  std::size_t param_count() const override { return circuit_.param_count(); }
  bool quantum() const override { return true; }
  void init(std::span<double> w, Rng& rng) const override;
  Tensor forward(std::span<const double> w, const Tensor& input, StageCache& cache) const override;
  Tensor backward(std::span<const double> w, const StageCache& cache, const Tensor& d_output,
                  std::span<double> d_w) const override;

  const Circuit& circuit() const { return circuit_; }

 private:
  Circuit circuit_;
};

/// Trainable image classifier: a pipeline of stages ending in K class scores.
class Model {
 public:
  explicit Model(const ModelConfig& config);

  const ModelConfig& config() const { return config_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }
  std::size_t param_count() const { return params_.size(); }
  std::size_t quantum_param_count() const;
  const std::vector<std::unique_ptr<Stage>>& stages() const { return stages_; }
  /// Scores are class probabilities for Histogram heads, logits or expectations otherwise.
  bool probability_head() const { return probability_head_; }

  std::vector<double> forward(const Tensor& image) const;

  struct SampleResult {
    double loss = 0.0;
    std::vector<double> scores;
    std::vector<double> grad;  // aligned with params()
    std::vector<double> d_quantum_input;  // gradient arriving at the first quantum stage's input
  };
  SampleResult loss_and_grad(const Tensor& image, int label) const;
  double loss(const Tensor& image, int label) const;

  /// Binary checkpoint: header (magic, version, config hash, block table) then
  /// little-endian float64 parameters. load() rejects a different config.
  void save(const std::string& path) const;
  void load(const std::string& path);

 private:
  void add_stage(std::unique_ptr<Stage> stage, const std::string& block);
  std::vector<double> scores_loss(std::span<const double> scores, int label, double& loss) const;

  ModelConfig config_;
  ParamStore params_;
  std::vector<std::unique_ptr<Stage>> stages_;
  std::vector<std::size_t> offsets_;
  std::vector<std::vector<std::size_t>> shapes_;  // input shape of each stage, then the output shape
  bool probability_head_ = false;
};

/// Classical feature extractor used by HQNNParallel and ClassicalParallel.
std::vector<LayerSpec> feature_extractor(ImageShape shape);

/// Smallest register that holds the image amplitudes.
int amplitude_qubits(ImageShape shape);

}  // namespace qpqc
