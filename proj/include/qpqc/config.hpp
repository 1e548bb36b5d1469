#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qpqc/model.hpp"

namespace qpqc {

struct ExperimentConfig {
  ModelConfig model;
  std::string dataset_path;
  double split_fraction = 0.8;
  int batch_size = 0;  // 0 = 4 for quanvolution models, 16 otherwise
  int epochs = 30;
  int patience = 10;
  double learning_rate = 0.01;
  std::uint64_t seed = 0;  // model init, split and shuffling
  std::string metrics_out_path;
  std::string checkpoint_path;
  int workers = 0;  // 0 = default_workers()

  int effective_batch_size() const;
  /// Throws ConfigError.
  void validate() const;
};

/// Cartesian grid over the listed axes; empty axes keep the base value.
struct SweepGrid {
  std::vector<Arch> archs;
  std::vector<EncodingKind> encodings;
  std::vector<AnsatzKind> ansaetze;
  std::vector<MeasurementKind> measurements;
  std::vector<OrderingKind> orderings;
  std::vector<std::uint64_t> seeds;
  std::string out_dir = "sweep";
};

struct ConfigFile {
  ExperimentConfig experiment;
  SweepGrid sweep;
  int synth_per_class = 50;
};

/// INI file with [model], [data], [train] and [sweep] sections. Unknown
/// sections or keys and unparsable values raise ConfigError.
ConfigFile load_config(const std::string& path);
ConfigFile parse_config(const std::string& text);

/// Sets the experiment and model seed.
void apply_seed(ExperimentConfig& config, std::uint64_t seed);

/// Fills a missing NoEntanglement placement seed or Random ordering seed from
/// the experiment seed, and drops those seeds when the kind does not use them.
void resolve_component_seeds(ExperimentConfig& config);

}  // namespace qpqc
