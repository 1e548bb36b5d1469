#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "qpqc/config.hpp"
#include "qpqc/dataset.hpp"
#include "qpqc/metrics.hpp"
#include "qpqc/model.hpp"

namespace qpqc {

struct MetricsRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double train_acc = 0.0;
  double val_loss = 0.0;
  double val_acc = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double wall_seconds = 0.0;
};

struct EvalResult {
  double loss = 0.0;
  ClassificationMetrics metrics;
  std::vector<int> predictions;
};

EvalResult evaluate(const Model& model, const std::vector<Sample>& samples, int workers = 0);

struct TrainResult {
  std::vector<MetricsRecord> history;
  int best_epoch = 0;  // lowest val_loss
  double best_val_loss = 0.0;
  double best_val_acc = 0.0;  // val_acc at best_epoch, i.e. of the checkpointed model
  double max_val_acc = 0.0;
  std::vector<double> best_params;
  std::size_t param_count = 0;
  std::size_t quantum_param_count = 0;
  double wall_seconds = 0.0;
};

/// Adam on minibatch-averaged gradients, early stopping on val_loss. Writes
/// the metrics CSV and the best checkpoint when their paths are set.
TrainResult train(const ExperimentConfig& config, const Dataset& data, std::ostream* progress = nullptr);
/// Loads config.dataset_path first.
TrainResult train(const ExperimentConfig& config, std::ostream* progress = nullptr);

Dataset load_experiment_data(const ExperimentConfig& config);

std::string metrics_csv_header();
std::string metrics_csv_row(const MetricsRecord& r);

/// Runs every grid point not yet present in `grid.out_dir`/summary.csv and
/// appends one row each; failing runs are recorded with status=error.
/// Returns the summary path.
std::string run_sweep(const ExperimentConfig& base, const SweepGrid& grid, std::ostream* progress = nullptr);
std::vector<ExperimentConfig> expand_grid(const ExperimentConfig& base, const SweepGrid& grid);
std::string run_key(const ExperimentConfig& config);
std::string summary_csv_header();

}  // namespace qpqc
