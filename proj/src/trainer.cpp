#include "qpqc/trainer.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>
#include <set>

#include "qpqc/error.hpp"
#include "qpqc/optim.hpp"
#include "qpqc/parallel.hpp"

namespace qpqc {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void ensure_parent(const std::string& path) {
  const auto parent = fs::path(path).parent_path();
  if (parent.empty()) return;
  std::error_code ec;
  fs::create_directories(parent, ec);
  if (ec) throw IngestionError("cannot create " + parent.string() + ": " + ec.message());
}

std::string csv_safe(std::string s) {
  for (auto& ch : s) {
    if (ch == ',' || ch == '\n' || ch == '\r') ch = ';';
  }
  return s;
}

}  // namespace

EvalResult evaluate(const Model& model, const std::vector<Sample>& samples, int workers) {
  std::vector<double> losses(samples.size());
  EvalResult out;
  out.predictions.resize(samples.size());
  parallel_for(samples.size(), workers, [&](std::size_t i) {
    const auto r = model.loss_and_grad(samples[i].image, samples[i].label);
    losses[i] = r.loss;
    out.predictions[i] = predict(r.scores);
  });
  std::vector<int> labels(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) labels[i] = samples[i].label;
  out.loss = samples.empty() ? 0.0 : std::accumulate(losses.begin(), losses.end(), 0.0) / samples.size();
  out.metrics = compute_metrics(labels, out.predictions, model.config().class_count);
  return out;
}

std::string metrics_csv_header() {
  return "epoch,train_loss,train_acc,val_loss,val_acc,precision,recall,f1,wall_seconds";
}

std::string metrics_csv_row(const MetricsRecord& r) {
  return std::to_string(r.epoch) + "," + num(r.train_loss) + "," + num(r.train_acc) + "," + num(r.val_loss) + "," +
         num(r.val_acc) + "," + num(r.precision) + "," + num(r.recall) + "," + num(r.f1) + "," + num(r.wall_seconds);
}

Dataset load_experiment_data(const ExperimentConfig& config) {
  if (config.dataset_path.empty()) throw ConfigError("no dataset path configured");
  return load_dataset(config.dataset_path, config.model.image_shape, config.model.class_count, config.seed,
                      config.split_fraction);
}

TrainResult train(const ExperimentConfig& config_in, std::ostream* progress) {
  ExperimentConfig config = config_in;
  resolve_component_seeds(config);
  config.validate();
  return train(config, load_experiment_data(config), progress);
}

TrainResult train(const ExperimentConfig& config_in, const Dataset& data, std::ostream* progress) {
  ExperimentConfig config = config_in;
  resolve_component_seeds(config);
  config.validate();
  if (data.train.empty() || data.val.empty()) throw ShapeError("training needs non-empty train and val sets");
  const auto start = Clock::now();

  Model model(config.model);
  TrainResult result;
  result.param_count = model.param_count();
  result.quantum_param_count = model.quantum_param_count();
  result.best_val_loss = std::numeric_limits<double>::infinity();

  std::ofstream csv;
  if (!config.metrics_out_path.empty()) {
    ensure_parent(config.metrics_out_path);
    csv.open(config.metrics_out_path, std::ios::trunc);
    if (!csv) throw IngestionError("cannot write " + config.metrics_out_path);
    csv << metrics_csv_header() << '\n';
  }
  if (!config.checkpoint_path.empty()) ensure_parent(config.checkpoint_path);

  AdamConfig adam;
  adam.learning_rate = config.learning_rate;
  AdamState state;
  const std::size_t n = data.train.size();
  const auto batch = static_cast<std::size_t>(config.effective_batch_size());
  std::vector<std::size_t> order(n);
  std::vector<Model::SampleResult> slots(batch);
  std::vector<double> grad(model.param_count());
  int since_best = 0;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle_rng(derive_seed(config.seed, 0x5EED0000ULL + static_cast<std::uint64_t>(epoch)));
    shuffle_rng.shuffle(std::span<std::size_t>(order));

    double loss_sum = 0.0;
    long correct = 0;
    for (std::size_t b0 = 0; b0 < n; b0 += batch) {
      const std::size_t count = std::min(batch, n - b0);
      parallel_for(count, config.workers, [&](std::size_t i) {
        const auto& s = data.train[order[b0 + i]];
        slots[i] = model.loss_and_grad(s.image, s.label);
      });
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t i = 0; i < count; ++i) {
        loss_sum += slots[i].loss;
        correct += predict(slots[i].scores) == data.train[order[b0 + i]].label;
        for (std::size_t k = 0; k < grad.size(); ++k) grad[k] += slots[i].grad[k];
      }
      for (auto& g : grad) g /= static_cast<double>(count);
      adam_step(model.params().values(), grad, state, adam);
    }

    const auto val = evaluate(model, data.val, config.workers);
    MetricsRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(n);
    rec.train_acc = static_cast<double>(correct) / static_cast<double>(n);
    rec.val_loss = val.loss;
    rec.val_acc = val.metrics.accuracy;
    rec.precision = val.metrics.precision;
    rec.recall = val.metrics.recall;
    rec.f1 = val.metrics.f1;
    rec.wall_seconds = seconds_since(start);
    result.history.push_back(rec);
    result.max_val_acc = std::max(result.max_val_acc, rec.val_acc);
    if (csv.is_open()) {
      csv << metrics_csv_row(rec) << '\n';
      csv.flush();
    }
    if (progress) {
      *progress << "epoch " << epoch << " train_loss " << num(rec.train_loss) << " train_acc " << num(rec.train_acc)
                << " val_loss " << num(rec.val_loss) << " val_acc " << num(rec.val_acc) << '\n';
    }

    if (rec.val_loss < result.best_val_loss) {
      result.best_val_loss = rec.val_loss;
      result.best_val_acc = rec.val_acc;
      result.best_epoch = epoch;
      result.best_params = model.params().values();
      if (!config.checkpoint_path.empty()) model.save(config.checkpoint_path);
      since_best = 0;
    } else if (++since_best >= config.patience) {
      break;
    }
  }
  result.wall_seconds = seconds_since(start);
  return result;
}

std::vector<ExperimentConfig> expand_grid(const ExperimentConfig& base, const SweepGrid& grid) {
  auto axis = [](const auto& values, auto fallback) {
    using T = std::decay_t<decltype(fallback)>;
    return values.empty() ? std::vector<T>{fallback} : std::vector<T>(values.begin(), values.end());
  };
  std::vector<ExperimentConfig> out;
  for (auto arch : axis(grid.archs, base.model.arch)) {
    for (auto enc : axis(grid.encodings, base.model.encoding.kind)) {
      for (auto ans : axis(grid.ansaetze, base.model.ansatz.kind)) {
        for (auto meas : axis(grid.measurements, base.model.measurement)) {
          for (auto ord : axis(grid.orderings, base.model.encoding.ordering)) {
            for (auto seed : axis(grid.seeds, base.seed)) {
              ExperimentConfig c = base;
              c.model.arch = arch;
              c.model.encoding.kind = enc;
              c.model.ansatz.kind = ans;
              c.model.measurement = meas;
              c.model.encoding.ordering = ord;
              if (seed != base.seed) {
                c.model.ansatz.seed.reset();
                c.model.encoding.ordering_seed.reset();
              }
              apply_seed(c, seed);
              resolve_component_seeds(c);
              out.push_back(std::move(c));
            }
          }
        }
      }
    }
  }
  return out;
}

std::string run_key(const ExperimentConfig& c) {
  return to_string(c.model.arch) + "-" + to_string(c.model.encoding.kind) + "-" + to_string(c.model.ansatz.kind) + "-" +
         to_string(c.model.measurement) + "-" + to_string(c.model.encoding.ordering) + "-s" + std::to_string(c.seed);
}

std::string summary_csv_header() {
  return "key,arch,encoding,ansatz,measurement,ordering,seed,status,best_epoch,best_val_loss,val_acc,max_val_acc,"
         "params,quantum_params,wall_seconds,message";
}

std::string run_sweep(const ExperimentConfig& base, const SweepGrid& grid, std::ostream* progress) {
  const auto runs = expand_grid(base, grid);
  if (runs.empty()) throw ConfigError("empty sweep grid");
  const fs::path dir(grid.out_dir);
  std::error_code ec;
  fs::create_directories(dir / "runs", ec);
  if (ec) throw IngestionError("cannot create " + (dir / "runs").string() + ": " + ec.message());
  const fs::path summary = dir / "summary.csv";

  std::set<std::string> done;
  bool have_header = false;
  if (std::ifstream in(summary); in) {
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      if (!have_header) {
        have_header = true;
        continue;
      }
      done.insert(line.substr(0, line.find(',')));
    }
  }
  std::ofstream out(summary, std::ios::app);
  if (!out) throw IngestionError("cannot write " + summary.string());
  if (!have_header) out << summary_csv_header() << '\n';

  for (const auto& run : runs) {
    const auto key = run_key(run);
    if (done.contains(key)) continue;
    ExperimentConfig c = run;
    c.metrics_out_path = (dir / "runs" / (key + ".csv")).string();
    c.checkpoint_path = (dir / "runs" / (key + ".ckpt")).string();
    std::string prefix = key + "," + to_string(c.model.arch) + "," + to_string(c.model.encoding.kind) + "," +
                         to_string(c.model.ansatz.kind) + "," + to_string(c.model.measurement) + "," +
                         to_string(c.model.encoding.ordering) + "," + std::to_string(c.seed) + ",";
    const auto start = Clock::now();
    try {
      const auto r = train(c);
      out << prefix << "ok," << r.best_epoch << "," << num(r.best_val_loss) << "," << num(r.best_val_acc) << ","
          << num(r.max_val_acc) << "," << r.param_count << "," << r.quantum_param_count << "," << num(r.wall_seconds)
          << ",\n";
      if (progress) *progress << key << " ok val_acc " << num(r.best_val_acc) << '\n';
    } catch (const std::exception& e) {
      out << prefix << "error,,,,,,," << num(seconds_since(start)) << "," << csv_safe(e.what()) << '\n';
      if (progress) *progress << key << " error: " << e.what() << '\n';
    }
    out.flush();
    done.insert(key);
  }
  return summary.string();
}

}  // namespace qpqc
