#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "qpqc/config.hpp"
#include "qpqc/dataset.hpp"
#include "qpqc/error.hpp"
#include "qpqc/expressibility.hpp"
#include "qpqc/linalg.hpp"
#include "qpqc/parallel.hpp"
#include "qpqc/trainer.hpp"

using namespace qpqc;

namespace {

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  int workers = 0;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool needs_config) {
  auto* opt = cmd->add_option("--config", f.config, "INI configuration file");
  if (needs_config) opt->required();
  cmd->add_option("--seed", f.seed, "Seed overriding the configuration");
  cmd->add_option("--out", f.out, "Output path");
  cmd->add_option("--workers", f.workers, "Worker threads (default: QPQC_WORKERS or hardware concurrency)")
      ->check(CLI::NonNegativeNumber);
}

ConfigFile read_config(const CommonFlags& f) {
  ConfigFile cfg = f.config.empty() ? ConfigFile{} : load_config(f.config);
  if (f.seed) apply_seed(cfg.experiment, *f.seed);
  if (f.workers > 0) cfg.experiment.workers = f.workers;
  resolve_component_seeds(cfg.experiment);
  return cfg;
}

std::ostream& open_out(const std::string& path, std::ofstream& file) {
  if (path.empty()) return std::cout;
  file.open(path);
  if (!file) throw IngestionError("cannot write " + path);
  return file;
}

int cmd_synth(const CommonFlags& f, int classes, int per_class) {
  auto cfg = read_config(f);
  auto& e = cfg.experiment;
  if (classes > 0) e.model.class_count = classes;
  if (per_class > 0) cfg.synth_per_class = per_class;
  const std::string dir = !f.out.empty() ? f.out : e.dataset_path;
  if (dir.empty()) throw ConfigError("synth-data needs --out or [data] path");
  const auto manifest = synth_dataset(dir, e.model.image_shape, e.model.class_count, cfg.synth_per_class, e.seed);
  const auto data = load_dataset(dir, e.model.image_shape, e.model.class_count, e.seed, e.split_fraction);
  const double probe = linear_probe_accuracy(data, e.model.class_count);
  std::printf("wrote %s (%zu samples), linear probe accuracy %.3f\n", manifest.c_str(),
              data.train.size() + data.val.size(), probe);
  if (probe < 0.8) {
    std::fprintf(stderr, "linear probe below 0.8\n");
    return 3;
  }
  return 0;
}

int cmd_train(const CommonFlags& f) {
  auto cfg = read_config(f);
  auto& e = cfg.experiment;
  if (!f.out.empty()) {
    e.metrics_out_path = f.out;
    if (e.checkpoint_path.empty()) e.checkpoint_path = f.out + ".ckpt";
  }
  const auto r = train(e, &std::cerr);
  std::printf("params %zu (quantum %zu), best epoch %d, val_loss %.6f, val_acc %.4f, %.1f s\n", r.param_count,
              r.quantum_param_count, r.best_epoch, r.best_val_loss, r.best_val_acc, r.wall_seconds);
  return 0;
}

int cmd_sweep(const CommonFlags& f) {
  auto cfg = read_config(f);
  if (!f.out.empty()) cfg.sweep.out_dir = f.out;
  const auto summary = run_sweep(cfg.experiment, cfg.sweep, &std::cerr);
  std::printf("summary: %s\n", summary.c_str());
  return 0;
}

int cmd_eval(const CommonFlags& f, const std::string& checkpoint) {
  auto cfg = read_config(f);
  auto& e = cfg.experiment;
  e.validate();
  Model model(e.model);
  model.load(checkpoint.empty() ? e.checkpoint_path : checkpoint);
  const auto data = load_experiment_data(e);
  const auto r = evaluate(model, data.val, e.workers);
  nlohmann::json j;
  j["samples"] = data.val.size();
  j["loss"] = r.loss;
  j["accuracy"] = r.metrics.accuracy;
  j["precision"] = r.metrics.precision;
  j["recall"] = r.metrics.recall;
  j["f1"] = r.metrics.f1;
  j["confusion"] = r.metrics.confusion;
  std::ofstream file;
  open_out(f.out, file) << j.dump(2) << '\n';
  return 0;
}

int cmd_verify_appendix_a(const CommonFlags& f, int trials) {
  const std::uint64_t seed = f.seed.value_or(7);
  std::ofstream file;
  auto& os = open_out(f.out, file);
  os << "n_qubits,position,trials,max_off_group,max_kernel_error,pass\n";
  bool all = true;
  for (int n = 3; n <= 8; ++n) {
    for (int p = 0; p <= n - 2; ++p) {
      const auto r = verify_kernel_locality(p, n, trials, derive_seed(seed, static_cast<std::uint64_t>(n * 16 + p)));
      char line[160];
      std::snprintf(line, sizeof line, "%d,%d,%d,%.3e,%.3e,%s\n", n, p, r.trials, r.max_off_group,
                    r.max_kernel_error, r.pass ? "true" : "false");
      os << line;
      all = all && r.pass;
    }
  }
  std::fprintf(stderr, "%s\n", all ? "all positions local" : "locality violated");
  return all ? 0 : 3;
}

int cmd_expressibility(const CommonFlags& f, std::size_t pairs, const std::vector<int>& qubits,
                       const std::vector<std::string>& variants) {
  const std::uint64_t seed = f.seed.value_or(2024);
  std::ofstream file;
  auto& os = open_out(f.out, file);
  os << "variant,n_qubits,t,mean,std_error,ratio\n";
  for (int n : qubits) {
    for (std::size_t v = 0; v < variants.size(); ++v) {
      const bool haar = normalize_name(variants[v]) == "haar";
      std::vector<double> overlaps;
      std::string name = "Haar";
      const auto stream = derive_seed(seed, static_cast<std::uint64_t>(n) * 64 + v);
      if (haar) {
        overlaps = sample_haar_overlaps(n, pairs, stream, f.workers);
      } else {
        EncodingSpec spec;
        spec.kind = parse_encoding(variants[v]);
        name = to_string(spec.kind);
        overlaps = sample_overlaps(spec, n, pairs, stream, {}, f.workers);
      }
      for (int t : {1, 2}) {
        const auto e = summarize_overlaps(overlaps, t, std::uint64_t{1} << n);
        char line[200];
        std::snprintf(line, sizeof line, "%s,%d,%d,%.10g,%.10g,%.10g\n", name.c_str(), n, t, e.mean, e.std_error,
                      e.ratio);
        os << line;
      }
    }
  }
  return 0;
}

void print_count(const ModelConfig& m) {
  const Model model(m);
  std::printf("%-18s %-10s %-20s %-10s %-9s %8zu %8zu\n", to_string(m.arch).c_str(),
              to_string(m.encoding.kind).c_str(), to_string(m.ansatz.kind).c_str(), to_string(m.measurement).c_str(),
              to_string(m.ansatz.qcnn_fc_depth).c_str(), model.param_count(), model.quantum_param_count());
}

int cmd_param_count(const CommonFlags& f) {
  std::printf("%-18s %-10s %-20s %-10s %-9s %8s %8s\n", "arch", "encoding", "ansatz", "measure", "fc_depth", "params",
              "quantum");
  if (!f.config.empty()) {
    print_count(read_config(f).experiment.model);
    return 0;
  }
  ModelConfig base;
  base.seed = f.seed.value_or(0);
  auto hybrid = base;
  hybrid.encoding.kind = EncodingKind::Amplitude;
  hybrid.ansatz.kind = AnsatzKind::NoEntanglement;
  hybrid.ansatz.seed = base.seed;
  for (auto arch : {Arch::HQNNParallel, Arch::ClassicalParallel}) {
    hybrid.arch = arch;
    print_count(hybrid);
  }
  auto quanv = base;
  quanv.encoding.kind = EncodingKind::AngleX;
  quanv.ansatz.kind = AnsatzKind::FullEntanglement;
  for (auto arch : {Arch::HQNNQuanv, Arch::ClassicalQuanv}) {
    quanv.arch = arch;
    print_count(quanv);
  }
  for (auto depth : {FcDepth::Shallow, FcDepth::Deep}) {
    auto q = base;
    q.encoding.kind = EncodingKind::Amplitude;
    q.ansatz.qcnn_fc_depth = depth;
    q.arch = Arch::QCNN;
    q.ansatz.kind = AnsatzKind::QCNN;
    q.ansatz.layers = 3;
    q.class_count = 4;
    print_count(q);
    q.ansatz.kind = AnsatzKind::SimplifiedTwoDesign;
    q.ansatz.layers = 1;
    q.measurement = MeasurementKind::Paulis;
    q.class_count = 10;
    for (auto arch : {Arch::SEQNN_TwoKernel, Arch::SEQNN_FC}) {
      q.arch = arch;
      print_count(q);
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum circuit classifier benchmark"};
  app.require_subcommand(1);
  CommonFlags flags;

  auto* synth = app.add_subcommand("synth-data", "Generate the procedural texture dataset");
  add_common(synth, flags, false);
  int classes = 0, per_class = 0;
  synth->add_option("--classes", classes, "Class count (default from config)");
  synth->add_option("--per-class", per_class, "Samples per class (default from config)");

  auto* train_cmd = app.add_subcommand("train", "Train one configuration");
  add_common(train_cmd, flags, true);

  auto* sweep_cmd = app.add_subcommand("sweep", "Train every point of the configured grid");
  add_common(sweep_cmd, flags, true);

  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on the validation split");
  add_common(eval_cmd, flags, true);
  std::string checkpoint;
  eval_cmd->add_option("--checkpoint", checkpoint, "Checkpoint file (default from config)");

  auto* verify = app.add_subcommand("verify-appendix-a", "Check two-qubit kernel locality for n = 3..8");
  add_common(verify, flags, false);
  int trials = 10;
  verify->add_option("--trials", trials, "Random unitaries per position")->check(CLI::PositiveNumber);

  auto* expr = app.add_subcommand("expressibility", "Frame-potential estimates of encoding circuits");
  add_common(expr, flags, false);
  std::size_t pairs = 5000;
  std::vector<int> qubits{4, 8};
  std::vector<std::string> variants{"QAOA_X", "QAOA_Y", "QAOA_Z", "Haar"};
  expr->add_option("--pairs", pairs, "State pairs per estimate")->check(CLI::Range(100, 100000000));
  expr->add_option("--qubits", qubits, "Register sizes")->delimiter(',')->check(CLI::Range(1, 12));
  expr->add_option("--variants", variants, "Encodings to estimate, or Haar")->delimiter(',');

  auto* pcount = app.add_subcommand("param-count", "Trainable parameter counts");
  add_common(pcount, flags, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*synth) return cmd_synth(flags, classes, per_class);
    if (*train_cmd) return cmd_train(flags);
    if (*sweep_cmd) return cmd_sweep(flags);
    if (*eval_cmd) return cmd_eval(flags, checkpoint);
    if (*verify) return cmd_verify_appendix_a(flags, trials);
    if (*expr) return cmd_expressibility(flags, pairs, qubits, variants);
    if (*pcount) return cmd_param_count(flags);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 0;
}
