#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "qpqc/config.hpp"
#include "qpqc/dataset.hpp"
#include "qpqc/error.hpp"
#include "qpqc/metrics.hpp"
#include "qpqc/trainer.hpp"

using namespace qpqc;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("qpqc_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::string strip_last_column(const std::string& csv) {
  std::stringstream in(csv), out;
  std::string line;
  while (std::getline(in, line)) out << line.substr(0, line.rfind(',')) << '\n';
  return out.str();
}

ExperimentConfig tiny_experiment(const std::string& data_dir) {
  ExperimentConfig c;
  c.dataset_path = data_dir;
  c.model.arch = Arch::HQNNParallel;
  c.model.encoding.kind = EncodingKind::AngleX;
  c.model.ansatz.kind = AnsatzKind::Ring;
  c.model.image_shape = {8, 8, 3};
  c.model.qubits_per_circuit = 4;
  c.model.class_count = 3;
  c.epochs = 4;
  c.patience = 2;
  c.batch_size = 8;
  apply_seed(c, 3);
  return c;
}

}  // namespace

TEST_CASE("metrics from a confusion matrix") {
  const std::vector<int> y{0, 0, 1, 1, 2, 2, 2, 0};
  const std::vector<int> p{0, 1, 1, 1, 2, 0, 2, 0};
  const auto m = compute_metrics(y, p, 3);
  CHECK(m.accuracy == doctest::Approx(6.0 / 8));
  // class 0: tp 2, predicted 3, actual 3; class 1: tp 2, predicted 3, actual 2; class 2: tp 2, predicted 2, actual 3
  CHECK(m.precision == doctest::Approx((2.0 / 3 + 2.0 / 3 + 1.0) / 3));
  CHECK(m.recall == doctest::Approx((2.0 / 3 + 1.0 + 2.0 / 3) / 3));
  const double f0 = 2.0 / 3, f1 = 2 * (2.0 / 3) / (2.0 / 3 + 1), f2 = 2 * (2.0 / 3) / (2.0 / 3 + 1);
  CHECK(m.f1 == doctest::Approx((f0 + f1 + f2) / 3));
  CHECK(m.confusion[2][0] == 1);

  Rng rng(4);
  for (int t = 0; t < 50; ++t) {
    std::vector<int> a(40), b(40);
    long streaming = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      a[i] = static_cast<int>(rng.below(5));
      b[i] = static_cast<int>(rng.below(5));
      streaming += a[i] == b[i];
    }
    const auto r = compute_metrics(a, b, 5);
    CHECK(std::abs(r.accuracy - static_cast<double>(streaming) / 40) <= 1e-12);
    CHECK(r.f1 >= 0.0);
    CHECK(r.f1 <= 1.0);
  }
}

TEST_CASE("QIMG round trip and corruption") {
  const auto dir = scratch("qimg");
  fs::create_directories(dir);
  Tensor t({3, 2, 4});
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = 0.125 * static_cast<double>(i % 8);
  write_qimg((dir / "a.qimg").string(), t);
  CHECK(fs::file_size(dir / "a.qimg") == 16 + 4 * 24);
  CHECK(read_qimg((dir / "a.qimg").string(), {2, 4, 3}).data == t.data);
  CHECK_THROWS_AS(read_qimg((dir / "a.qimg").string(), {4, 2, 3}), IngestionError);

  auto bytes = slurp(dir / "a.qimg");
  std::ofstream((dir / "short.qimg"), std::ios::binary) << bytes.substr(0, bytes.size() - 3);
  bytes[0] = 'X';
  std::ofstream((dir / "magic.qimg"), std::ios::binary) << bytes;
  try {
    read_qimg((dir / "short.qimg").string(), {2, 4, 3});
    FAIL("expected an ingestion error");
  } catch (const IngestionError& e) {
    CHECK(std::string(e.what()).find("short.qimg") != std::string::npos);
  }
  CHECK_THROWS_AS(read_qimg((dir / "magic.qimg").string(), {2, 4, 3}), IngestionError);
  fs::remove_all(dir);
}

TEST_CASE("synthetic dataset, split and ingestion errors") {
  const auto dir = scratch("synth");
  synth_dataset(dir.string(), {16, 16, 3}, 10, 50, 1);
  const auto first = slurp(dir / "img_00123.qimg");
  const auto manifest = slurp(dir / "manifest.csv");
  synth_dataset(dir.string(), {16, 16, 3}, 10, 50, 1);
  CHECK(slurp(dir / "img_00123.qimg") == first);
  CHECK(slurp(dir / "manifest.csv") == manifest);

  const auto d = load_dataset(dir.string(), {16, 16, 3}, 10, 9);
  CHECK(d.train.size() == 400);
  CHECK(d.val.size() == 100);
  std::vector<int> per_class(10, 0);
  for (const auto& s : d.val) ++per_class[static_cast<std::size_t>(s.label)];
  for (int c : per_class) CHECK(c == 10);
  for (const auto& s : d.train) {
    for (double v : s.image.data) {
      REQUIRE(v >= 0.0);
      REQUIRE(v <= 1.0);
    }
  }
  const auto again = load_dataset(dir.string(), {16, 16, 3}, 10, 9);
  for (std::size_t i = 0; i < d.val.size(); ++i) CHECK(again.val[i].file == d.val[i].file);
  const auto other = load_dataset(dir.string(), {16, 16, 3}, 10, 10);
  bool differs = false;
  for (std::size_t i = 0; i < d.val.size(); ++i) differs |= other.val[i].file != d.val[i].file;
  CHECK(differs);

  CHECK(linear_probe_accuracy(d, 10) >= 0.8);

  CHECK_THROWS_AS(load_dataset(dir.string(), {16, 16, 3}, 11, 9), IngestionError);
  std::ofstream(dir / "manifest.csv", std::ios::app) << "img_00000.qimg,10\n";
  CHECK_THROWS_AS(load_dataset(dir.string(), {16, 16, 3}, 10, 9), IngestionError);
  CHECK_THROWS_AS(load_dataset((dir / "missing").string(), {16, 16, 3}, 10, 9), IngestionError);
  fs::remove_all(dir);
}

TEST_CASE("8-bit datasets are rescaled") {
  const auto dir = scratch("bytes");
  fs::create_directories(dir);
  std::ofstream man(dir / "manifest.csv");
  for (int i = 0; i < 4; ++i) {
    Tensor t({1, 2, 2}, std::vector<double>(4, 51.0 * i));
    write_qimg((dir / ("b" + std::to_string(i) + ".qimg")).string(), t);
    man << "b" << i << ".qimg," << i % 2 << '\n';
  }
  man.close();
  const auto d = load_dataset(dir.string(), {2, 2, 1}, 2, 1, 0.5);
  double top = 0;
  for (const auto& s : d.train) top = std::max(top, s.image[0]);
  for (const auto& s : d.val) top = std::max(top, s.image[0]);
  CHECK(top == doctest::Approx(153.0 / 255));
  fs::remove_all(dir);
}

TEST_CASE("INI configuration") {
  const auto cfg = parse_config(
      "[model]\narch = QCNN\nencoding = Amplitude\nordering = random\nansatz = QCNN\nansatz_layers = 3\n"
      "fc_depth = deep\nmeasurement = PauliZ\nclasses = 4\n"
      "[data]\npath = data/synth4\n[train]\nseed = 12\nepochs = 20\npatience = 5\n"
      "[sweep]\nencodings = AngleX, AngleZ\nseeds = 1,2,3\n");
  CHECK(cfg.experiment.model.arch == Arch::QCNN);
  CHECK(cfg.experiment.model.encoding.ordering == OrderingKind::Random);
  CHECK(cfg.experiment.model.ansatz.qcnn_fc_depth == FcDepth::Deep);
  CHECK(cfg.experiment.seed == 12);
  CHECK(cfg.experiment.model.seed == 12);
  CHECK(cfg.experiment.epochs == 20);
  CHECK(cfg.sweep.encodings.size() == 2);
  CHECK(cfg.sweep.seeds == std::vector<std::uint64_t>{1, 2, 3});
  auto e = cfg.experiment;
  resolve_component_seeds(e);
  CHECK(e.model.encoding.ordering_seed == 12u);
  CHECK_NOTHROW(e.validate());

  CHECK_THROWS_AS(parse_config("[model]\narhc = QCNN\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[modle]\narch = QCNN\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[train]\nepochs = ten\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[model]\nencoding = AngleW\n"), ConfigError);
  auto bad = parse_config("[train]\nepochs = 5\npatience = 6\n").experiment;
  resolve_component_seeds(bad);
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("grid arithmetic") {
  ExperimentConfig base;
  SweepGrid grid;
  grid.encodings = {EncodingKind::AngleX, EncodingKind::Amplitude, EncodingKind::IQP,
                    EncodingKind::QAOA_X, EncodingKind::Ring, EncodingKind::Waterfall};
  grid.ansaetze = {AnsatzKind::NoEntanglement, AnsatzKind::FullEntanglement, AnsatzKind::Ring, AnsatzKind::NQ};
  grid.measurements = {MeasurementKind::PauliX, MeasurementKind::PauliY, MeasurementKind::PauliZ};
  const auto runs = expand_grid(base, grid);
  CHECK(runs.size() == 72);
  std::set<std::string> keys;
  for (const auto& r : runs) keys.insert(run_key(r));
  CHECK(keys.size() == 72);
}

TEST_CASE("training is deterministic and stops early") {
  const auto dir = scratch("train");
  synth_dataset((dir / "data").string(), {8, 8, 3}, 3, 8, 2);
  auto c = tiny_experiment((dir / "data").string());
  c.metrics_out_path = (dir / "a.csv").string();
  c.checkpoint_path = (dir / "a.ckpt").string();
  const auto a = train(c);
  c.metrics_out_path = (dir / "b.csv").string();
  const auto b = train(c);
  CHECK(strip_last_column(slurp(dir / "a.csv")) == strip_last_column(slurp(dir / "b.csv")));
  CHECK(a.best_params == b.best_params);
  CHECK(static_cast<int>(a.history.size()) <= a.best_epoch + c.patience);

  Model m(c.model);
  m.load(c.checkpoint_path);
  CHECK(m.params().values() == a.best_params);
  fs::remove_all(dir);
}

TEST_CASE("classical twin learns the synthetic textures") {
  const auto dir = scratch("twin");
  synth_dataset((dir / "data").string(), {8, 8, 3}, 4, 20, 5);
  auto c = tiny_experiment((dir / "data").string());
  c.model.arch = Arch::ClassicalParallel;
  c.model.class_count = 4;
  c.epochs = 10;
  c.patience = 10;
  const auto r = train(c);
  CHECK(r.history.back().train_acc > r.history.front().train_acc);
  fs::remove_all(dir);
}

TEST_CASE("sweep rows, error rows and resumption") {
  const auto dir = scratch("sweep");
  synth_dataset((dir / "data").string(), {8, 8, 3}, 3, 6, 2);
  auto base = tiny_experiment((dir / "data").string());
  base.epochs = 2;
  base.patience = 1;
  SweepGrid grid;
  grid.encodings = {EncodingKind::AngleX, EncodingKind::AngleZ};
  grid.measurements = {MeasurementKind::PauliZ, MeasurementKind::Histogram};
  grid.out_dir = (dir / "out").string();
  const auto path = run_sweep(base, grid);
  const auto text = slurp(path);
  std::stringstream ss(text);
  std::string line;
  int rows = 0, errors = 0;
  std::getline(ss, line);
  CHECK(line == summary_csv_header());
  while (std::getline(ss, line)) {
    ++rows;
    errors += line.find(",error,") != std::string::npos;
  }
  CHECK(rows == 4);
  CHECK(errors == 2);  // Histogram is not a hybrid head
  CHECK(fs::exists(dir / "out" / "runs" / (run_key(expand_grid(base, grid)[0]) + ".csv")));
  run_sweep(base, grid);
  CHECK(slurp(path) == text);
  fs::remove_all(dir);
}
