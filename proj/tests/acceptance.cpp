// Acceptance gate: one PASS/FAIL line per criterion, non-zero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "oracle.hpp"
#include "qpqc/dataset.hpp"
#include "qpqc/encodings.hpp"
#include "qpqc/error.hpp"
#include "qpqc/expressibility.hpp"
#include "qpqc/model.hpp"
#include "qpqc/trainer.hpp"

using namespace qpqc;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double rel_err(double a, double b, double floor) { return std::abs(a - b) / std::max(std::abs(b), floor); }

std::vector<double> uniform(std::size_t k, Rng& rng, double lo, double hi) {
  std::vector<double> v(k);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return v;
}

constexpr EncodingKind kAllEncodings[] = {EncodingKind::AngleX,    EncodingKind::AngleY, EncodingKind::AngleZ,
                                          EncodingKind::Amplitude, EncodingKind::IQP,    EncodingKind::QAOA_X,
                                          EncodingKind::QAOA_Y,    EncodingKind::QAOA_Z, EncodingKind::Ring,
                                          EncodingKind::Waterfall};
constexpr AnsatzKind kAllAnsaetze[] = {AnsatzKind::NoEntanglement, AnsatzKind::FullEntanglement, AnsatzKind::Ring,
                                       AnsatzKind::NQ,             AnsatzKind::SimplifiedTwoDesign, AnsatzKind::QCNN};

// Random circuit spec for acceptance sweeps; QCNN needs at least 4 qubits.
CircuitSpec random_spec(EncodingKind e, AnsatzKind a, MeasurementKind m, Rng& rng, int max_qubits) {
  CircuitSpec s;
  const int lo = a == AnsatzKind::QCNN ? 4 : (e == EncodingKind::Ring ? 2 : 1);
  s.n_qubits = lo + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_qubits - lo + 1)));
  s.encoding.kind = e;
  s.encoding.layers = 1 + static_cast<int>(rng.below(2));
  s.ansatz.kind = a;
  s.ansatz.layers = 1 + static_cast<int>(rng.below(2));
  if (a == AnsatzKind::QCNN && s.n_qubits < 5) s.ansatz.layers = 1;
  if (a == AnsatzKind::NoEntanglement) s.ansatz.seed = rng.next_u64();
  if (e == EncodingKind::Amplitude) s.ordering = Ordering::identity(s.n_qubits);
  std::vector<int> all(static_cast<std::size_t>(s.n_qubits));
  for (int q = 0; q < s.n_qubits; ++q) all[static_cast<std::size_t>(q)] = q;
  if (m == MeasurementKind::Histogram || m == MeasurementKind::Paulis) {
    s.measurement = classifier_measurement(m, 2, all, s.n_qubits, rng.next_u64());
  } else {
    s.measurement = all_qubit_measurement(m, s.n_qubits);
  }
  return s;
}

std::vector<double> random_features(const Circuit& c, Rng& rng) {
  return uniform(c.feature_count(), rng, is_amplitude(c.encoding().kind) ? 0.05 : 0.0, is_amplitude(c.encoding().kind) ? 1.0 : 3.1);
}

Outcome criterion_1() {
  double worst_off = 0.0, worst_kernel = 0.0;
  int positions = 0;
  bool pass = true;
  for (int n = 3; n <= 8; ++n) {
    for (int p = 0; p <= n - 2; ++p) {
      const auto r = verify_kernel_locality(p, n, 10, derive_seed(7, static_cast<std::uint64_t>(n * 16 + p)));
      pass = pass && r.pass && r.max_off_group < 1e-10 && r.trials == 10;
      worst_off = std::max(worst_off, r.max_off_group);
      worst_kernel = std::max(worst_kernel, r.max_kernel_error);
      ++positions;
    }
  }
  return {pass, fmt("%d positions x 10 unitaries, max off-group %.1e, max kernel error %.1e", positions, worst_off,
                    worst_kernel)};
}

Outcome criterion_2() {
  Rng rng(2);
  double worst = 0.0, worst_circuit = 0.0;
  int circuits = 0;
  for (int i = 0; i < 100; ++i) {
    const auto e = kAllEncodings[i % 10];
    const auto a = kAllAnsaetze[(i / 10 + i) % 6];
    const Circuit c(random_spec(e, a, MeasurementKind::PauliZ, rng, 5));
    const auto p = uniform(c.param_count(), rng, -3.1, 3.1);
    const auto x = random_features(c, rng);
    // dense reference: explicit initial state, Kronecker-product unitary of every gate
    oracle::Vec psi0 = oracle::Vec::Zero(std::int64_t{1} << c.n_qubits());
    if (is_amplitude(e)) {
      double norm = 0.0;
      for (double v : x) norm += v * v;
      for (std::size_t k = 0; k < x.size(); ++k) psi0(static_cast<std::int64_t>(k)) = x[k] / std::sqrt(norm);
    } else {
      psi0(0) = 1.0;
    }
    const Bindings b{p, x};
    const oracle::Vec want = oracle::sequence_unitary(c.gates(), b) * psi0;

    StateVector full = c.initial_state(x);
    run(full, c.gates(), b);
    const oracle::Vec got = oracle::to_vec(full);
    worst = std::max(worst, (got - want).cwiseAbs().maxCoeff());

    // Circuit::state skips phase-only gates on |0> qubits: equal after fixing one global phase
    const oracle::Vec st = oracle::to_vec(c.state(p, x));
    std::int64_t k = 0;
    want.cwiseAbs().maxCoeff(&k);
    const cplx phase = want(k) / st(k);
    worst_circuit = std::max(worst_circuit, (st * phase - want).cwiseAbs().maxCoeff());
    ++circuits;
  }
  const bool pass = circuits == 100 && worst < 1e-10 && worst_circuit < 1e-10;
  return {pass, fmt("%d circuits (10 encodings x 6 ansaetze, n<=5), max |amp - oracle| %.1e, "
                    "Circuit::state after global phase %.1e",
                    circuits, worst, worst_circuit)};
}

Outcome criterion_3() {
  Rng rng(3);
  const MeasurementKind heads[] = {MeasurementKind::PauliX, MeasurementKind::PauliY, MeasurementKind::PauliZ,
                                   MeasurementKind::Histogram, MeasurementKind::Paulis};
  double worst_fd = 0.0, worst_adj = 0.0;
  int circuits = 0;
  for (auto e : kAllEncodings) {
    for (auto a : kAllAnsaetze) {
      const auto m = heads[rng.below(5)];
      const Circuit c(random_spec(e, a, m, rng, 4));
      const auto p = uniform(c.param_count(), rng, -3.1, 3.1);
      auto x = random_features(c, rng);
      const auto w = uniform(c.output_size(), rng, -1, 1);
      auto weighted = [&](const std::vector<double>& pp, const std::vector<double>& xx) {
        const auto out = c.forward(pp, xx);
        double s = 0;
        for (std::size_t k = 0; k < out.size(); ++k) s += w[k] * out[k];
        return s;
      };
      const auto ps = c.grad_parameter_shift(p, x, w);
      const auto adj = c.grad_adjoint(p, x, w);
      const double h = 1e-5;
      auto pp = p;
      for (std::size_t i = 0; i < p.size(); ++i) {
        pp[i] = p[i] + h;
        const double up = weighted(pp, x);
        pp[i] = p[i] - h;
        const double down = weighted(pp, x);
        pp[i] = p[i];
        worst_fd = std::max(worst_fd, rel_err(ps.d_params[i], (up - down) / (2 * h), 1e-3));
        worst_adj = std::max(worst_adj, rel_err(adj.d_params[i], ps.d_params[i], 1e-3));
      }
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double keep = x[i];
        x[i] = keep + h;
        const double up = weighted(p, x);
        x[i] = keep - h;
        const double down = weighted(p, x);
        x[i] = keep;
        worst_fd = std::max(worst_fd, rel_err(ps.d_inputs[i], (up - down) / (2 * h), 1e-3));
        worst_adj = std::max(worst_adj, rel_err(adj.d_inputs[i], ps.d_inputs[i], 1e-3));
      }
      ++circuits;
    }
  }

  // end-to-end: 4x4 gray images, 2 circuits x 2 qubits
  double worst_e2e = 0.0;
  std::size_t checked = 0;
  for (auto e : {EncodingKind::AngleY, EncodingKind::IQP, EncodingKind::QAOA_X, EncodingKind::Waterfall}) {
    ModelConfig cfg;
    cfg.arch = Arch::HQNNParallel;
    cfg.encoding.kind = e;
    cfg.ansatz.kind = AnsatzKind::FullEntanglement;
    cfg.image_shape = {4, 4, 1};
    cfg.qubits_per_circuit = 2;
    cfg.class_count = 3;
    cfg.seed = 31;
    const Model model(cfg);
    Model probe(cfg);
    Tensor img({1, 4, 4});
    for (auto& v : img.data) v = rng.uniform();
    const auto r = model.loss_and_grad(img, 2);
    for (std::size_t i = 0; i < model.param_count(); ++i) {
      auto& v = probe.params().values()[i];
      const double keep = v;
      v = keep + 1e-5;
      const double up = probe.loss(img, 2);
      v = keep - 1e-5;
      const double down = probe.loss(img, 2);
      v = keep;
      worst_e2e = std::max(worst_e2e, rel_err(r.grad[i], (up - down) / 2e-5, 1e-3));
      ++checked;
    }
  }
  const bool pass = worst_fd < 1e-6 && worst_adj < 1e-8 && worst_e2e < 1e-4;
  return {pass, fmt("%d circuits: shift vs FD %.1e, adjoint vs shift %.1e; tiny HQNN-Parallel %zu params vs FD %.1e "
                    "(relative, floor 1e-3)",
                    circuits, worst_fd, worst_adj, checked, worst_e2e)};
}

Outcome criterion_4(const std::string& data10, const fs::path& work) {
  const auto data = load_dataset(data10, {16, 16, 3}, 10, 0);
  long nonzero = 0, checked = 0;
  for (auto a : {AnsatzKind::NoEntanglement, AnsatzKind::FullEntanglement, AnsatzKind::Ring, AnsatzKind::NQ}) {
    for (auto m : {MeasurementKind::PauliX, MeasurementKind::PauliY, MeasurementKind::PauliZ}) {
      ModelConfig cfg;
      cfg.arch = Arch::HQNNParallel;
      cfg.encoding.kind = EncodingKind::AngleZ;
      cfg.ansatz.kind = a;
      if (a == AnsatzKind::NoEntanglement) cfg.ansatz.seed = 1;
      cfg.measurement = m;
      const Model model(cfg);
      for (std::size_t i = 0; i < 5; ++i) {
        const auto r = model.loss_and_grad(data.train[i * 37].image, data.train[i * 37].label);
        for (double g : r.d_quantum_input) nonzero += g != 0.0;
        checked += static_cast<long>(r.d_quantum_input.size());
      }
    }
  }

  ExperimentConfig base;
  base.dataset_path = data10;
  base.model.arch = Arch::HQNNParallel;
  base.model.encoding.kind = EncodingKind::AngleZ;
  base.model.measurement = MeasurementKind::PauliZ;
  SweepGrid grid;
  grid.ansaetze = {AnsatzKind::NoEntanglement, AnsatzKind::FullEntanglement, AnsatzKind::Ring, AnsatzKind::NQ};
  grid.out_dir = (work / "anglez_sweep").string();
  fs::remove_all(grid.out_dir);
  const auto summary = run_sweep(base, grid);
  std::ifstream in(summary);
  std::string line;
  std::getline(in, line);
  int rows = 0;
  bool in_band = true;
  std::string accs;
  while (std::getline(in, line)) {
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() < 11 || f[7] != "ok") {
      in_band = false;
      continue;
    }
    const double acc = std::stod(f[10]);
    in_band = in_band && acc >= 0.0 && acc <= 0.2;
    accs += (accs.empty() ? "" : " ") + fmt("%.2f", acc);
    ++rows;
  }
  const bool pass = nonzero == 0 && checked > 0 && rows == 4 && in_band;
  return {pass, fmt("%ld/%ld quantum-input gradient entries non-zero; sweep val_acc [%s] (band [0, 0.2])", nonzero,
                    checked, accs.c_str())};
}

Outcome criterion_5() {
  int mismatches = 0, cases = 0;
  for (int n = 2; n <= 10; ++n) {
    for (int l = 1; l <= 4; ++l) {
      auto count = [&](EncodingKind k) {
        EncodingSpec s;
        s.kind = k;
        s.layers = l;
        return encode_template(s, n);
      };
      const auto N = static_cast<std::size_t>(n), L = static_cast<std::size_t>(l);
      mismatches += count(EncodingKind::Ring).two_qubit_count() != N * L;
      mismatches += count(EncodingKind::Waterfall).two_qubit_count() != L * N * (N - 1) / 2;
      mismatches += count(EncodingKind::IQP).count(GateKind::RZZ) != L * N * (N - 1) / 2;
      for (auto q : {EncodingKind::QAOA_X, EncodingKind::QAOA_Y, EncodingKind::QAOA_Z}) {
        mismatches += count(q).count(GateKind::RZZ) != L * N;
      }
      ++cases;
    }
  }
  return {mismatches == 0, fmt("%d (N, L) pairs x 6 encodings, %d mismatches", cases, mismatches)};
}

Outcome criterion_6() {
  EncodingSpec angle, amp;
  angle.kind = EncodingKind::AngleX;
  amp.kind = EncodingKind::Amplitude;
  AnsatzSpec ans;
  ans.kind = AnsatzKind::FullEntanglement;
  const QuantumLinearStage a(768, angle, ans, MeasurementKind::PauliZ, 8, 1);
  const QuantumLinearStage b(768, amp, ans, MeasurementKind::PauliZ, 8, 1);
  const QuanvolutionStage q({16, 16, 3}, 2, angle, ans, MeasurementKind::PauliZ);
  const auto qs = q.output_shape(std::vector<std::size_t>{3, 16, 16});
  Tensor img({3, 16, 16});
  Rng rng(6);
  for (auto& v : img.data) v = rng.uniform();
  std::vector<double> w(q.param_count());
  q.init(w, rng);
  StageCache cache;
  const auto out = q.forward(w, img, cache);
  const bool pass = a.circuit_count() == 96 && a.output_width() == 768 && b.circuit_count() == 3 &&
                    b.output_width() == 24 && qs == std::vector<std::size_t>{12, 15, 15} && out.shape == qs;
  return {pass, fmt("angle 768 -> %zu circuits, %zu outputs; amplitude 768 -> %zu circuits, %zu outputs; "
                    "quanvolution 16x16x3 qks=2 -> %s",
                    a.circuit_count(), a.output_width(), b.circuit_count(), b.output_width(),
                    shape_string(out.shape).c_str())};
}

Outcome criterion_7() {
  bool pass = true;
  std::string detail;
  for (int n : {4, 8}) {
    std::vector<double> ov[3];
    const EncodingKind kinds[3] = {EncodingKind::QAOA_X, EncodingKind::QAOA_Y, EncodingKind::QAOA_Z};
    for (int k = 0; k < 3; ++k) {
      EncodingSpec s;
      s.kind = kinds[k];
      ov[k] = sample_overlaps(s, n, 5000, derive_seed(2024, static_cast<std::uint64_t>(n * 8 + k)));
    }
    const auto haar = sample_haar_overlaps(n, 5000, derive_seed(2024, static_cast<std::uint64_t>(n * 8 + 7)));
    for (int t : {1, 2}) {
      const auto d = std::uint64_t{1} << n;
      const auto x = summarize_overlaps(ov[0], t, d), y = summarize_overlaps(ov[1], t, d),
                 z = summarize_overlaps(ov[2], t, d), h = summarize_overlaps(haar, t, d);
      const double gx = (z.mean - x.mean) / std::hypot(z.std_error, x.std_error);
      const double gy = (z.mean - y.mean) / std::hypot(z.std_error, y.std_error);
      const double hs = std::abs(h.mean - h.haar_ref) / h.std_error;
      pass = pass && gx > 2 && gy > 2 && hs <= 3;
      if (n == 4 && t == 1) pass = pass && z.ratio >= 9 && z.ratio <= 16;
      detail += fmt("%sn=%d t=%d X %.1f Y %.1f Z %.1f (gaps %.0f/%.0f SE) Haar %.3f", detail.empty() ? "" : "; ", n, t,
                    x.ratio, y.ratio, z.ratio, gx, gy, h.ratio);
    }
  }
  return {pass, detail};
}

ExperimentConfig pure_config(const std::string& data, Arch arch, OrderingKind ordering, std::uint64_t seed) {
  ExperimentConfig c;
  c.dataset_path = data;
  c.model.arch = arch;
  c.model.encoding.kind = EncodingKind::Amplitude;
  c.model.encoding.ordering = ordering;
  c.model.measurement = MeasurementKind::PauliZ;
  c.model.class_count = 4;
  if (arch == Arch::QCNN) {
    c.model.ansatz.kind = AnsatzKind::QCNN;
    c.model.ansatz.layers = 3;
    c.model.ansatz.qcnn_fc_depth = FcDepth::Deep;
  } else {
    c.model.ansatz.kind = AnsatzKind::SimplifiedTwoDesign;
    c.model.ansatz.qcnn_fc_depth = FcDepth::Shallow;
  }
  apply_seed(c, seed);
  return c;
}

Outcome criterion_8(const std::string& data4) {
  int good = 0;
  std::size_t params = 0;
  std::string accs;
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto r = train(pure_config(data4, Arch::QCNN, OrderingKind::Flatten, s));
    params = r.param_count;
    good += r.best_val_acc >= 0.55;
    accs += (accs.empty() ? "" : " ") + fmt("%.2f", r.best_val_acc);
  }
  return {good >= 3 && params <= 400,
          fmt("QCNN/Flatten/PauliZ, %zu params, val_acc per seed [%s], %d/5 >= 0.55", params, accs.c_str(), good)};
}

Outcome criterion_9(const std::string& data10) {
  ExperimentConfig c;
  c.dataset_path = data10;
  c.model.arch = Arch::HQNNParallel;
  c.model.encoding.kind = EncodingKind::Amplitude;
  c.model.ansatz.kind = AnsatzKind::NoEntanglement;
  c.model.measurement = MeasurementKind::PauliZ;
  apply_seed(c, 0);
  const auto r = train(c);
  auto twin = c.model;
  twin.arch = Arch::ClassicalParallel;
  twin.ansatz.seed = 0;
  const std::size_t classical = Model(twin).param_count();
  const double ratio = static_cast<double>(r.param_count) / static_cast<double>(classical);
  return {r.best_val_acc >= 0.3 && ratio < 0.1,
          fmt("val_acc %.2f (chance 0.10, bar 0.30); params %zu (quantum %zu) vs classical twin %zu, ratio %.4f",
              r.best_val_acc, r.param_count, r.quantum_param_count, classical, ratio)};
}

Outcome criterion_10(const std::string& data4) {
  std::vector<double> sq, rnd;
  for (std::uint64_t s = 0; s < 5; ++s) {
    sq.push_back(train(pure_config(data4, Arch::SEQNN_TwoKernel, OrderingKind::Squared, s)).best_val_acc);
    rnd.push_back(train(pure_config(data4, Arch::SEQNN_TwoKernel, OrderingKind::Random, s)).best_val_acc);
  }
  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
  };
  const double ms = median(sq), mr = median(rnd);
  return {ms >= mr - 0.01, fmt("SEQNN_TwoKernel/PauliZ median val_acc: Squared %.2f, Random %.2f", ms, mr)};
}

Outcome criterion_11(const std::string& data10, const fs::path& work) {
  auto strip = [](const fs::path& p) {
    std::ifstream in(p);
    std::string line, out;
    int rows = 0;
    while (std::getline(in, line)) {
      out += line.substr(0, line.rfind(',')) + "\n";
      ++rows;
    }
    return std::make_pair(out, rows);
  };
  ExperimentConfig c;
  c.dataset_path = data10;
  c.model.arch = Arch::HQNNParallel;
  c.model.encoding.kind = EncodingKind::IQP;
  c.model.ansatz.kind = AnsatzKind::NQ;
  c.epochs = 3;
  c.patience = 3;
  apply_seed(c, 11);
  c.workers = 1;
  c.metrics_out_path = (work / "det_a.csv").string();
  train(c);
  c.workers = 3;
  c.metrics_out_path = (work / "det_b.csv").string();
  train(c);
  const auto a = strip(work / "det_a.csv"), b = strip(work / "det_b.csv");
  return {a.first == b.first && a.second == 4,
          fmt("two train runs (1 and 3 workers): %d CSV lines each, identical excluding wall_seconds: %s", a.second,
              a.first == b.first ? "yes" : "no")};
}

}  // namespace

int main(int argc, char** argv) {
  // optional arguments select criteria by number
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));
  const fs::path work = fs::temp_directory_path() / "qpqc_acceptance";
  fs::create_directories(work);
  const std::string data4 = (work / "synth4").string(), data10 = (work / "synth10").string();
  synth_dataset(data4, {16, 16, 3}, 4, 125, 2024);
  synth_dataset(data10, {16, 16, 3}, 10, 50, 2024);

  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "kernel locality", 30, criterion_1},
      {2, "oracle equivalence", 60, criterion_2},
      {3, "gradient suite", 300, criterion_3},
      {4, "AngleZ degeneracy", 600, [&] { return criterion_4(data10, work); }},
      {5, "gate-count formulas", 5, criterion_5},
      {6, "shape contracts", 60, criterion_6},
      {7, "expressibility ordering", 600, criterion_7},
      {8, "QCNN desk-scale training", 2700, [&] { return criterion_8(data4); }},
      {9, "HQNN-Parallel desk-scale training", 3600, [&] { return criterion_9(data10); }},
      {10, "ordering effect", 1e9, [&] { return criterion_10(data4); }},
      {11, "determinism", 1e9, [&] { return criterion_11(data10, work); }},
  };

  int passed = 0, ran = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    ++ran;
    const auto start = Clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(Clock::now() - start).count();
    const bool in_time = secs < c.budget_s;
    const bool ok = o.pass && in_time;
    passed += ok;
    std::printf("[%s] %2d %s: %s (%.1f s%s)\n", ok ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs,
                in_time ? "" : ", over time budget");
    std::fflush(stdout);
  }
  std::printf("%d/%d acceptance criteria passed\n", passed, ran);
  return passed == ran ? 0 : 1;
}
