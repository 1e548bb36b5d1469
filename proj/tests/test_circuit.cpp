#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracle.hpp"
#include "qpqc/circuit.hpp"
#include "qpqc/error.hpp"
#include "qpqc/random.hpp"

using namespace qpqc;

namespace {

constexpr EncodingKind kRotationEncodings[] = {EncodingKind::AngleX, EncodingKind::AngleY, EncodingKind::AngleZ,
                                               EncodingKind::IQP,    EncodingKind::QAOA_X, EncodingKind::QAOA_Y,
                                               EncodingKind::QAOA_Z, EncodingKind::Ring,   EncodingKind::Waterfall};
constexpr AnsatzKind kAnsaetze[] = {AnsatzKind::NoEntanglement, AnsatzKind::FullEntanglement, AnsatzKind::Ring,
                                    AnsatzKind::NQ, AnsatzKind::SimplifiedTwoDesign};
constexpr MeasurementKind kSingle[] = {MeasurementKind::PauliX, MeasurementKind::PauliY, MeasurementKind::PauliZ};

CircuitSpec make_spec(EncodingKind e, AnsatzKind a, MeasurementKind m, int n, int layers = 2) {
  CircuitSpec s;
  s.encoding.kind = e;
  s.encoding.layers = layers;
  s.ansatz.kind = a;
  s.ansatz.layers = layers;
  if (a == AnsatzKind::NoEntanglement) s.ansatz.seed = 5;
  s.n_qubits = n;
  if (m == MeasurementKind::Histogram || m == MeasurementKind::Paulis) {
    std::vector<int> all(n);
    for (int q = 0; q < n; ++q) all[q] = q;
    s.measurement = classifier_measurement(m, 3, all, n, 9);
  } else {
    s.measurement = all_qubit_measurement(m, n);
  }
  return s;
}

std::vector<double> uniform(std::size_t k, Rng& rng, double lo, double hi) {
  std::vector<double> v(k);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return v;
}

double weighted(const Circuit& c, const std::vector<double>& p, const std::vector<double>& x,
                const std::vector<double>& w) {
  const auto out = c.forward(p, x);
  double s = 0;
  for (std::size_t k = 0; k < out.size(); ++k) s += w[k] * out[k];
  return s;
}

// Central differences of the weighted output.
CircuitGradient finite_difference(const Circuit& c, std::vector<double> p, std::vector<double> x,
                                  const std::vector<double>& w, double h) {
  CircuitGradient g;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double keep = p[i];
    p[i] = keep + h;
    const double up = weighted(c, p, x, w);
    p[i] = keep - h;
    const double down = weighted(c, p, x, w);
    p[i] = keep;
    g.d_params.push_back((up - down) / (2 * h));
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + h;
    const double up = weighted(c, p, x, w);
    x[i] = keep - h;
    const double down = weighted(c, p, x, w);
    x[i] = keep;
    g.d_inputs.push_back((up - down) / (2 * h));
  }
  return g;
}

void check_close(const std::vector<double>& a, const std::vector<double>& b, double rel) {
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(std::abs(a[i] - b[i]) <= rel * std::max(1.0, std::abs(b[i])));
  }
}

}  // namespace

TEST_CASE("identity circuit on |0...0>") {
  auto spec = make_spec(EncodingKind::AngleX, AnsatzKind::NoEntanglement, MeasurementKind::PauliZ, 3, 1);
  Circuit c(spec);
  const auto out = c.forward(std::vector<double>(c.param_count(), 0.0), std::vector<double>(3, 0.0));
  for (double v : out) CHECK(v == doctest::Approx(1.0));
}

TEST_CASE("single-qubit analytic gradient") {
  CircuitSpec spec;
  spec.encoding.kind = EncodingKind::AngleX;
  spec.ansatz.kind = AnsatzKind::NoEntanglement;
  spec.ansatz.seed = 1;
  spec.n_qubits = 1;
  spec.measurement = all_qubit_measurement(MeasurementKind::PauliZ, 1);
  Circuit c(spec);
  const std::vector<double> p(c.param_count(), 0.0);
  for (double theta : {0.0, 0.4, std::numbers::pi / 2, 2.5}) {
    const std::vector<double> x{theta};
    const auto ps = c.grad_parameter_shift(p, x);
    const auto adj = c.grad_adjoint(p, x);
    CHECK(ps.d_inputs[0] == doctest::Approx(-std::sin(theta)).epsilon(1e-12));
    CHECK(adj.d_inputs[0] == doctest::Approx(-std::sin(theta)).epsilon(1e-12));
  }
}

TEST_CASE("zero-parameter circuit has empty d_params") {
  CircuitSpec spec;
  spec.encoding.kind = EncodingKind::Ring;
  spec.ansatz.kind = AnsatzKind::NoEntanglement;
  spec.ansatz.seed = 1;
  spec.n_qubits = 2;
  spec.measurement = all_qubit_measurement(MeasurementKind::PauliZ, 2);
  Circuit c(Circuit(spec.encoding, GateSequence(2), spec.measurement, 2));
  CHECK(c.param_count() == 0);
  CHECK(c.grad_parameter_shift({}, std::vector<double>{0.3, 0.2}).d_params.empty());
}

TEST_CASE("forward agrees with the dense oracle") {
  Rng rng(100);
  for (auto e : kRotationEncodings) {
    for (auto a : kAnsaetze) {
      const int n = 2 + static_cast<int>(rng.below(4));
      const auto m = kSingle[rng.below(3)];
      auto spec = make_spec(e, a, m, n);
      Circuit c(spec);
      const auto p = uniform(c.param_count(), rng, -3.14, 3.14);
      const auto x = uniform(n, rng, 0, 3.14);
      const auto psi = c.state(p, x);
      const oracle::Vec want = oracle::sequence_unitary(c.gates(), Bindings{p, x}).col(0);
      // equal up to a global phase
      const cplx overlap = (want.adjoint() * oracle::to_vec(psi))(0, 0);
      CHECK(std::abs(std::abs(overlap) - 1.0) < 1e-10);
      const auto out = c.forward(p, x);
      for (std::size_t k = 0; k < out.size(); ++k) {
        const int q = spec.measurement.measured_qubits[k];
        std::string letters(n, 'I');
        letters[q] = m == MeasurementKind::PauliX ? 'X' : m == MeasurementKind::PauliY ? 'Y' : 'Z';
        CHECK(std::abs(out[k] - oracle::expectation(want, oracle::pauli_matrix(letters))) < 1e-10);
      }
    }
  }
}

TEST_CASE("parameter shift matches finite differences") {
  Rng rng(200);
  for (auto e : kRotationEncodings) {
    for (auto a : kAnsaetze) {
      for (auto m : kSingle) {
        const int n = 2 + static_cast<int>(rng.below(3));
        Circuit c(make_spec(e, a, m, n, 1 + static_cast<int>(rng.below(2))));
        const auto p = uniform(c.param_count(), rng, -3.14, 3.14);
        const auto x = uniform(n, rng, 0, 3.14);
        const auto w = uniform(c.output_size(), rng, -1, 1);
        const auto ps = c.grad_parameter_shift(p, x, w);
        const auto fd = finite_difference(c, p, x, w, 1e-5);
        check_close(ps.d_params, fd.d_params, 1e-6);
        check_close(ps.d_inputs, fd.d_inputs, 1e-6);
      }
    }
  }
}

TEST_CASE("adjoint matches parameter shift") {
  Rng rng(300);
  int circuits = 0;
  for (auto e : kRotationEncodings) {
    for (auto a : kAnsaetze) {
      const int n = 2 + static_cast<int>(rng.below(5));
      const auto m = std::array{MeasurementKind::PauliX, MeasurementKind::PauliY, MeasurementKind::PauliZ,
                                MeasurementKind::Histogram, MeasurementKind::Paulis}[rng.below(5)];
      Circuit c(make_spec(e, a, m, n));
      const auto p = uniform(c.param_count(), rng, -3.14, 3.14);
      const auto x = uniform(n, rng, 0, 3.14);
      const auto w = uniform(c.output_size(), rng, -1, 1);
      const auto ps = c.grad_parameter_shift(p, x, w);
      const auto adj = c.grad_adjoint(p, x, w);
      check_close(adj.d_params, ps.d_params, 1e-8);
      check_close(adj.d_inputs, ps.d_inputs, 1e-8);
      check_close(adj.output, c.forward(p, x), 1e-12);
      ++circuits;
    }
  }
  CHECK(circuits >= 45);
}

TEST_CASE("QCNN controlled rotations: four-term shift, adjoint and finite differences") {
  Rng rng(400);
  CircuitSpec spec;
  spec.encoding.kind = EncodingKind::Amplitude;
  spec.ansatz.kind = AnsatzKind::QCNN;
  spec.ansatz.layers = 1;
  spec.n_qubits = 5;
  std::vector<int> all{0, 1, 2, 3, 4};
  spec.measurement = classifier_measurement(MeasurementKind::PauliZ, 3, all, 5, 1);
  Circuit c(spec);
  const auto p = uniform(c.param_count(), rng, -3.14, 3.14);
  const auto x = uniform(20, rng, 0, 1);
  const auto w = uniform(c.output_size(), rng, -1, 1);
  const auto ps = c.grad_parameter_shift(p, x, w);
  const auto adj = c.grad_adjoint(p, x, w);
  const auto fd = finite_difference(c, p, x, w, 1e-5);
  check_close(ps.d_params, fd.d_params, 1e-6);
  check_close(adj.d_params, ps.d_params, 1e-8);
  check_close(adj.d_inputs, fd.d_inputs, 1e-6);
}

TEST_CASE("amplitude input gradient through the normalization") {
  Rng rng(500);
  for (auto m : {MeasurementKind::PauliZ, MeasurementKind::Histogram, MeasurementKind::Paulis}) {
    auto spec = make_spec(EncodingKind::Amplitude, AnsatzKind::FullEntanglement, m, 4);
    spec.ordering = build_ordering(OrderingKind::Random, {4, 4, 1}, 3);
    Circuit c(spec);
    const auto p = uniform(c.param_count(), rng, -3.14, 3.14);
    const auto x = uniform(13, rng, 0, 1);  // shorter than 2^n: zero padded
    const auto w = uniform(c.output_size(), rng, -1, 1);
    const auto adj = c.grad_adjoint(p, x, w);
    const auto fd = finite_difference(c, p, x, w, 1e-6);
    check_close(adj.d_inputs, fd.d_inputs, 1e-6);
    check_close(adj.d_params, fd.d_params, 1e-6);
  }
}

TEST_CASE("AngleZ input gradients are exactly zero") {
  Rng rng(600);
  for (auto a : kAnsaetze) {
    for (auto m : kSingle) {
      Circuit c(make_spec(EncodingKind::AngleZ, a, m, 4));
      const auto p = uniform(c.param_count(), rng, -3.14, 3.14);
      const auto x = uniform(4, rng, 0, 3.14);
      for (double v : c.grad_adjoint(p, x).d_inputs) CHECK(v == 0.0);
      for (double v : c.grad_parameter_shift(p, x).d_inputs) CHECK(v == 0.0);
    }
  }
}

TEST_CASE("input validation") {
  Circuit c(make_spec(EncodingKind::AngleX, AnsatzKind::NQ, MeasurementKind::PauliZ, 3));
  CHECK_THROWS_AS(c.forward(std::vector<double>(c.param_count() + 1), std::vector<double>(3)), ShapeError);
  CHECK_THROWS_AS(c.forward(std::vector<double>(c.param_count()), std::vector<double>(2)), ShapeError);
}
