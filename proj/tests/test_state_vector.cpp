#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracle.hpp"
#include "qpqc/error.hpp"
#include "qpqc/gates.hpp"
#include "qpqc/linalg.hpp"
#include "qpqc/random.hpp"

using namespace qpqc;

namespace {

GateSequence random_sequence(int n, int n_gates, Rng& rng) {
  static constexpr GateKind one[] = {GateKind::H, GateKind::X, GateKind::Y, GateKind::Z, GateKind::S,
                                     GateKind::Sdg, GateKind::RX, GateKind::RY, GateKind::RZ};
  static constexpr GateKind two[] = {GateKind::CNOT, GateKind::CZ, GateKind::RZZ,
                                     GateKind::CRX, GateKind::CRY, GateKind::CRZ};
  GateSequence seq(n);
  for (int i = 0; i < n_gates; ++i) {
    const int a = static_cast<int>(rng.below(n));
    if (n > 1 && rng.bernoulli(0.4)) {
      int b = static_cast<int>(rng.below(n - 1));
      if (b >= a) ++b;
      if (rng.bernoulli(0.1)) {
        seq.push(GateOp::unitary(haar_unitary(4, rng), a, b));
        continue;
      }
      const GateKind k = two[rng.below(6)];
      if (is_parameterized(k)) {
        seq.push(GateOp::rotation(k, a, b, AngleRef::constant(rng.uniform(-4, 4))));
      } else {
        seq.push(GateOp::fixed(k, a, b));
      }
    } else {
      if (rng.bernoulli(0.1)) {
        seq.push(GateOp::unitary(haar_unitary(2, rng), a));
        continue;
      }
      const GateKind k = one[rng.below(9)];
      if (is_parameterized(k)) {
        seq.push(GateOp::rotation(k, a, AngleRef::constant(rng.uniform(-4, 4))));
      } else {
        seq.push(GateOp::fixed(k, a));
      }
    }
  }
  return seq;
}

}  // namespace

TEST_CASE("zero state") {
  auto s = new_zero_state(1);
  CHECK(s.dimension() == 2);
  CHECK(s[0] == cplx(1));
  CHECK(s[1] == cplx(0));
  auto s3 = new_zero_state(3);
  CHECK(s3.dimension() == 8);
  CHECK(s3[0] == cplx(1));
  CHECK_THROWS_AS(new_zero_state(27), CapacityError);
  CHECK_THROWS_AS(new_zero_state(0), CapacityError);
}

TEST_CASE("single gates on small states") {
  auto s = new_zero_state(1);
  apply_gate(s, GateOp::fixed(GateKind::X, 0));
  CHECK(std::abs(s[1] - cplx(1)) < 1e-15);

  auto h = new_zero_state(1);
  apply_gate(h, GateOp::fixed(GateKind::H, 0));
  const auto p = basis_probabilities(h);
  CHECK(p[0] == doctest::Approx(0.5));
  CHECK(p[1] == doctest::Approx(0.5));
  CHECK(expectation_pauli(h, PauliString("X")) == doctest::Approx(1.0));
  CHECK(expectation_pauli(new_zero_state(1), PauliString("Z")) == doctest::Approx(1.0));
}

TEST_CASE("big-endian: X on qubit 0 flips the most significant bit") {
  auto s = new_zero_state(3);
  apply_gate(s, GateOp::fixed(GateKind::X, 0));
  CHECK(std::abs(s[4]) == doctest::Approx(1.0));
}

TEST_CASE("Bell state stabilizers") {
  auto s = new_zero_state(2);
  apply_gate(s, GateOp::fixed(GateKind::H, 0));
  apply_gate(s, GateOp::fixed(GateKind::CNOT, 0, 1));
  CHECK(expectation_pauli(s, PauliString("ZZ")) == doctest::Approx(1.0));
  CHECK(expectation_pauli(s, PauliString("XX")) == doctest::Approx(1.0));
  CHECK(expectation_pauli(s, PauliString("YY")) == doctest::Approx(-1.0));
  CHECK_THROWS_AS(expectation_pauli(s, PauliString("Z")), ShapeError);
  CHECK_THROWS_AS(PauliString("ZQ"), ShapeError);
}

TEST_CASE("two-qubit gate block structure on consecutive and strided amplitudes") {
  Rng rng(11);
  const auto g = haar_unitary(4, rng);
  auto phi = haar_state(3, rng);
  SUBCASE("lowest pair mixes groups of four consecutive amplitudes") {
    auto out = phi;
    apply_gate(out, GateOp::unitary(g, 1, 2));
    for (int blk = 0; blk < 2; ++blk) {
      for (int r = 0; r < 4; ++r) {
        cplx want = 0;
        for (int c = 0; c < 4; ++c) want += g[r * 4 + c] * phi[blk * 4 + c];
        CHECK(std::abs(out[blk * 4 + r] - want) < 1e-14);
      }
    }
  }
  SUBCASE("highest pair mixes even and odd strided groups") {
    auto out = phi;
    apply_gate(out, GateOp::unitary(g, 0, 1));
    for (int l = 0; l < 2; ++l) {
      for (int r = 0; r < 4; ++r) {
        cplx want = 0;
        for (int c = 0; c < 4; ++c) want += g[r * 4 + c] * phi[l + 2 * c];
        CHECK(std::abs(out[l + 2 * r] - want) < 1e-14);
      }
    }
  }
}

TEST_CASE("non-unitary matrices are rejected and targets validated") {
  std::vector<cplx> bad{1, 1, 0, 1};
  CHECK_THROWS_AS(GateOp::unitary(bad, 0), ShapeError);
  GateSequence seq(2);
  CHECK_THROWS_AS(seq.push(GateOp::fixed(GateKind::CNOT, 1, 1)), ShapeError);
  CHECK_THROWS_AS(seq.push(GateOp::fixed(GateKind::X, 2)), ShapeError);
}

TEST_CASE("random sequences match the dense product unitary") {
  Rng rng(2024);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 1 + static_cast<int>(rng.below(5));
    const auto seq = random_sequence(n, 30, rng);
    auto psi = haar_state(n, rng);
    const oracle::Vec want = oracle::sequence_unitary(seq) * oracle::to_vec(psi);
    run(psi, seq);
    for (std::size_t i = 0; i < psi.dimension(); ++i) CHECK(std::abs(psi[i] - want(static_cast<long>(i))) < 1e-10);
    const auto probs = basis_probabilities(psi);
    for (std::size_t i = 0; i < psi.dimension(); ++i) {
      CHECK(std::abs(probs[i] - std::norm(want(static_cast<long>(i)))) < 1e-12);
    }
  }
}

TEST_CASE("adjoint application inverts each gate") {
  Rng rng(5);
  const auto seq = random_sequence(4, 60, rng);
  auto psi = haar_state(4, rng);
  const auto start = psi;
  run(psi, seq);
  for (auto it = seq.gates().rbegin(); it != seq.gates().rend(); ++it) {
    apply_gate_adjoint(psi, *it, it->parameterized() ? it->angle.scale : 0.0);
  }
  for (std::size_t i = 0; i < psi.dimension(); ++i) CHECK(std::abs(psi[i] - start[i]) < 1e-12);
}

TEST_CASE("norm preserved over long sequences") {
  Rng rng(77);
  for (int n : {6, 9, 12}) {
    const auto seq = random_sequence(n, 500, rng);
    auto psi = new_zero_state(n);
    run(psi, seq);
    CHECK(std::abs(psi.norm_squared() - 1.0) < 1e-9);
  }
}

TEST_CASE("Pauli expectations match Kronecker-product operators") {
  Rng rng(3);
  static constexpr char letters[] = {'I', 'X', 'Y', 'Z'};
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 1 + static_cast<int>(rng.below(4));
    std::string s(n, 'I');
    for (auto& c : s) c = letters[rng.below(4)];
    const auto psi = haar_state(n, rng);
    const double want = oracle::expectation(oracle::to_vec(psi), oracle::pauli_matrix(s));
    CHECK(expectation_pauli(psi, PauliString(s)) == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("generator inner product is the angle derivative") {
  Rng rng(8);
  for (GateKind k : {GateKind::RX, GateKind::RY, GateKind::RZ, GateKind::RZZ, GateKind::CRX, GateKind::CRY,
                     GateKind::CRZ}) {
    const auto gate = gate_arity(k) == 1 ? GateOp::rotation(k, 1, AngleRef::constant(0))
                                         : GateOp::rotation(k, 2, 0, AngleRef::constant(0));
    const auto psi = haar_state(3, rng);
    const double t = 0.7, h = 1e-6;
    auto plus = psi, minus = psi, at = psi;
    apply_gate(plus, gate, t + h);
    apply_gate(minus, gate, t - h);
    apply_gate(at, gate, t);
    // dU/dt psi = -i/2 G U psi, so <v| dU/dt psi> = -i/2 <v|G|U psi>
    const auto v = haar_state(3, rng);
    const cplx fd = (v.inner(plus) - v.inner(minus)) / (2 * h);
    const cplx analytic = cplx(0, -0.5) * generator_inner(v, gate, at);
    CHECK(std::abs(fd - analytic) < 1e-8);
  }
}
