#include "qpqc/linalg.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cctype>
#include <cmath>

namespace qpqc {

std::vector<cplx> haar_unitary(int dim, Rng& rng) {
  Eigen::MatrixXcd z(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) z(i, j) = cplx(rng.normal(), rng.normal()) / std::sqrt(2.0);
  }
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(z);
  Eigen::MatrixXcd q = qr.householderQ();
  const Eigen::MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < dim; ++j) {
    const cplx d = r(j, j);
    const double mag = std::abs(d);
    if (mag > 0) q.col(j) *= d / mag;
  }
  std::vector<cplx> out(static_cast<std::size_t>(dim) * dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) out[static_cast<std::size_t>(i) * dim + j] = q(i, j);
  }
  return out;
}

StateVector haar_state(int n_qubits, Rng& rng) {
  std::vector<cplx> amps(std::size_t{1} << n_qubits);
  double norm = 0.0;
  for (auto& a : amps) {
    a = cplx(rng.normal(), rng.normal());
    norm += std::norm(a);
  }
  norm = std::sqrt(norm);
  for (auto& a : amps) a /= norm;
  return StateVector::from_amplitudes(std::move(amps));
}

std::string normalize_name(const std::string& name) {
  std::string out;
  for (char c : name) {
    if (c == '_' || c == '-' || c == ' ') continue;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

}  // namespace qpqc
