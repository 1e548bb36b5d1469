#pragma once

#include <vector>

#include "qpqc/random.hpp"
#include "qpqc/state_vector.hpp"

namespace qpqc {

/// Haar-distributed dim x dim unitary (row-major), via QR of a complex
/// Ginibre matrix with the phase of R's diagonal divided out.
std::vector<cplx> haar_unitary(int dim, Rng& rng);

/// Haar-random pure state on n qubits.
StateVector haar_state(int n_qubits, Rng& rng);

/// Lowercase, with '_' and '-' removed. Used for enum-name parsing.
std::string normalize_name(const std::string& name);

}  // namespace qpqc
