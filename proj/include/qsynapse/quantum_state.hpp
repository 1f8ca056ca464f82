#pragma once

#include "qsynapse/smallmat.hpp"

#include <utility>

namespace qsynapse {

// Product-basis label. Index ordering is |00>, |01>, |10>, |11> with the
// FIRST digit belonging to qubit 1, i.e. index = 2*b1 + b2, bit 1 = excited.
struct BasisLabel {
    int b1 = 0;
    int b2 = 0;
    int index() const { return 2 * b1 + b2; }
};

// 4x4 density matrix of the qubit pair in the fixed product basis.
// Convention: sigma^z|e> = +|e>, sigma^+ = |e><g|, so sigma^+ sigma^- is
// the excited-state projector and populations sit on the diagonal.
struct DensityMatrix {
    ComplexMat4 mat;
};

// Hermitian within 1e-9, unit trace within 1e-9, smallest eigenvalue
// above -1e-8 (tolerances absorb integrator drift). Used by tests and
// at entry points, not inside the integration loop.
bool density_invariants_ok(const DensityMatrix& rho);

DensityMatrix basis_state(BasisLabel label);

// <sigma_i^+ sigma_i^-> for qubit i in {1,2}; clamped to [0,1].
double population(const DensityMatrix& rho, int qubit);

double purity(const DensityMatrix& rho); // trace(rho^2)

// Transpose over qubit-1 indices only; Hermitian for Hermitian input.
ComplexMat4 partial_transpose_q1(const DensityMatrix& rho);

// Sum of |negative eigenvalues| of the partial transpose: 0 for
// separable states, 0.5 at maximal two-qubit entanglement.
double negativity(const DensityMatrix& rho);

// Projective measurement of qubit 1 in the computational basis.
// Returns the normalized post-measurement state and the outcome
// probability. Throws ZeroProbabilityOutcome when that probability
// is <= 1e-12 (callers must not sample such a branch).
std::pair<DensityMatrix, double> collapse_q1(const DensityMatrix& rho, int outcome);

} // namespace qsynapse
