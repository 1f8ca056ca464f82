#include "qsynapse/quantum_state.hpp"
#include "qsynapse/errors.hpp"

#include <algorithm>
#include <cmath>

namespace qsynapse {

bool density_invariants_ok(const DensityMatrix& rho) {
    if (!all_finite(rho.mat)) return false;
    if (hermiticity_error(rho.mat) >= 1e-9) return false;
    if (std::abs(trace(rho.mat) - cplx(1.0, 0.0)) >= 1e-9) return false;
    const auto ev = hermitian_eigenvalues(rho.mat);
    return ev[0] > -1e-8;
}

DensityMatrix basis_state(BasisLabel label) {
    DensityMatrix rho;
    rho.mat(label.index(), label.index()) = 1.0;
    return rho;
}

double population(const DensityMatrix& rho, int qubit) {
    // Diagonal entries where the qubit's bit is 1: indices {2,3} for
    // qubit 1, {1,3} for qubit 2.
    double p;
    if (qubit == 1) {
        p = rho.mat(2, 2).real() + rho.mat(3, 3).real();
    } else if (qubit == 2) {
        p = rho.mat(1, 1).real() + rho.mat(3, 3).real();
    } else {
        throw Error("population: qubit must be 1 or 2");
    }
    return std::clamp(p, 0.0, 1.0);
}

double purity(const DensityMatrix& rho) {
    return trace(mat_mul(rho.mat, rho.mat)).real();
}

ComplexMat4 partial_transpose_q1(const DensityMatrix& rho) {
    ComplexMat4 pt;
    for (int i1 = 0; i1 < 2; ++i1)
        for (int i2 = 0; i2 < 2; ++i2)
            for (int j1 = 0; j1 < 2; ++j1)
                for (int j2 = 0; j2 < 2; ++j2)
                    pt(2 * i1 + i2, 2 * j1 + j2) = rho.mat(2 * j1 + i2, 2 * i1 + j2);
    return pt;
}

double negativity(const DensityMatrix& rho) {
    const auto ev = hermitian_eigenvalues(partial_transpose_q1(rho));
    double n = 0.0;
    for (double v : ev)
        if (v < 0.0) n -= v;
    return n;
}

std::pair<DensityMatrix, double> collapse_q1(const DensityMatrix& rho, int outcome) {
    if (outcome != 0 && outcome != 1) throw Error("collapse_q1: outcome must be 0 or 1");
    // Projector onto b1 = outcome keeps the 2x2 block at rows/cols
    // {2*outcome, 2*outcome+1}.
    const int base = 2 * outcome;
    const double p = rho.mat(base, base).real() + rho.mat(base + 1, base + 1).real();
    if (p <= 1e-12)
        throw ZeroProbabilityOutcome("collapse_q1: outcome probability <= 1e-12");
    DensityMatrix out;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            out.mat(base + i, base + j) = rho.mat(base + i, base + j) / p;
    return {out, p};
}

} // namespace qsynapse
