#pragma once

#include <array>
#include <complex>
#include <cstddef>

namespace qsynapse {

using cplx = std::complex<double>;

// Dense 4x4 complex matrix, row-major. This is the only linear-algebra
// object the engine needs: it holds H, rho and partial transposes.
struct ComplexMat4 {
    std::array<cplx, 16> a{};

    cplx& operator()(int i, int j) { return a[static_cast<size_t>(4 * i + j)]; }
    const cplx& operator()(int i, int j) const { return a[static_cast<size_t>(4 * i + j)]; }

    static ComplexMat4 zero() { return ComplexMat4{}; }
    static ComplexMat4 identity() {
        ComplexMat4 m;
        for (int i = 0; i < 4; ++i) m(i, i) = 1.0;
        return m;
    }
};

ComplexMat4 mat_mul(const ComplexMat4& a, const ComplexMat4& b);
ComplexMat4 mat_add(const ComplexMat4& a, const ComplexMat4& b);
ComplexMat4 mat_sub(const ComplexMat4& a, const ComplexMat4& b);
ComplexMat4 mat_scale(const ComplexMat4& a, cplx s);
ComplexMat4 dagger(const ComplexMat4& a);

// ab - ba. Implemented so that commutator(b,a) is the exact negation
// (same products, subtracted in the same order then sign-flipped).
ComplexMat4 commutator(const ComplexMat4& a, const ComplexMat4& b);

cplx trace(const ComplexMat4& a);

// max_ij |a_ij - conj(a_ji)|, the hermiticity defect used in preconditions.
double hermiticity_error(const ComplexMat4& a);

bool all_finite(const ComplexMat4& a);

// Eigenvalues of a Hermitian matrix, ascending, via cyclic Jacobi
// rotations (off-diagonal Frobenius norm reduced below 1e-12).
// Throws NotHermitian when hermiticity_error(m) > 1e-10 or entries are
// not finite.
std::array<double, 4> hermitian_eigenvalues(const ComplexMat4& m);

} // namespace qsynapse
