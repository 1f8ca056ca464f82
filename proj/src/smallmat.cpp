#include "qsynapse/smallmat.hpp"
#include "qsynapse/errors.hpp"

#include <cmath>

namespace qsynapse {

ComplexMat4 mat_mul(const ComplexMat4& a, const ComplexMat4& b) {
    ComplexMat4 c;
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            cplx s = a(i, 0) * b(0, j);
            s += a(i, 1) * b(1, j);
            s += a(i, 2) * b(2, j);
            s += a(i, 3) * b(3, j);
            c(i, j) = s;
        }
    }
    return c;
}

ComplexMat4 mat_add(const ComplexMat4& a, const ComplexMat4& b) {
    ComplexMat4 c;
    for (size_t k = 0; k < 16; ++k) c.a[k] = a.a[k] + b.a[k];
    return c;
}

ComplexMat4 mat_sub(const ComplexMat4& a, const ComplexMat4& b) {
    ComplexMat4 c;
    for (size_t k = 0; k < 16; ++k) c.a[k] = a.a[k] - b.a[k];
    return c;
}

ComplexMat4 mat_scale(const ComplexMat4& a, cplx s) {
    ComplexMat4 c;
    for (size_t k = 0; k < 16; ++k) c.a[k] = a.a[k] * s;
    return c;
}

ComplexMat4 dagger(const ComplexMat4& a) {
    ComplexMat4 c;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) c(i, j) = std::conj(a(j, i));
    return c;
}

ComplexMat4 commutator(const ComplexMat4& a, const ComplexMat4& b) {
    return mat_sub(mat_mul(a, b), mat_mul(b, a));
}

cplx trace(const ComplexMat4& a) { return a(0, 0) + a(1, 1) + a(2, 2) + a(3, 3); }

double hermiticity_error(const ComplexMat4& a) {
    double worst = 0.0;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            worst = std::max(worst, std::abs(a(i, j) - std::conj(a(j, i))));
    return worst;
}

bool all_finite(const ComplexMat4& a) {
    for (const cplx& z : a.a)
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
    return true;
}

namespace {

double offdiag_frobenius(const ComplexMat4& m) {
    double s = 0.0;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            if (i != j) s += std::norm(m(i, j));
    return std::sqrt(s);
}

// One Jacobi similarity A <- J^dag A J zeroing the (p,q) entry. The
// unitary is a real Givens rotation composed with the phase of a_pq, so
// the 2x2 block reduces to the textbook symmetric case.
void jacobi_rotate(ComplexMat4& m, int p, int q) {
    const cplx apq = m(p, q);
    const double g = std::abs(apq);
    if (g == 0.0) return;
    const cplx phase = apq / g; // e^{i phi}
    const double app = m(p, p).real();
    const double aqq = m(q, q).real();

    const double zeta = (aqq - app) / (2.0 * g);
    double t;
    if (std::abs(zeta) > 1e150) {
        t = 1.0 / (2.0 * zeta);
    } else {
        t = ((zeta >= 0.0) ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(zeta * zeta + 1.0));
    }
    const double c = 1.0 / std::sqrt(t * t + 1.0);
    const double s = t * c;

    ComplexMat4 j = ComplexMat4::identity();
    j(p, p) = c;
    j(p, q) = s * phase;
    j(q, p) = -s * std::conj(phase);
    j(q, q) = c;

    m = mat_mul(dagger(j), mat_mul(m, j));
    // Clean the rotation target and keep the working matrix Hermitian
    // against floating-point crumbs.
    m(p, q) = 0.0;
    m(q, p) = 0.0;
    for (int i = 0; i < 4; ++i) m(i, i) = cplx(m(i, i).real(), 0.0);
}

} // namespace

std::array<double, 4> hermitian_eigenvalues(const ComplexMat4& input) {
    if (!all_finite(input)) throw NotHermitian("hermitian_eigenvalues: non-finite entries");
    if (hermiticity_error(input) > 1e-10)
        throw NotHermitian("hermitian_eigenvalues: matrix is not Hermitian within 1e-10");

    // Work on the exactly Hermitian average; the defect is already bounded.
    ComplexMat4 m = mat_scale(mat_add(input, dagger(input)), 0.5);

    for (int sweep = 0; sweep < 100; ++sweep) {
        if (offdiag_frobenius(m) < 1e-12) break;
        for (int p = 0; p < 4; ++p)
            for (int q = p + 1; q < 4; ++q) jacobi_rotate(m, p, q);
    }

    std::array<double, 4> ev{m(0, 0).real(), m(1, 1).real(), m(2, 2).real(), m(3, 3).real()};
    // insertion sort, ascending
    for (int i = 1; i < 4; ++i) {
        double v = ev[static_cast<size_t>(i)];
        int k = i - 1;
        while (k >= 0 && ev[static_cast<size_t>(k)] > v) {
            ev[static_cast<size_t>(k + 1)] = ev[static_cast<size_t>(k)];
            --k;
        }
        ev[static_cast<size_t>(k + 1)] = v;
    }
    return ev;
}

} // namespace qsynapse
