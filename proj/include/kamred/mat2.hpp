#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace kamred {

using cplx = std::complex<double>;

/// 2x2 real matrix, row-major.
struct Mat2 {
    double m11 = 0, m12 = 0, m21 = 0, m22 = 0;

    static Mat2 identity() { return {1, 0, 0, 1}; }
    /// J = [[0,1],[-1,0]], the generator of so(2,R).
    static Mat2 rotation_generator() { return {0, 1, -1, 0}; }

    double trace() const { return m11 + m22; }
    double det() const { return m11 * m22 - m12 * m21; }

    Mat2 operator+(const Mat2& o) const { return {m11 + o.m11, m12 + o.m12, m21 + o.m21, m22 + o.m22}; }
    Mat2 operator-(const Mat2& o) const { return {m11 - o.m11, m12 - o.m12, m21 - o.m21, m22 - o.m22}; }
    Mat2 operator*(const Mat2& o) const {
        return {m11 * o.m11 + m12 * o.m21, m11 * o.m12 + m12 * o.m22,
                m21 * o.m11 + m22 * o.m21, m21 * o.m12 + m22 * o.m22};
    }
    Mat2 operator*(double s) const { return {m11 * s, m12 * s, m21 * s, m22 * s}; }

    /// Exact inverse via the adjugate; throws on (numerically) singular input.
    Mat2 inverse() const;
};

/// 2x2 complex matrix, row-major.
struct Mat2c {
    cplx m11, m12, m21, m22;

    Mat2c() = default;
    Mat2c(cplx a, cplx b, cplx c, cplx d) : m11(a), m12(b), m21(c), m22(d) {}
    Mat2c(const Mat2& m) : m11(m.m11), m12(m.m12), m21(m.m21), m22(m.m22) {}

    static Mat2c identity() { return {1, 0, 0, 1}; }

    cplx trace() const { return m11 + m22; }
    cplx det() const { return m11 * m22 - m12 * m21; }

    Mat2c operator+(const Mat2c& o) const { return {m11 + o.m11, m12 + o.m12, m21 + o.m21, m22 + o.m22}; }
    Mat2c operator-(const Mat2c& o) const { return {m11 - o.m11, m12 - o.m12, m21 - o.m21, m22 - o.m22}; }
    Mat2c operator*(const Mat2c& o) const {
        return {m11 * o.m11 + m12 * o.m21, m11 * o.m12 + m12 * o.m22,
                m21 * o.m11 + m22 * o.m21, m21 * o.m12 + m22 * o.m22};
    }
    Mat2c operator*(cplx s) const { return {m11 * s, m12 * s, m21 * s, m22 * s}; }
    Mat2c operator*(double s) const { return {m11 * s, m12 * s, m21 * s, m22 * s}; }

    Mat2c conj() const { return {std::conj(m11), std::conj(m12), std::conj(m21), std::conj(m22)}; }
    Mat2c inverse() const;

    Mat2 real_part() const {
        return {m11.real(), m12.real(), m21.real(), m22.real()};
    }
    double max_imag() const;
    bool is_zero() const;
};

/// Spectral (operator 2-) norm, closed form for 2x2.
double op_norm(const Mat2& m);
double op_norm(const Mat2c& m);

/// Largest and smallest singular value.
double sigma_max(const Mat2& m);
double sigma_min(const Mat2& m);

struct NotElliptic : std::domain_error {
    using std::domain_error::domain_error;
};

/// Rotation number of an elliptic traceless matrix: alpha = sqrt(det A) > 0.
/// Throws NotElliptic when the spectrum is not purely imaginary
/// (det(A) <= 1e-14 * |A|^2) or when the input is not traceless.
double elliptic_rotation_number(const Mat2& A);

/// Real and complex normal forms of a positively oriented elliptic matrix:
///   P A P^{-1} = alpha J   with det P = 1,
///   Q A Q^{-1} = i alpha R with Q = M P, R = diag(1,-1).
/// P is the symmetric (optimal condition number) conjugator; it satisfies
/// |P| = |P^{-1}| <= 2 (|A|/alpha)^{1/2}.  A matrix with negative
/// orientation (m12 < 0; SL(2,R)-conjugate to -alpha J, not +alpha J)
/// is rejected.
struct EllipticNormalForm {
    double alpha = 0;
    Mat2 P, P_inv;
    Mat2c Q, Q_inv;
};
EllipticNormalForm real_normal_form(const Mat2& A);

/// Normal form of alpha J + B for a small traceless perturbation B with
/// |B| <= alpha/4:  P (alpha J + B) P^{-1} = beta J, beta in [alpha/2, 3 alpha/2].
/// P is scaled so that its smallest singular value is 1, which gives
/// |P^{-1}| = 1 exactly and |P| = cond(P) <= 4.  (det P >= 1 here; the
/// conjugation itself is scale invariant.)
struct PerturbedNormalForm {
    double beta = 0;
    Mat2 P, P_inv;
};
PerturbedNormalForm perturbed_normal_form(double alpha, const Mat2& B);

/// The unitary change of basis M with M J M^{-1} = i R.  Verified once at
/// first use (self-check rather than trusted constant).
const Mat2c& complex_structure_matrix();
const Mat2c& complex_structure_matrix_inv();

} // namespace kamred
