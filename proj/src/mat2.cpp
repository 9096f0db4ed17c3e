#include "kamred/mat2.hpp"

#include <algorithm>
#include <cmath>

namespace kamred {

namespace {

// Eigenvalues of M^H M for a 2x2 matrix with given squared Frobenius norm
// and |det|: lambda_max/min = (s +/- sqrt(s^2 - 4 |det|^2)) / 2.
double lambda_max_gram(double frob2, double absdet) {
    double disc = frob2 * frob2 - 4.0 * absdet * absdet;
    disc = std::max(disc, 0.0);
    return 0.5 * (frob2 + std::sqrt(disc));
}

} // namespace

Mat2 Mat2::inverse() const {
    double d = det();
    if (std::abs(d) < 1e-300)
        throw std::domain_error("Mat2::inverse: singular matrix");
    double s = 1.0 / d;
    return {m22 * s, -m12 * s, -m21 * s, m11 * s};
}

Mat2c Mat2c::inverse() const {
    cplx d = det();
    if (std::abs(d) < 1e-300)
        throw std::domain_error("Mat2c::inverse: singular matrix");
    cplx s = 1.0 / d;
    return {m22 * s, -m12 * s, -m21 * s, m11 * s};
}

double Mat2c::max_imag() const {
    return std::max(std::max(std::abs(m11.imag()), std::abs(m12.imag())),
                    std::max(std::abs(m21.imag()), std::abs(m22.imag())));
}

bool Mat2c::is_zero() const {
    return m11 == 0.0 && m12 == 0.0 && m21 == 0.0 && m22 == 0.0;
}

double op_norm(const Mat2& m) {
    // stable real 2x2 singular values: sigma_max = Q + R with
    // Q = |(E, H)|, R = |(F, G)| in the rotation split of m
    double E = 0.5 * (m.m11 + m.m22), F = 0.5 * (m.m11 - m.m22);
    double G = 0.5 * (m.m12 + m.m21), H = 0.5 * (m.m21 - m.m12);
    return std::hypot(E, H) + std::hypot(F, G);
}

double op_norm(const Mat2c& m) {
    double frob2 = std::norm(m.m11) + std::norm(m.m12) + std::norm(m.m21) + std::norm(m.m22);
    return std::sqrt(lambda_max_gram(frob2, std::abs(m.det())));
}

double sigma_max(const Mat2& m) { return op_norm(m); }

double sigma_min(const Mat2& m) {
    double E = 0.5 * (m.m11 + m.m22), F = 0.5 * (m.m11 - m.m22);
    double G = 0.5 * (m.m12 + m.m21), H = 0.5 * (m.m21 - m.m12);
    return std::abs(std::hypot(E, H) - std::hypot(F, G));
}

double elliptic_rotation_number(const Mat2& A) {
    double n = op_norm(A);
    if (std::abs(A.trace()) > 1e-9 * (1.0 + n))
        throw std::invalid_argument("elliptic_rotation_number: matrix is not traceless");
    double d = A.det();
    if (d <= 1e-14 * n * n)
        throw NotElliptic("elliptic_rotation_number: spectrum is not purely imaginary (det <= 0)");
    return std::sqrt(d);
}

namespace {

// Symmetric positive definite conjugator for a positively oriented elliptic
// A = [[a,b],[c,-a]]: S = (1/alpha) [[-c, a],[a, b]] has det S = 1 and
// S A + A^T S = 0, so P = S^{1/2} maps A to alpha J with det P = 1.
Mat2 symmetric_conjugator(const Mat2& A, double alpha) {
    Mat2 S{-A.m21 / alpha, A.m11 / alpha, A.m11 / alpha, A.m12 / alpha};
    // sqrt of an spd 2x2 with det 1: (S + I) / sqrt(tr S + 2)
    double s = 1.0 / std::sqrt(S.trace() + 2.0);
    Mat2 P{(S.m11 + 1.0) * s, S.m12 * s, S.m21 * s, (S.m22 + 1.0) * s};
    // pin det P = 1 to rounding level
    P = P * (1.0 / std::sqrt(P.det()));
    return P;
}

void check_conjugation(const Mat2& P, const Mat2& A, const Mat2& P_inv,
                       double target, const char* who) {
    Mat2 J = Mat2::rotation_generator();
    Mat2 res = P * A * P_inv - J * target;
    if (op_norm(res) > 1e-10 * (1.0 + op_norm(A)))
        throw std::runtime_error(std::string(who) + ": conjugation residual too large");
}

} // namespace

EllipticNormalForm real_normal_form(const Mat2& A) {
    double alpha = elliptic_rotation_number(A);
    if (A.m12 <= 0)
        throw NotElliptic("real_normal_form: negatively oriented elliptic matrix "
                          "(SL(2,R)-conjugate to -alpha J, not +alpha J)");
    EllipticNormalForm nf;
    nf.alpha = alpha;
    nf.P = symmetric_conjugator(A, alpha);
    nf.P_inv = {nf.P.m22, -nf.P.m12, -nf.P.m21, nf.P.m11}; // det P = 1
    check_conjugation(nf.P, A, nf.P_inv, alpha, "real_normal_form");
    nf.Q = complex_structure_matrix() * Mat2c(nf.P);
    nf.Q_inv = Mat2c(nf.P_inv) * complex_structure_matrix_inv();
    return nf;
}

PerturbedNormalForm perturbed_normal_form(double alpha, const Mat2& B) {
    if (!(alpha > 0))
        throw std::invalid_argument("perturbed_normal_form: alpha must be positive");
    double nb = op_norm(B);
    if (std::abs(B.trace()) > 1e-9 * (1.0 + nb))
        throw std::invalid_argument("perturbed_normal_form: perturbation is not traceless");
    if (nb > alpha / 4.0 * (1.0 + 1e-12))
        throw std::invalid_argument("perturbed_normal_form: |B| > alpha/4, caller must shrink the step");

    Mat2 A = Mat2::rotation_generator() * alpha + B;
    double beta = std::sqrt(A.det()); // elliptic for |B| <= alpha/4
    PerturbedNormalForm out;
    out.beta = beta;

    Mat2 P0 = symmetric_conjugator(A, beta);
    // Scale so sigma_min(P) = 1: for det P0 = 1 the singular values are
    // {s, 1/s}; multiplying by s = op_norm(P0) gives {s^2, 1}.  P_inv is
    // normalized by its own computed norm so |P^{-1}| = 1 to rounding.
    Mat2 P0_inv{P0.m22, -P0.m12, -P0.m21, P0.m11};
    double s = op_norm(P0_inv); // = op_norm(P0), det 1
    out.P_inv = P0_inv * (1.0 / s);
    out.P = P0 * s;

    if (!(beta >= alpha / 2.0 * (1.0 - 1e-12) && beta <= 1.5 * alpha * (1.0 + 1e-12)))
        throw std::runtime_error("perturbed_normal_form: beta left [alpha/2, 3 alpha/2]");
    if (op_norm(out.P) > 4.0 * (1.0 + 1e-12))
        throw std::runtime_error("perturbed_normal_form: |P| > 4");
    check_conjugation(out.P, A, out.P_inv, beta, "perturbed_normal_form");
    return out;
}

namespace {

Mat2c build_structure_matrix() {
    cplx f = 1.0 / cplx(1.0, -1.0); // 1/(1-i)
    cplx i(0.0, 1.0);
    Mat2c M{f, -i * f, f, i * f};
    // self-check: M J M^{-1} = i R with R = diag(1,-1)
    Mat2c J(Mat2::rotation_generator());
    Mat2c res = M * J * M.inverse() - Mat2c{i, 0, 0, -i};
    if (op_norm(res) > 1e-14)
        throw std::logic_error("complex_structure_matrix: M J M^{-1} != i R");
    return M;
}

} // namespace

const Mat2c& complex_structure_matrix() {
    static const Mat2c M = build_structure_matrix();
    return M;
}

const Mat2c& complex_structure_matrix_inv() {
    static const Mat2c Minv = complex_structure_matrix().inverse();
    return Minv;
}

} // namespace kamred
