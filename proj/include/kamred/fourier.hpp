#pragma once

#include "kamred/arithmetic.hpp"
#include "kamred/mat2.hpp"
#include "kamred/weights.hpp"

#include <iosfwd>
#include <map>
#include <span>
#include <vector>

namespace kamred {

using MultiIndex = std::vector<int>;

int l1_norm(const MultiIndex& k);
bool is_zero_index(const MultiIndex& k);
MultiIndex negate(const MultiIndex& k);

/// Finitely supported Fourier series on T^d with 2x2 complex matrix
/// coefficients.  When real_symmetric is set, the coefficient at -k is the
/// complex conjugate of the coefficient at k and evaluation is real.
///
/// tail_bound accumulates the exact weighted mass dropped by compress();
/// it only grows, and stays a valid upper bound for norms evaluated at any
/// radius not exceeding the compression radius (radii only shrink along a
/// KAM run).
class FourierMatrixSeries {
public:
    FourierMatrixSeries() = default;
    explicit FourierMatrixSeries(int d, bool real_symmetric = false);

    static FourierMatrixSeries constant(int d, const Mat2& A);
    static FourierMatrixSeries constant(int d, const Mat2c& A, bool real_symmetric = false);
    static FourierMatrixSeries identity(int d);

    int dim() const { return d_; }
    bool real_symmetric() const { return real_symmetric_; }
    void set_real_symmetric(bool rs) { real_symmetric_ = rs; }

    double tail_bound() const { return tail_bound_; }
    void add_tail_mass(double m);

    const std::map<MultiIndex, Mat2c>& coefficients() const { return coeffs_; }
    std::size_t support_size() const { return coeffs_.size(); }
    int max_order() const; // max |k|_1 over the support, 0 when empty

    Mat2c coefficient(const MultiIndex& k) const;
    void set_coefficient(const MultiIndex& k, const Mat2c& value);
    void add_to_coefficient(const MultiIndex& k, const Mat2c& value);
    /// Sets the pair f^(k) = value, f^(-k) = conj(value).
    void set_real_pair(const MultiIndex& k, const Mat2c& value);

    Mat2c average() const;

    Mat2c evaluate(std::span<const double> theta) const;
    /// Evaluation of a real-symmetric series; throws if the imaginary part
    /// exceeds tol relative to the value.
    Mat2 evaluate_real(std::span<const double> theta, double tol = 1e-12) const;

    /// Sum of coefficient operator norms (the weighted norm at r -> 0+,
    /// k = 0 included), excluding tail_bound.
    double coefficient_l1() const;

    /// Verifies the conjugate symmetry claimed by the flag.
    void check_real_symmetry(double tol = 1e-12) const;

private:
    int d_ = 0;
    bool real_symmetric_ = false;
    double tail_bound_ = 0;
    std::map<MultiIndex, Mat2c> coeffs_;
};

/// Weighted norm sum_k |f^(k)| e^{2 pi Lambda(|k|) r} + tail_bound, with the
/// operator norm on coefficients and weight 1 at k = 0 (Lambda is only
/// defined on [1, inf); weight 1 makes the constant identity the unit of the
/// algebra).  r <= 0 is a domain error.
double weighted_norm(const FourierMatrixSeries& f, const WeightSpec& w, double r);

/// Sup-norm estimate |f|_0 = max_theta |f(theta)| over a uniform grid.
double sup_norm(const FourierMatrixSeries& f, int samples_per_dim = 48);

FourierMatrixSeries add(const FourierMatrixSeries& f, const FourierMatrixSeries& g);
FourierMatrixSeries subtract(const FourierMatrixSeries& f, const FourierMatrixSeries& g);
FourierMatrixSeries scale(const FourierMatrixSeries& f, double s);
FourierMatrixSeries scale(const FourierMatrixSeries& f, cplx s);

/// Matrix-product convolution (fg)^(k) = sum_{m+n=k} f^(m) g^(n).
FourierMatrixSeries multiply(const FourierMatrixSeries& f, const FourierMatrixSeries& g);

/// Constant conjugation P f P^{-1} (coefficient-wise).
FourierMatrixSeries conjugate_constant(const Mat2& P, const FourierMatrixSeries& f, const Mat2& P_inv);
FourierMatrixSeries left_multiply(const Mat2& P, const FourierMatrixSeries& f);
FourierMatrixSeries right_multiply(const FourierMatrixSeries& f, const Mat2& P);

/// Truncation T_N (keep |k| <= N); dotted = Ṫ_N additionally drops k = 0.
FourierMatrixSeries truncate(const FourierMatrixSeries& f, double N, bool dotted);

/// Directional derivative along the translation flow:
/// coefficient at k becomes 2 pi i (k.omega) f^(k); the mean is dropped.
FourierMatrixSeries directional_derivative(const FourierMatrixSeries& f, const Frequency& freq);

/// Drops coefficients whose weighted contribution at radius r is below
/// rel_tol times the series norm, adding the exact dropped mass to
/// tail_bound.
FourierMatrixSeries compress(const FourierMatrixSeries& f, const WeightSpec& w, double r,
                             double rel_tol = 1e-16);

std::pair<Mat2c, double> average_and_trace(const FourierMatrixSeries& f);

/// Text format: a header (d, real_symmetric, tail_bound, count), then one
/// record per coefficient: k1 ... kd re11 im11 re12 im12 re21 im21 re22 im22.
void write_series(std::ostream& out, const FourierMatrixSeries& f);
FourierMatrixSeries read_series(std::istream& in);
void write_series_file(const std::string& path, const FourierMatrixSeries& f);
FourierMatrixSeries read_series_file(const std::string& path);

} // namespace kamred
