#pragma once

#include "kamred/arithmetic.hpp"
#include "kamred/fourier.hpp"
#include "kamred/mat2.hpp"

namespace kamred {

/// Quasi-periodic cocycle x' = (A + F(t omega)) x with A constant traceless
/// and F a real-symmetric matrix series measured at radius r.
struct CocycleSpec {
    Frequency freq;
    Mat2 A;
    FourierMatrixSeries F;
    double r = 0;

    Mat2 matrix_at(std::span<const double> theta) const;
    Mat2 matrix_at_time(double t) const;
    /// Checks trace(A + F(theta)) = 0 on sample points and the conjugate
    /// symmetry of F.
    void validate(double tol = 1e-12) const;
};

/// Estimate of the fibered rotation number from the projected angle flow.
/// `value` is the Richardson-extrapolated estimate across horizons T and
/// T/2; error_indicator is the difference of the two raw averages.
struct RotationEstimate {
    double value = 0;
    double horizon = 0;
    double error_indicator = 0;
    double estimate_full = 0; // phi(T)/T
    double estimate_half = 0; // phi(T/2)/(T/2)
};

/// Integrates the angle equation
///   phi' = 2 a cos phi sin phi - (b + c) cos^2 phi + b
/// for M = [[a, b],[c, -a]] = A + F(t omega) with RK4 from phi(0) = 0.
/// Requires step * (|A| + |F|_0) <= 0.1.
RotationEstimate fibered_rotation_number(const CocycleSpec& c, double horizon, double step);

/// Maximal Lyapunov exponent of the matrix flow x' = (A + F(t omega)) x,
/// computed with QR renormalization every renorm_interval time units.
/// An overflow before a renormalization point raises an error.
double lyapunov_exponent(const CocycleSpec& c, double horizon, double step,
                         double renorm_interval = 10.0);

} // namespace kamred
