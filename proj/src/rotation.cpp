#include "kamred/rotation.hpp"

#include <cmath>
#include <sstream>

namespace kamred {

Mat2 CocycleSpec::matrix_at(std::span<const double> theta) const {
    if (F.support_size() == 0)
        return A;
    return A + F.evaluate_real(theta);
}

Mat2 CocycleSpec::matrix_at_time(double t) const {
    std::vector<double> theta(freq.omega.size());
    for (std::size_t i = 0; i < theta.size(); ++i) {
        double x = t * freq.omega[i];
        theta[i] = x - std::floor(x);
    }
    return matrix_at(theta);
}

void CocycleSpec::validate(double tol) const {
    if (freq.dim() != F.dim())
        throw std::invalid_argument("CocycleSpec: frequency/series dimension mismatch");
    if (!F.real_symmetric() && F.support_size() > 0)
        throw std::invalid_argument("CocycleSpec: perturbation must be real-symmetric");
    F.check_real_symmetry();
    for (int s = 0; s < 16; ++s) {
        Mat2 m = matrix_at_time(0.37 * s + 0.11);
        if (std::abs(m.trace()) > tol * (1.0 + op_norm(m)))
            throw std::invalid_argument("CocycleSpec: evaluated matrix is not traceless");
    }
}

namespace {

double angle_rhs(const CocycleSpec& c, double t, double phi) {
    Mat2 m = c.matrix_at_time(t);
    double a = m.m11, b = m.m12, cc = m.m21;
    double cs = std::cos(phi), sn = std::sin(phi);
    return 2.0 * a * cs * sn - (b + cc) * cs * cs + b;
}

void check_step(const CocycleSpec& c, double horizon, double step) {
    if (!(horizon > 0))
        throw std::invalid_argument("rotation: horizon must be positive");
    double scale = op_norm(c.A) + sup_norm(c.F);
    if (!(step > 0) || step * scale > 0.1 * (1.0 + 1e-12))
        throw std::invalid_argument("rotation: step too large, need step*(|A|+|F|_0) <= 0.1");
}

} // namespace

RotationEstimate fibered_rotation_number(const CocycleSpec& c, double horizon, double step) {
    check_step(c, horizon, step);
    long long n = static_cast<long long>(std::ceil(horizon / step));
    if (n % 2)
        ++n; // capture phi at T/2 on a grid point
    double h = horizon / static_cast<double>(n);

    double phi = 0.0, phi_half = 0.0;
    for (long long i = 0; i < n; ++i) {
        double t = h * static_cast<double>(i);
        double k1 = angle_rhs(c, t, phi);
        double k2 = angle_rhs(c, t + 0.5 * h, phi + 0.5 * h * k1);
        double k3 = angle_rhs(c, t + 0.5 * h, phi + 0.5 * h * k2);
        double k4 = angle_rhs(c, t + h, phi + h * k3);
        phi += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (i + 1 == n / 2)
            phi_half = phi;
    }

    RotationEstimate est;
    est.horizon = horizon;
    est.estimate_full = phi / horizon;
    est.estimate_half = phi_half / (0.5 * horizon);
    // finite-horizon error is O(1/T); the two-point Richardson step removes it
    est.value = 2.0 * est.estimate_full - est.estimate_half;
    est.error_indicator = std::abs(est.estimate_full - est.estimate_half);
    return est;
}

double lyapunov_exponent(const CocycleSpec& c, double horizon, double step,
                         double renorm_interval) {
    check_step(c, horizon, step);
    long long n = static_cast<long long>(std::ceil(horizon / step));
    double h = horizon / static_cast<double>(n);
    long long per_block = std::max<long long>(1, static_cast<long long>(std::round(renorm_interval / h)));

    Mat2 X = Mat2::identity();
    double log_sum = 0.0;
    auto rhs = [&](double t, const Mat2& Y) { return c.matrix_at_time(t) * Y; };

    for (long long i = 0; i < n; ++i) {
        double t = h * static_cast<double>(i);
        Mat2 k1 = rhs(t, X);
        Mat2 k2 = rhs(t + 0.5 * h, X + k1 * (0.5 * h));
        Mat2 k3 = rhs(t + 0.5 * h, X + k2 * (0.5 * h));
        Mat2 k4 = rhs(t + h, X + k3 * h);
        X = X + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);

        double big = std::max(std::max(std::abs(X.m11), std::abs(X.m12)),
                              std::max(std::abs(X.m21), std::abs(X.m22)));
        if (!std::isfinite(big) || big > 1e120) {
            std::ostringstream msg;
            msg << "lyapunov_exponent: overflow before renormalization at t = " << t
                << " (max entry " << big << "); shorten the renormalization interval";
            throw std::runtime_error(msg.str());
        }

        if ((i + 1) % per_block == 0 || i + 1 == n) {
            // QR step: orthonormalize columns, accumulate the leading stretch
            double r11 = std::hypot(X.m11, X.m21);
            if (r11 < 1e-300)
                throw std::runtime_error("lyapunov_exponent: degenerate frame");
            double q1x = X.m11 / r11, q1y = X.m21 / r11;
            double r12 = q1x * X.m12 + q1y * X.m22;
            double v2x = X.m12 - r12 * q1x, v2y = X.m22 - r12 * q1y;
            double r22 = std::hypot(v2x, v2y);
            log_sum += std::log(r11);
            if (r22 < 1e-300)
                r22 = 1e-300;
            X = Mat2{q1x, v2x / r22, q1y, v2y / r22};
        }
    }
    return log_sum / horizon;
}

} // namespace kamred
