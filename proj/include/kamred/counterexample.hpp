#pragma once

#include "kamred/arithmetic.hpp"
#include "kamred/fourier.hpp"
#include "kamred/rotation.hpp"
#include "kamred/weights.hpp"

#include <map>
#include <string>
#include <vector>

namespace kamred {

/// Scalar real trigonometric series (finitely supported, conjugate
/// symmetric coefficients).
struct ScalarSeries {
    int d = 0;
    std::map<MultiIndex, cplx> coeffs;

    cplx coefficient(const MultiIndex& k) const;
    void set_real_pair(const MultiIndex& k, cplx value);
    double average_real() const;
    double evaluate_real(std::span<const double> theta, double tol = 1e-10) const;
    double weighted_norm_minus_mean(const WeightSpec& w, double r) const;
};

/// Modes along which the cohomological equation degenerates:
/// |2 pi k_j.omega| <= e^{-3 pi r Lambda(|k_j|)} with |k_j| strictly
/// increasing, and C = sum_j e^{-pi r Lambda(|k_j|)}.
struct ResonanceChain {
    double r = 0;
    std::vector<MultiIndex> modes;
    std::vector<double> divisors; // signed 2 pi k_j.omega
    std::vector<double> margins;  // e^{-3 pi r Lambda(|k_j|)} - |2 pi k_j.omega| >= 0
    double C = 0;
    double limsup_estimate = 0; // observed sup of ln Psi / Lambda over the table tail
};

struct InsufficientResonances : std::runtime_error {
    InsufficientResonances(std::string msg, int found_, int requested_)
        : std::runtime_error(std::move(msg)), found(found_), requested(requested_) {}
    int found, requested;
};

struct ResonanceOptions {
    double slack = 0.5;                  // r = slack * limsup / (3 pi)
    double decay_slope_threshold = -0.25; // tail slope of ln(ratio) vs ln K below
                                          // this means the Russmann condition holds
};

/// Scans the Psi-table witnesses for a chain of `count` resonant modes.
/// When the ratio ln Psi / Lambda decays along the table (the necessary
/// condition holds) no positive radius admits a chain and
/// InsufficientResonances reports zero found.
ResonanceChain find_resonances(const Frequency& freq, const WeightSpec& w,
                               const PsiFunction& psi, int count,
                               const ResonanceOptions& opts = {});

/// The non-reducibility construction: u with mean rho, u^(+/- k_j) =
/// eps C^{-1} 2 pi k_j.omega, and the cocycle A = rho J, F = (u - rho) J.
/// |u - rho|_r <= eps is measured and enforced (the chain margins make it
/// hold for the slack default).
struct CounterexampleCocycle {
    ScalarSeries u;
    CocycleSpec cocycle;
    double rho = 0, eps = 0;
    double u_minus_rho_norm = 0; // |u - rho|_r, measured
};

CounterexampleCocycle build_counterexample(const ResonanceChain& chain, double rho, double eps,
                                           const WeightSpec& w, const Frequency& freq);

/// Evidence that omega . grad v = u - rho has no continuous solution: the
/// formal coefficients v^(k_j) = u^(k_j) / (2 pi i k_j.omega) all have the
/// same magnitude eps/C, so they cannot be Fourier coefficients of any
/// continuous (or integrable) function.
struct NonsolvabilityEvidence {
    bool solvable = false;            // true only for the degenerate u == rho
    double expected_magnitude = 0;    // eps / C
    std::vector<double> v_hat_magnitudes;
    double max_magnitude_deviation = 0;
    std::vector<double> l1_partial;   // sum_{j<=J} |v^(k_j)|, linear in J
    std::vector<double> sup_partial;  // grid sup of the partial sums
    bool coefficients_vanish_at_infinity = true;
    std::string kam_failure;          // diagnostic from feeding the cocycle to reduce
};

NonsolvabilityEvidence certify_nonsolvability(const ScalarSeries& u, const Frequency& freq,
                                              const ResonanceChain& chain);

} // namespace kamred
