#pragma once

#include "kamred/arithmetic.hpp"
#include "kamred/fourier.hpp"
#include "kamred/mat2.hpp"
#include "kamred/rotation.hpp"
#include "kamred/weights.hpp"

#include <optional>
#include <string>
#include <vector>

namespace kamred {

struct ScheduleError : std::runtime_error {
    ScheduleError(std::string msg, double max_eps = 0)
        : std::runtime_error(std::move(msg)), max_admissible_eps(max_eps) {}
    double max_admissible_eps;
};

struct ConditionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Iteration parameters:
///   eps_nu = 4^{-nu} eps,  N_nu = Psi^{-1}(2^nu Psi(N0)),
///   sigma_nu = 3 ln 2 / (pi Lambda(N_nu)),  r_{nu+1} = r_nu - sigma_nu,
/// with N0 the smallest tabulated integer whose Lambda-BR tail integral is
/// at most pi r / 6 and the thresholds eps <= alpha/4, 2^8 Psi(N0) eps <= 1.
struct KamSchedule {
    double r = 0, eps = 0, alpha = 0;
    int max_steps = 0;
    double N0 = 0;
    double psi_N0 = 0;
    double tail_integral = 0;      // Lambda-BR tail from N0 over the table
    double max_admissible_eps = 0; // min(alpha/4, 2^{-8}/Psi(N0))
    double sum_sigma = 0;
    std::vector<double> N, sigma, eps_nu, psiN; // index nu in [0, max_steps)
    std::vector<double> radii;                  // index nu in [0, max_steps]
};

/// Lambda-BR tail integral int_N^{Kmax} Lambda' ln Psi / Lambda^2 over the
/// tabulated range.
double lambda_br_tail(double N, const WeightSpec& w, const PsiFunction& psi);

/// Upper bound on sum_nu sigma_nu for a schedule started at cutoff N,
/// through the equivalent integral int_N Psi'/(Psi Lambda).
double sigma_sum_bound(double N, const WeightSpec& w, const PsiFunction& psi);

/// Smallest integer N0 <= Kmax/2 with lambda_br_tail(N0) <= pi r / 6 and
/// sigma_sum_bound(N0) <= r/2; throws ConditionError when no such cutoff
/// exists on the table.
double choose_initial_cutoff(double r, const WeightSpec& w, const PsiFunction& psi);

KamSchedule build_schedule(double r, double eps, double alpha, const WeightSpec& w,
                           const PsiFunction& psi, int max_steps = 12);

/// Verifies |2 alpha +/- 2 pi k.omega| > 1/(2 Psi(N)) for 0 < |k| <= N by
/// enumeration (the hypothesis the cohomological solver relies on).
struct SmallDivisorReport {
    bool ok = true;
    double worst = 0; // min over k of |2 alpha +/- 2 pi k.omega| - 1/(2 Psi(N))
    std::vector<int> witness;
    int sign = +1;
};
SmallDivisorReport small_divisor_guard(double alpha_nu, const Frequency& freq,
                                       const PsiFunction& psi, double N);

struct SmallDivisorError : std::runtime_error {
    SmallDivisorError(std::string msg, std::vector<int> k)
        : std::runtime_error(std::move(msg)), witness(std::move(k)) {}
    std::vector<int> witness;
};

/// Solves the approximate cohomological equation
///   d_omega X = [alpha J, X] + G
/// exactly in coefficients for zero-mean G supported in 0 < |k| <= N.
/// Per mode, in the complex frame i alpha R the divisors are
/// 2 pi i k.omega and 2 pi i k.omega -/+ 2 i alpha; a divisor below
/// 1/(2 psiN) raises SmallDivisorError.  Guarantees tr<X> = 0 and
/// |X|_r <= 2 psiN |G|_r.
FourierMatrixSeries solve_cohomological(double alpha, const FourierMatrixSeries& G,
                                        const Frequency& freq, double N, double psiN);

struct BoundCheck {
    std::string name;
    double claimed = 0;
    double measured = 0;
    bool pass = true;
};

struct StepDiagnostics {
    int nu = 0;
    double alpha_in = 0, alpha_out = 0;
    double r_in = 0, r_out = 0;
    double N = 0, sigma = 0, psiN = 0;
    double eps_budget = 0;
    double F_norm = 0, G_norm = 0, X_norm = 0, R_norm = 0, F_next_norm = 0;
    double Y_dev = 0;       // |Y_nu - I|_{r_nu}
    double contraction = 0; // F_next_norm / F_norm (0 when F_norm = 0)
    double trace_mean = 0;  // |tr <F_{nu+1}>|
    // Full-range small-divisor guard (all |k| <= N).  Advisory: with the
    // exact Psi table the rho-condition behind it is void for generic alpha;
    // the gating check is the divisor floor on the support of G.
    bool guard_ok = true;
    std::vector<BoundCheck> checks;
    bool all_pass() const; // every entry of checks (guard_ok not included)
};

struct StepFailure : std::runtime_error {
    StepFailure(std::string msg, StepDiagnostics d)
        : std::runtime_error(std::move(msg)), diag(std::move(d)) {}
    StepDiagnostics diag;
};

struct KamState {
    int nu = 0;
    double alpha = 0; // A_nu = alpha J
    double r = 0;
    double rho = 0; // target fibered rotation number (diagnostic)
    FourierMatrixSeries F;
    FourierMatrixSeries Y_accum;     // product of the Y_mu so far
    FourierMatrixSeries Y_inv_accum; // product of the inverses, reversed
};

struct StepResult {
    KamState state;
    FourierMatrixSeries Y_nu;
    StepDiagnostics diag;
};

/// One iteration: G = Ṫ_N F, X from the cohomological solver, Z = I + X,
/// R = (I+X)^{-1} [ (F - F^(0) - G) + F X - X F^(0) ],
/// (alpha', P) from the perturbed normal form of alpha J + F^(0), and
///   A' = alpha' J,  F' = P R P^{-1},  Y_nu = Z P^{-1}.
/// Every inequality used by the scheme is measured and recorded; a
/// violation beyond tolerance raises StepFailure with the diagnostics.
StepResult iteration_step(const KamState& state, const KamSchedule& sched,
                          const Frequency& freq, const PsiFunction& psi,
                          const WeightSpec& w);

struct ResidualReport {
    double weighted = 0; // |d_omega Y - (A+F) Y + Y B|_{r_eval}
    double grid_max = 0; // max pointwise residual over random theta
};

/// Independent verification of the conjugacy equation, built from fourier
/// primitives only.
ResidualReport conjugacy_residual(const FourierMatrixSeries& Y, const CocycleSpec& c,
                                  const Mat2& B, double r_eval, const WeightSpec& w,
                                  int grid_points = 100, unsigned seed = 12345);

struct RhoPrecheck {
    bool ran = false;
    double rho_estimate = 0;
    double error_indicator = 0;
    bool condition_ok = false;
    double worst_margin = 0;
    int checked_K = 0;
};

struct ReducibilityReport {
    bool converged = false;
    std::string failure; // empty on success
    KamSchedule schedule;
    std::vector<StepDiagnostics> steps;
    Mat2 A_inf;
    FourierMatrixSeries Y;     // conjugacy in the original frame
    FourierMatrixSeries Y_inv;
    double Y_norm = 0, Y_inv_norm = 0, Y_minus_I_norm = 0; // at r/2
    ResidualReport residual;
    double residual_tol = 0;
    std::vector<BoundCheck> global_checks;
    RhoPrecheck rho_precheck;
    double initial_eps = 0;       // |F_0|_r after the frame normalization
    double frame_norm_product = 0; // |P_0| |P_0^{-1}| of the initial reduction
};

struct ReduceOptions {
    int max_steps = 12;
    double residual_tol = 1e-6;
    double stop_floor = 1e-14; // stop once |F_nu| falls below this
    bool rho_precheck = true;
    double precheck_horizon = 2000.0;
    double precheck_step = 0.02;
    int precheck_K = 30;
    double compress_tol = 1e-17;
    unsigned seed = 12345;
};

/// Full KAM reduction driver.  Schedule or step failures and residuals
/// above tolerance yield converged = false with diagnostics, never silence.
ReducibilityReport reduce(const CocycleSpec& c, const PsiFunction& psi,
                          const WeightSpec& w, const ReduceOptions& opts = {});

inline ReducibilityReport reduce(const CocycleSpec& c, const PsiFunction& psi,
                                 const WeightSpec& w, int max_steps, double residual_tol) {
    ReduceOptions o;
    o.max_steps = max_steps;
    o.residual_tol = residual_tol;
    return reduce(c, psi, w, o);
}

} // namespace kamred
