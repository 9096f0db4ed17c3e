#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "kamred/kam.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace kamred;

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;
const Mat2 J = Mat2::rotation_generator();
const double phi = 0.5 * (1.0 + std::sqrt(5.0));

// three-mode real trig perturbation used across the KAM tests
FourierMatrixSeries three_mode_perturbation(double scale) {
    FourierMatrixSeries F(2, true);
    F.set_real_pair({1, 0}, Mat2c(Mat2{0, 1, -1, 0}) * (0.5 * scale));
    F.set_real_pair({0, 1}, Mat2c(Mat2{1, 0.5, 0.5, -1}) * (0.35 * scale));
    F.set_real_pair({1, -1}, Mat2c(Mat2{0, 1, 1, 0}) * (0.4 * scale));
    return F;
}

} // namespace

TEST_CASE("schedule identities and thresholds") {
    WeightSpec an = WeightSpec::analytic();
    PsiFunction psi = estimate_psi(golden_frequency(), 2000);
    double r = 0.2, alpha = 1.0;

    double N0 = choose_initial_cutoff(r, an, psi);
    CHECK(lambda_br_tail(N0, an, psi) <= std::numbers::pi * r / 6.0);
    if (N0 > 1)
        CHECK(lambda_br_tail(N0 - 1, an, psi) > std::numbers::pi * r / 6.0);

    double max_eps = std::min(alpha / 4.0, std::pow(2.0, -8) / psi.value_at(N0));
    KamSchedule s = build_schedule(r, 0.9 * max_eps, alpha, an, psi, 6);

    SUBCASE("Psi(N_nu) eps_nu halves every step") {
        for (int nu = 0; nu < 6; ++nu) {
            double lhs = s.psiN[nu] * s.eps_nu[nu];
            double rhs = std::ldexp(s.psi_N0 * s.eps, -nu);
            CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
        }
        CHECK(s.psiN[1] * s.eps_nu[1] / (s.psiN[0] * s.eps_nu[0]) == doctest::Approx(0.5).epsilon(1e-12));
    }
    SUBCASE("2^6 e^{-2 pi Lambda(N) sigma} = 1 and the analytic sigma formula") {
        for (int nu = 0; nu < 6; ++nu) {
            double q = 64.0 * std::exp(-two_pi * an.value(s.N[nu]) * s.sigma[nu]);
            CHECK(q == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(s.sigma[nu] == doctest::Approx(3.0 * std::numbers::ln2 / (std::numbers::pi * s.N[nu]))
                                     .epsilon(1e-14));
        }
        // reference value of the sigma formula at Lambda(N) = 100
        double sigma100 = 3.0 * std::numbers::ln2 / (std::numbers::pi * 100.0);
        CHECK(sigma100 == doctest::Approx(0.00661904).epsilon(1e-5));
    }
    SUBCASE("radii stay above r/2") {
        CHECK(s.sum_sigma <= r / 2.0);
        for (double rn : s.radii)
            CHECK(rn >= r / 2.0 - 1e-12);
    }
    SUBCASE("threshold errors report the admissible size") {
        CHECK_THROWS_AS(build_schedule(r, alpha, alpha, an, psi, 4), ScheduleError); // eps > alpha/4
        try {
            build_schedule(r, 10.0 * max_eps, alpha, an, psi, 4);
            FAIL("expected a schedule error");
        } catch (const ScheduleError& e) {
            CHECK(e.max_admissible_eps == doctest::Approx(max_eps));
        }
    }
    SUBCASE("table exhaustion is refused loudly") {
        CHECK_THROWS_AS(build_schedule(r, 0.9 * max_eps, alpha, an, psi, 12), ScheduleError);
    }
}

TEST_CASE("schedule condition error when the tail never gets small") {
    // weak tabulated weight against a Liouville-flavoured table would be the
    // real case; a tiny radius forces the same refusal cheaply
    WeightSpec an = WeightSpec::analytic();
    PsiFunction psi = estimate_psi(golden_frequency(), 40);
    CHECK_THROWS_AS(choose_initial_cutoff(1e-4, an, psi), ConditionError);
}

TEST_CASE("small divisor guard") {
    PsiFunction psi = estimate_psi(golden_frequency(), 60);
    Frequency f = golden_frequency();
    SUBCASE("alpha = 1 clears the guard at moderate order") {
        SmallDivisorReport rep = small_divisor_guard(1.0, f, psi, 10.0);
        CHECK(rep.ok);
        CHECK(rep.worst > 0.0);
    }
    SUBCASE("a generic alpha eventually loses to the exact table") {
        // |2 - 2 pi k.omega| dips under 1/(2 Psi(N)) once k = (10,-6) enters;
        // this is why the full-range guard is advisory inside the iteration
        SmallDivisorReport rep = small_divisor_guard(1.0, f, psi, 16.0);
        CHECK_FALSE(rep.ok);
        CHECK(rep.witness == std::vector<int>{10, -6});
    }
    SUBCASE("exact violation names the witness") {
        double alpha = std::numbers::pi * (2.0 * f.omega[0] - 1.0 * f.omega[1]);
        SmallDivisorReport rep = small_divisor_guard(alpha, f, psi, 10.0);
        CHECK_FALSE(rep.ok);
        CHECK(rep.witness == std::vector<int>{2, -1});
    }
}

TEST_CASE("cohomological solver") {
    Frequency f = golden_frequency();
    PsiFunction psi = estimate_psi(f, 30);
    double alpha = 1.0;

    SUBCASE("zero input") {
        FourierMatrixSeries G(2, true);
        CHECK(solve_cohomological(alpha, G, f, 10.0, psi.value_at(10.0)).support_size() == 0);
    }
    SUBCASE("commutant mode in closed form") {
        FourierMatrixSeries G(2, true);
        G.set_coefficient({1, -1}, Mat2c(J) * 0.01);
        G.set_coefficient({-1, 1}, Mat2c(J) * 0.01);
        FourierMatrixSeries X = solve_cohomological(alpha, G, f, 5.0, psi.value_at(5.0));
        double dot = f.omega[0] - f.omega[1]; // 1 - phi
        double expect = 0.01 / (two_pi * std::abs(dot));
        CHECK(op_norm(X.coefficient({1, -1})) == doctest::Approx(expect).epsilon(1e-12));
        CHECK(expect == doctest::Approx(0.0025752).epsilon(1e-4));
        CHECK(std::abs(phi - 1.0) == doctest::Approx(std::abs(dot)).epsilon(1e-15));
    }
    SUBCASE("mode-by-mode residual and the norm bound") {
        std::mt19937_64 rng(4);
        std::uniform_real_distribution<double> unif(-1.0, 1.0);
        WeightSpec an = WeightSpec::analytic();
        for (int trial = 0; trial < 50; ++trial) {
            FourierMatrixSeries G(2, true);
            for (int m = 0; m < 5; ++m) {
                int k1 = static_cast<int>(std::round(unif(rng) * 4));
                int k2 = static_cast<int>(std::round(unif(rng) * 4));
                if (k1 == 0 && k2 == 0)
                    k1 = 1;
                if (std::abs(k1) + std::abs(k2) > 8)
                    continue;
                Mat2c c{cplx(unif(rng), unif(rng)), cplx(unif(rng), unif(rng)),
                        cplx(unif(rng), unif(rng)), cplx(unif(rng), unif(rng))};
                G.set_real_pair({k1, k2}, c * 0.01);
            }
            double psiN = psi.value_at(10.0);
            FourierMatrixSeries X = solve_cohomological(alpha, G, f, 10.0, psiN);
            // substitute back: 2 pi i (k.w) X^ - [alpha J, X^] - G^ = 0
            Mat2c A(J * alpha);
            for (const auto& [k, gk] : G.coefficients()) {
                double dot = k[0] * f.omega[0] + k[1] * f.omega[1];
                Mat2c xk = X.coefficient(k);
                Mat2c res = xk * cplx(0, two_pi * dot) - (A * xk - xk * A) - gk;
                CHECK(op_norm(res) <= 1e-12 * op_norm(gk));
            }
            double r = 0.15;
            CHECK(weighted_norm(X, an, r) <= 2.0 * psiN * weighted_norm(G, an, r) + 1e-15);
            CHECK(op_norm(X.average()) == 0.0);
        }
    }
    SUBCASE("input validation") {
        FourierMatrixSeries G(2, true);
        G.set_coefficient({0, 0}, Mat2c(J));
        CHECK_THROWS_AS(solve_cohomological(alpha, G, f, 5.0, 10.0), std::invalid_argument);
    }
}

TEST_CASE("iteration step") {
    WeightSpec an = WeightSpec::analytic();
    Frequency f = golden_frequency();
    PsiFunction psi = estimate_psi(f, 2000);
    KamSchedule sched = build_schedule(0.2, 1e-4, 1.0, an, psi, 4);

    auto initial_state = [&](FourierMatrixSeries F) {
        return KamState{0, 1.0, 0.2, 0.0, std::move(F), FourierMatrixSeries::identity(2),
                        FourierMatrixSeries::identity(2)};
    };

    SUBCASE("zero perturbation is a fixed point") {
        StepResult res = iteration_step(initial_state(FourierMatrixSeries(2, true)), sched, f, psi, an);
        CHECK(res.state.alpha == doctest::Approx(1.0));
        CHECK(res.state.F.support_size() == 0);
        CHECK(weighted_norm(subtract(res.Y_nu, FourierMatrixSeries::identity(2)), an, 0.2) < 1e-15);
        CHECK(res.diag.all_pass());
    }
    SUBCASE("constant perturbation resolves in one step") {
        double eps = 8e-5;
        FourierMatrixSeries F = FourierMatrixSeries::constant(2, J * (eps / 2.0));
        StepResult res = iteration_step(initial_state(F), sched, f, psi, an);
        CHECK(res.state.alpha == doctest::Approx(1.0 + eps / 2.0).epsilon(1e-12));
        CHECK(res.state.F.support_size() == 0);
        CHECK(res.diag.X_norm == 0.0);
        CHECK(res.diag.all_pass());
    }
    SUBCASE("generic small perturbation contracts by at least 4") {
        FourierMatrixSeries F = three_mode_perturbation(1.0);
        double target = 0.9 * sched.max_admissible_eps;
        F = scale(F, target / weighted_norm(F, an, 0.2));
        KamSchedule s2 = build_schedule(0.2, weighted_norm(F, an, 0.2), 1.0, an, psi, 4);
        StepResult res = iteration_step(initial_state(F), s2, f, psi, an);
        CHECK(res.diag.all_pass());
        CHECK(res.diag.F_next_norm <= 0.25 * res.diag.F_norm + 1e-14);
        CHECK(res.diag.Y_dev <= 8.0 * s2.psiN[0] * s2.eps_nu[0]);
        CHECK(res.diag.trace_mean <= 1e-10);
    }
}

TEST_CASE("conjugacy residual oracle") {
    WeightSpec an = WeightSpec::analytic();
    Frequency f = golden_frequency();

    SUBCASE("identity conjugacy of a constant cocycle") {
        CocycleSpec c;
        c.freq = f;
        c.A = J;
        c.F = FourierMatrixSeries(2, true);
        c.r = 0.2;
        ResidualReport rep = conjugacy_residual(FourierMatrixSeries::identity(2), c, J, 0.1, an);
        CHECK(rep.weighted < 1e-15);
        CHECK(rep.grid_max < 1e-15);
    }
    SUBCASE("Z = I + X against the linearized algebra") {
        // with F = G (dotted) and B = A: d_w Z - (A+G)Z + ZA = -G X exactly
        PsiFunction psi = estimate_psi(f, 30);
        FourierMatrixSeries G(2, true);
        G.set_real_pair({1, 0}, Mat2c(Mat2{0, 0.01, -0.01, 0}) * 0.5);
        G.set_real_pair({1, -1}, Mat2c(Mat2{0.01, 0, 0, -0.01}) * 0.5);
        FourierMatrixSeries X = solve_cohomological(1.0, G, f, 5.0, psi.value_at(5.0));
        FourierMatrixSeries Z = add(FourierMatrixSeries::identity(2), X);
        CocycleSpec c;
        c.freq = f;
        c.A = J;
        c.F = G;
        c.r = 0.2;
        ResidualReport rep = conjugacy_residual(Z, c, J, 0.1, an);
        double expect = weighted_norm(multiply(G, X), an, 0.1);
        CHECK(rep.weighted == doctest::Approx(expect).epsilon(1e-10));
    }
}

TEST_CASE("reduce: trivial and end-to-end") {
    WeightSpec an = WeightSpec::analytic();
    Frequency f = golden_frequency();

    SUBCASE("F = 0 converges immediately") {
        PsiFunction psi = estimate_psi(f, 200);
        CocycleSpec c;
        c.freq = f;
        c.A = J;
        c.F = FourierMatrixSeries(2, true);
        c.r = 0.2;
        ReduceOptions opts;
        opts.max_steps = 3;
        opts.rho_precheck = false;
        ReducibilityReport rep = reduce(c, psi, an, opts);
        CHECK(rep.converged);
        CHECK(rep.steps.empty());
        CHECK(rep.residual.weighted < 1e-14);
        CHECK(op_norm(rep.A_inf - J) < 1e-14);
    }

    SUBCASE("golden three-mode cocycle converges with per-step contraction") {
        PsiFunction psi = estimate_psi(f, 900);
        CocycleSpec c;
        c.freq = f;
        c.A = J;
        c.r = 0.2;
        double N0 = choose_initial_cutoff(c.r, an, psi);
        double max_eps = std::min(0.25, std::pow(2.0, -8) / psi.value_at(N0));
        FourierMatrixSeries F = three_mode_perturbation(1.0);
        c.F = scale(F, 0.9 * max_eps / weighted_norm(F, an, c.r));

        ReduceOptions opts;
        opts.max_steps = 5;
        opts.residual_tol = 1e-4;
        opts.precheck_horizon = 500.0;
        opts.stop_floor = 0.0; // run the whole schedule
        ReducibilityReport rep = reduce(c, psi, an, opts);
        REQUIRE(rep.failure == "");
        CHECK(rep.converged);
        CHECK(rep.steps.size() == 5);
        for (const auto& st : rep.steps) {
            CHECK(st.all_pass());
            CHECK(st.F_next_norm <= 0.25 * st.F_norm + 1e-14);
        }
        CHECK(rep.Y_minus_I_norm <= 32.0 * rep.schedule.psi_N0 * rep.initial_eps);
        CHECK(rep.Y_norm <= 2.0);
        CHECK(rep.Y_inv_norm <= 2.0);
        CHECK(rep.residual.weighted <= 1e-4);
        // the residual is reproducible through the public oracle
        ResidualReport again = conjugacy_residual(rep.Y, c, rep.A_inf, c.r / 2.0, an);
        CHECK(again.weighted == doctest::Approx(rep.residual.weighted).epsilon(1e-12));
        // conjugation preserves the fibered rotation number: the estimate for
        // (w, A+F) matches the limit matrix's rotation number
        double alpha_inf = elliptic_rotation_number(rep.A_inf);
        RotationEstimate est = fibered_rotation_number(c, 2000.0, 0.05);
        CHECK(std::abs(est.value - alpha_inf) <= 2.0 * est.error_indicator + 1e-6);
    }

    SUBCASE("general elliptic constant part reduces through the frame change") {
        PsiFunction psi = estimate_psi(f, 900);
        CocycleSpec c;
        c.freq = f;
        c.A = Mat2{0, 2, -8, 0}; // alpha = 4, P0 != I
        c.r = 0.2;
        EllipticNormalForm nf = real_normal_form(c.A);
        double N0 = choose_initial_cutoff(c.r, an, psi);
        double max_eps = std::min(nf.alpha / 4.0, std::pow(2.0, -8) / psi.value_at(N0));
        FourierMatrixSeries F = three_mode_perturbation(1.0);
        // size F so the conjugated perturbation sits at 0.5 of the threshold
        double inflated = weighted_norm(conjugate_constant(nf.P, F, nf.P_inv), an, c.r);
        c.F = scale(F, 0.5 * max_eps / inflated);

        ReduceOptions opts;
        opts.max_steps = 4;
        opts.residual_tol = 1e-6;
        opts.rho_precheck = false;
        ReducibilityReport rep = reduce(c, psi, an, opts);
        REQUIRE(rep.failure == "");
        CHECK(rep.converged);
        CHECK(elliptic_rotation_number(rep.A_inf) == doctest::Approx(4.0).epsilon(1e-3));
        // the oracle validates the conjugacy against the original cocycle
        ResidualReport res = conjugacy_residual(rep.Y, c, rep.A_inf, c.r / 2.0, an);
        CHECK(res.weighted <= 1e-6);
        CHECK(res.grid_max <= 1e-6);
    }

    SUBCASE("gevrey-2 weight end to end") {
        // sqrt growth of Lambda pushes the cutoff far out; two steps fit a
        // 3000-point table at radius 1/2
        WeightSpec g2 = WeightSpec::gevrey(2.0);
        PsiFunction psi = estimate_psi(f, 3000);
        CocycleSpec c;
        c.freq = f;
        c.A = J;
        c.r = 0.5;
        double N0 = choose_initial_cutoff(c.r, g2, psi);
        double max_eps = std::min(0.25, std::pow(2.0, -8) / psi.value_at(N0));
        FourierMatrixSeries F = three_mode_perturbation(1.0);
        c.F = scale(F, 0.9 * max_eps / weighted_norm(F, g2, c.r));

        ReduceOptions opts;
        opts.max_steps = 2;
        opts.residual_tol = 1e-6;
        opts.rho_precheck = false;
        ReducibilityReport rep = reduce(c, psi, g2, opts);
        REQUIRE(rep.failure == "");
        CHECK(rep.converged);
        for (std::size_t nu = 0; nu < rep.schedule.N.size(); ++nu) {
            double q = 64.0 * std::exp(-2.0 * std::numbers::pi * g2.value(rep.schedule.N[nu]) *
                                       rep.schedule.sigma[nu]);
            CHECK(q == doctest::Approx(1.0).epsilon(1e-12));
        }
        CHECK(rep.residual.weighted <= 1e-6);
    }

    SUBCASE("oversized perturbation fails the schedule, never silently") {
        PsiFunction psi = estimate_psi(f, 200);
        CocycleSpec c;
        c.freq = f;
        c.A = J;
        c.r = 0.2;
        c.F = three_mode_perturbation(0.3); // way above the threshold
        ReduceOptions opts;
        opts.rho_precheck = false;
        ReducibilityReport rep = reduce(c, psi, an, opts);
        CHECK_FALSE(rep.converged);
        CHECK(rep.failure.find("admissible") != std::string::npos);
    }
}
