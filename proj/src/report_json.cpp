#include "kamred/report_json.hpp"

namespace kamred {

ojson to_json(const Mat2& m) {
    return ojson::array({m.m11, m.m12, m.m21, m.m22});
}

ojson to_json(const BoundCheck& c) {
    return ojson{{"name", c.name}, {"claimed", c.claimed}, {"measured", c.measured}, {"pass", c.pass}};
}

ojson to_json(const StepDiagnostics& d) {
    ojson checks = ojson::array();
    for (const auto& c : d.checks)
        checks.push_back(to_json(c));
    return ojson{{"nu", d.nu},
                 {"alpha_in", d.alpha_in},
                 {"alpha_out", d.alpha_out},
                 {"r_in", d.r_in},
                 {"r_out", d.r_out},
                 {"N", d.N},
                 {"sigma", d.sigma},
                 {"psi_N", d.psiN},
                 {"eps_budget", d.eps_budget},
                 {"F_norm", d.F_norm},
                 {"G_norm", d.G_norm},
                 {"X_norm", d.X_norm},
                 {"R_norm", d.R_norm},
                 {"F_next_norm", d.F_next_norm},
                 {"Y_minus_I_norm", d.Y_dev},
                 {"contraction", d.contraction},
                 {"trace_mean", d.trace_mean},
                 {"guard_ok", d.guard_ok},
                 {"checks", checks},
                 {"all_pass", d.all_pass()}};
}

ojson to_json(const KamSchedule& s) {
    return ojson{{"r", s.r},
                 {"eps", s.eps},
                 {"alpha", s.alpha},
                 {"max_steps", s.max_steps},
                 {"N0", s.N0},
                 {"psi_N0", s.psi_N0},
                 {"tail_integral", s.tail_integral},
                 {"max_admissible_eps", s.max_admissible_eps},
                 {"sum_sigma", s.sum_sigma},
                 {"N", s.N},
                 {"sigma", s.sigma},
                 {"eps_nu", s.eps_nu},
                 {"psi_N", s.psiN},
                 {"radii", s.radii}};
}

ojson to_json(const ResidualReport& r) {
    return ojson{{"weighted", r.weighted}, {"grid_max", r.grid_max}};
}

ojson to_json(const ReducibilityReport& r) {
    ojson steps = ojson::array();
    for (const auto& s : r.steps)
        steps.push_back(to_json(s));
    ojson checks = ojson::array();
    for (const auto& c : r.global_checks)
        checks.push_back(to_json(c));
    ojson precheck;
    if (r.rho_precheck.ran)
        precheck = ojson{{"rho_estimate", r.rho_precheck.rho_estimate},
                         {"error_indicator", r.rho_precheck.error_indicator},
                         {"condition_ok", r.rho_precheck.condition_ok},
                         {"worst_margin", r.rho_precheck.worst_margin},
                         {"checked_K", r.rho_precheck.checked_K}};
    return ojson{{"converged", r.converged},
                 {"failure", r.failure},
                 {"initial_eps", r.initial_eps},
                 {"frame_norm_product", r.frame_norm_product},
                 {"rho_precheck", precheck},
                 {"schedule", r.failure.empty() || !r.steps.empty() ? to_json(r.schedule) : ojson()},
                 {"steps", steps},
                 {"A_inf", to_json(r.A_inf)},
                 {"Y_norm", r.Y_norm},
                 {"Y_inv_norm", r.Y_inv_norm},
                 {"Y_minus_I_norm", r.Y_minus_I_norm},
                 {"residual", to_json(r.residual)},
                 {"residual_tol", r.residual_tol},
                 {"global_checks", checks}};
}

ojson to_json(const RotationEstimate& e) {
    return ojson{{"value", e.value},
                 {"horizon", e.horizon},
                 {"error_indicator", e.error_indicator},
                 {"estimate_full", e.estimate_full},
                 {"estimate_half", e.estimate_half}};
}

ojson to_json(const IntegralEvidence& e) {
    return ojson{{"verdict", to_string(e.verdict)},
                 {"range_total", e.range_total},
                 {"extrapolated_tail", e.extrapolated_tail},
                 {"decade_edges", e.decade_edges},
                 {"contributions", e.contributions},
                 {"partial_tails", e.partial_tails}};
}

ojson to_json(const ConditionReport& r) {
    return ojson{{"lambda_br", to_json(r.lambda_br)},
                 {"br_equivalent", to_json(r.br_equivalent)},
                 {"br_verdicts_agree", r.br_verdicts_agree},
                 {"russmann_verdict", to_string(r.russmann_verdict)},
                 {"russmann_v", r.russmann_v},
                 {"russmann_ratio", r.russmann_ratio},
                 {"quasi_analytic", to_json(r.quasi_analytic)},
                 {"quasi_analytic_class", r.quasi_analytic_class}};
}

ojson to_json(const SubadditivityReport& r) {
    return ojson{{"subadditive", r.subadditive}, {"worst_margin", r.worst_margin}, {"x", r.x}, {"y", r.y}};
}

ojson to_json(const ResonanceChain& c) {
    ojson modes = ojson::array();
    for (const auto& k : c.modes)
        modes.push_back(k);
    return ojson{{"r", c.r},
                 {"limsup_estimate", c.limsup_estimate},
                 {"C", c.C},
                 {"modes", modes},
                 {"divisors", c.divisors},
                 {"margins", c.margins}};
}

ojson to_json(const NonsolvabilityEvidence& e) {
    return ojson{{"solvable", e.solvable},
                 {"expected_magnitude", e.expected_magnitude},
                 {"v_hat_magnitudes", e.v_hat_magnitudes},
                 {"max_magnitude_deviation", e.max_magnitude_deviation},
                 {"l1_partial", e.l1_partial},
                 {"sup_partial", e.sup_partial},
                 {"coefficients_vanish_at_infinity", e.coefficients_vanish_at_infinity},
                 {"kam_failure", e.kam_failure}};
}

ojson to_json(const RotationConditionResult& r) {
    return ojson{{"satisfied", r.satisfied},
                 {"worst_margin", r.worst_margin},
                 {"witness", r.witness},
                 {"sign", r.sign}};
}

} // namespace kamred
