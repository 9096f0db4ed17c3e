#include "commands.hpp"

#include "kamred/counterexample.hpp"
#include "kamred/kam.hpp"
#include "kamred/report_json.hpp"
#include "kamred/rotation.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>

namespace fs = std::filesystem;

namespace kamred::cli {

namespace {

// ---- shared pieces -------------------------------------------------------

const std::vector<std::string> frequency_keys = {"frequency.preset", "frequency.components"};
const std::vector<std::string> weight_keys = {"weight.weight"};
const std::vector<std::string> psi_keys = {"psi.kmax", "psi.budget"};
const std::vector<std::string> cocycle_keys = {"cocycle.A", "cocycle.r", "cocycle.F_file",
                                               "cocycle.mode", "cocycle.scale_to_threshold"};
const std::vector<std::string> output_keys = {"output.write_series"};

std::vector<std::string> concat(std::initializer_list<std::vector<std::string>> lists) {
    std::vector<std::string> out;
    for (const auto& l : lists)
        out.insert(out.end(), l.begin(), l.end());
    return out;
}

Frequency parse_frequency(const Config& cfg) {
    if (cfg.has("frequency.components")) {
        std::vector<double> comps = cfg.get_doubles("frequency.components");
        if (comps.empty())
            throw ConfigError("frequency.components must list at least one entry");
        return Frequency{comps};
    }
    std::string preset = cfg.get_or("frequency.preset", "golden");
    if (preset == "golden")
        return golden_frequency();
    throw ConfigError("unknown frequency preset '" + preset + "' (use 'golden' or components)");
}

WeightSpec parse_weight(const Config& cfg) {
    std::string spec = cfg.get_or("weight.weight", "analytic");
    if (spec == "analytic")
        return WeightSpec::analytic();
    if (spec.rfind("gevrey:", 0) == 0)
        return WeightSpec::gevrey(std::stod(spec.substr(7)));
    if (spec.rfind("table:", 0) == 0)
        return WeightSpec::tabulated_from_csv(spec.substr(6));
    throw ConfigError("unknown weight spec '" + spec + "' (analytic | gevrey:<a> | table:<path>)");
}

ojson weight_json(const Config& cfg) { return cfg.get_or("weight.weight", "analytic"); }

PsiFunction parse_psi(const Config& cfg, const Frequency& freq) {
    int kmax = static_cast<int>(cfg.get_int("psi.kmax"));
    auto budget = static_cast<std::uint64_t>(cfg.get_int_or("psi.budget", 400000000LL));
    return estimate_psi(freq, kmax, budget);
}

Mat2 parse_constant_matrix(const Config& cfg) {
    std::vector<double> a = cfg.get_doubles("cocycle.A");
    if (a.size() != 4)
        throw ConfigError("cocycle.A must hold 4 reals, row-major");
    return Mat2{a[0], a[1], a[2], a[3]};
}

// mode syntax: (cos|sin) k1 ... kd : m11 m12 m21 m22
void apply_mode(FourierMatrixSeries& F, const std::string& text, int d) {
    std::string head = text, tail;
    std::size_t colon = text.find(':');
    if (colon == std::string::npos)
        throw ConfigError("cocycle.mode needs 'cos|sin k... : m11 m12 m21 m22', got '" + text + "'");
    head = text.substr(0, colon);
    tail = text.substr(colon + 1);
    std::istringstream hs(head);
    std::string kind;
    hs >> kind;
    if (kind != "cos" && kind != "sin")
        throw ConfigError("cocycle.mode must start with cos or sin");
    MultiIndex k(static_cast<std::size_t>(d));
    for (int& c : k)
        if (!(hs >> c))
            throw ConfigError("cocycle.mode: expected " + std::to_string(d) + " index entries");
    std::istringstream ts(tail);
    double m[4];
    for (double& x : m)
        if (!(ts >> x))
            throw ConfigError("cocycle.mode: expected 4 matrix entries after ':'");
    Mat2c M(Mat2{m[0], m[1], m[2], m[3]});
    if (kind == "cos")
        F.add_to_coefficient(k, M * 0.5);
    else
        F.add_to_coefficient(k, M * cplx(0.0, -0.5)); // sin = (e^{i.} - e^{-i.}) / 2i
    if (!is_zero_index(k)) {
        if (kind == "cos")
            F.add_to_coefficient(negate(k), M * 0.5);
        else
            F.add_to_coefficient(negate(k), M * cplx(0.0, 0.5));
    }
}

CocycleSpec parse_cocycle(const Config& cfg, const Frequency& freq) {
    CocycleSpec c;
    c.freq = freq;
    c.A = parse_constant_matrix(cfg);
    c.r = cfg.get_double("cocycle.r");
    if (cfg.has("cocycle.F_file")) {
        if (!cfg.modes().empty())
            throw ConfigError("give either cocycle.F_file or inline cocycle.mode lines, not both");
        c.F = read_series_file(cfg.get("cocycle.F_file"));
    } else {
        FourierMatrixSeries F(freq.dim(), true);
        for (const std::string& m : cfg.modes())
            apply_mode(F, m, freq.dim());
        c.F = std::move(F);
    }
    c.F.check_real_symmetry();
    return c;
}

ojson resolved_config(const Config& cfg) {
    ojson j = ojson::object();
    for (const auto& [k, v] : cfg.entries())
        j[k] = v;
    if (!cfg.modes().empty())
        j["cocycle.mode"] = cfg.modes();
    return j;
}

void write_text_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    if (!out)
        throw std::runtime_error("cannot write " + p.string());
    out << text;
}

// ---- commands ------------------------------------------------------------

ojson cmd_psi_scan(const Config& cfg, const RunContext& ctx) {
    cfg.validate_keys(concat({frequency_keys, psi_keys}));
    Frequency freq = parse_frequency(cfg);
    PsiFunction psi = parse_psi(cfg, freq);

    std::ostringstream csv;
    psi.write_csv(csv);
    write_text_file(fs::path(ctx.out_dir) / "psi.csv", csv.str());

    ojson res;
    res["kmax"] = psi.kmax();
    res["psi_1"] = psi.table_value(1);
    res["psi_kmax"] = psi.table_value(psi.kmax());
    res["records"] = psi.record_points();
    res["extrapolation_slope"] = psi.extrapolation_slope();
    return res;
}

ojson cmd_conditions(const Config& cfg, const RunContext& ctx) {
    cfg.validate_keys(concat({frequency_keys, weight_keys, psi_keys,
                              {"conditions.psi", "conditions.v0", "conditions.vmax"}}));
    WeightSpec w = parse_weight(cfg);
    double v0 = cfg.get_double_or("conditions.v0", 1.0);
    double vmax = cfg.get_double_or("conditions.vmax", 1e6);

    std::unique_ptr<PsiCurve> curve;
    std::string source = cfg.get_or("conditions.psi", "enumerate");
    if (source.rfind("exp-power:", 0) == 0) {
        curve = std::make_unique<ExpPowerPsi>(std::stod(source.substr(10)));
    } else if (source.rfind("power-law:", 0) == 0) {
        std::string rest = source.substr(10);
        std::size_t colon = rest.find(':');
        double tau = std::stod(rest.substr(0, colon));
        double psi1 = colon == std::string::npos ? 1.0 : std::stod(rest.substr(colon + 1));
        curve = std::make_unique<PowerLawPsi>(tau, psi1);
    } else if (source == "enumerate") {
        Frequency freq = parse_frequency(cfg);
        curve = std::make_unique<PsiFunction>(parse_psi(cfg, freq));
        vmax = std::min(vmax, static_cast<double>(static_cast<const PsiFunction*>(curve.get())->kmax()));
    } else {
        throw ConfigError("conditions.psi must be enumerate | exp-power:<beta> | power-law:<tau>[:<psi1>]");
    }

    ConditionReport rep = classify_conditions(w, *curve, v0, vmax);

    std::ostringstream csv;
    csv << "decade_hi,lambda_br,br_equivalent,quasi_analytic\n";
    char buf[160];
    for (std::size_t j = 0; j < rep.lambda_br.contributions.size(); ++j) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", rep.lambda_br.decade_edges[j + 1],
                      rep.lambda_br.contributions[j], rep.br_equivalent.contributions[j],
                      rep.quasi_analytic.contributions[j]);
        csv << buf;
    }
    write_text_file(fs::path(ctx.out_dir) / "decades.csv", csv.str());

    ojson res = to_json(rep);
    res["weight"] = weight_json(cfg);
    res["psi_source"] = source;
    res["v0"] = v0;
    res["vmax"] = vmax;
    return res;
}

ojson cmd_rotation(const Config& cfg, const RunContext& ctx, bool lyapunov) {
    cfg.validate_keys(concat({frequency_keys, cocycle_keys,
                              {"rotation.horizon", "rotation.step", "lyapunov.horizon",
                               "lyapunov.step", "lyapunov.renorm_interval"}}));
    (void)ctx;
    Frequency freq = parse_frequency(cfg);
    CocycleSpec c = parse_cocycle(cfg, freq);
    c.validate();
    ojson res;
    if (lyapunov) {
        double horizon = cfg.get_double_or("lyapunov.horizon", 10000.0);
        double step = cfg.get_double_or("lyapunov.step", 0.02);
        double renorm = cfg.get_double_or("lyapunov.renorm_interval", 10.0);
        res["lyapunov_exponent"] = lyapunov_exponent(c, horizon, step, renorm);
        res["horizon"] = horizon;
        res["step"] = step;
    } else {
        double horizon = cfg.get_double_or("rotation.horizon", 10000.0);
        double step = cfg.get_double_or("rotation.step", 0.02);
        RotationEstimate est = fibered_rotation_number(c, horizon, step);
        res = to_json(est);
        res["step"] = step;
    }
    res["sup_norm_F"] = sup_norm(c.F);
    return res;
}

ojson cmd_reduce(const Config& cfg, const RunContext& ctx) {
    cfg.validate_keys(concat({frequency_keys, weight_keys, psi_keys, cocycle_keys, output_keys,
                              {"kam.max_steps", "kam.residual_tol", "kam.rho_precheck",
                               "kam.stop_floor", "kam.precheck_horizon", "kam.precheck_step"}}));
    Frequency freq = parse_frequency(cfg);
    WeightSpec w = parse_weight(cfg);
    PsiFunction psi = parse_psi(cfg, freq);
    CocycleSpec c = parse_cocycle(cfg, freq);

    if (cfg.has("cocycle.scale_to_threshold")) {
        double target = cfg.get_double("cocycle.scale_to_threshold");
        if (!(target > 0) || target > 1.0)
            throw ConfigError("cocycle.scale_to_threshold must be in (0, 1]");
        EllipticNormalForm nf = real_normal_form(c.A);
        double N0 = choose_initial_cutoff(c.r, w, psi);
        double max_eps = std::min(nf.alpha / 4.0, std::pow(2.0, -8) / psi.value_at(N0));
        double now = weighted_norm(conjugate_constant(nf.P, c.F, nf.P_inv), w, c.r);
        if (now > 0)
            c.F = scale(c.F, target * max_eps / now);
    }
    c.validate();

    ReduceOptions opts;
    opts.max_steps = static_cast<int>(cfg.get_int_or("kam.max_steps", 12));
    opts.residual_tol = cfg.get_double_or("kam.residual_tol", 1e-6);
    opts.rho_precheck = cfg.get_bool_or("kam.rho_precheck", true);
    opts.stop_floor = cfg.get_double_or("kam.stop_floor", 1e-14);
    opts.precheck_horizon = cfg.get_double_or("kam.precheck_horizon", 2000.0);
    opts.precheck_step = cfg.get_double_or("kam.precheck_step", 0.02);
    opts.seed = ctx.seed;

    ReducibilityReport rep = reduce(c, psi, w, opts);

    std::ostringstream csv;
    csv << "nu,alpha,N,sigma,psi_N,eps_budget,F_norm,X_norm,R_norm,F_next_norm,contraction,"
           "Y_minus_I,guard_ok,all_pass\n";
    char buf[360];
    for (const auto& s : rep.steps) {
        std::snprintf(buf, sizeof buf,
                      "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%d\n",
                      s.nu, s.alpha_in, s.N, s.sigma, s.psiN, s.eps_budget, s.F_norm, s.X_norm,
                      s.R_norm, s.F_next_norm, s.contraction, s.Y_dev, s.guard_ok ? 1 : 0,
                      s.all_pass() ? 1 : 0);
        csv << buf;
    }
    write_text_file(fs::path(ctx.out_dir) / "steps.csv", csv.str());

    if (cfg.get_bool_or("output.write_series", true) && rep.failure.empty()) {
        write_series_file((fs::path(ctx.out_dir) / "conjugacy.series").string(), rep.Y);
        write_series_file((fs::path(ctx.out_dir) / "conjugacy_inv.series").string(), rep.Y_inv);
    }
    return to_json(rep);
}

ojson cmd_counterexample(const Config& cfg, const RunContext& ctx) {
    cfg.validate_keys(concat({frequency_keys, weight_keys, psi_keys, output_keys,
                              {"counterexample.count", "counterexample.rho", "counterexample.eps",
                               "counterexample.slack", "counterexample.kam_max_steps"}}));
    Frequency freq = parse_frequency(cfg);
    WeightSpec w = parse_weight(cfg);
    PsiFunction psi = parse_psi(cfg, freq);

    ResonanceOptions ropts;
    ropts.slack = cfg.get_double_or("counterexample.slack", 0.5);
    int count = static_cast<int>(cfg.get_int_or("counterexample.count", 3));
    double rho = cfg.get_double_or("counterexample.rho", 0.35);
    double eps = cfg.get_double_or("counterexample.eps", 1e-3);

    ResonanceChain chain = find_resonances(freq, w, psi, count, ropts);
    CounterexampleCocycle cc = build_counterexample(chain, rho, eps, w, freq);
    NonsolvabilityEvidence ev = certify_nonsolvability(cc.u, freq, chain);

    // negative test: the KAM driver must refuse this cocycle
    ReduceOptions kopts;
    kopts.max_steps = static_cast<int>(cfg.get_int_or("counterexample.kam_max_steps", 6));
    kopts.rho_precheck = false;
    kopts.seed = ctx.seed;
    ReducibilityReport kam = reduce(cc.cocycle, psi, w, kopts);
    ev.kam_failure = kam.converged ? "UNEXPECTED: the KAM driver converged" : kam.failure;

    if (cfg.get_bool_or("output.write_series", true))
        write_series_file((fs::path(ctx.out_dir) / "perturbation.series").string(), cc.cocycle.F);

    ojson res;
    res["chain"] = to_json(chain);
    res["rho"] = rho;
    res["eps"] = eps;
    res["u_minus_rho_norm"] = cc.u_minus_rho_norm;
    ojson utable = ojson::array();
    for (const auto& [k, v] : cc.u.coeffs)
        utable.push_back(ojson{{"k", k}, {"re", v.real()}, {"im", v.imag()}});
    res["u_coefficients"] = utable;
    res["evidence"] = to_json(ev);
    res["kam_refused"] = !kam.converged;
    return res;
}

} // namespace

ojson run_experiment(const Config& cfg, const RunContext& ctx) {
    fs::create_directories(ctx.out_dir);
    ojson report;
    report["command"] = cfg.command;
    report["config"] = resolved_config(cfg);
    report["seed"] = ctx.seed;

    const std::string& cmd = cfg.command;
    if (cmd == "psi-scan")
        report["result"] = cmd_psi_scan(cfg, ctx);
    else if (cmd == "conditions")
        report["result"] = cmd_conditions(cfg, ctx);
    else if (cmd == "rotation")
        report["result"] = cmd_rotation(cfg, ctx, false);
    else if (cmd == "lyapunov")
        report["result"] = cmd_rotation(cfg, ctx, true);
    else if (cmd == "reduce")
        report["result"] = cmd_reduce(cfg, ctx);
    else if (cmd == "counterexample")
        report["result"] = cmd_counterexample(cfg, ctx);
    else
        throw ConfigError("unknown command '" + cmd +
                          "' (psi-scan | conditions | reduce | rotation | lyapunov | counterexample)");
    return report;
}

} // namespace kamred::cli
