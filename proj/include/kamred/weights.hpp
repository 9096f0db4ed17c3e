#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace kamred {

enum class WeightKind { analytic, gevrey, tabulated };

/// Weight function Lambda: [1,inf) -> [1,inf), increasing, defining the
/// ultra-differentiable norm sum |f^(k)| e^{2 pi Lambda(|k|) r}.
///
/// analytic:   Lambda(v) = v
/// gevrey(a):  Lambda(v) = v^{1/a}, a >= 1 (a = 1 is the analytic case)
/// tabulated:  monotone piecewise-linear interpolation of a user table,
///             one-sided finite-difference derivative
class WeightSpec {
public:
    static WeightSpec analytic();
    static WeightSpec gevrey(double alpha);
    static WeightSpec tabulated(std::vector<double> grid, std::vector<double> values);
    /// Two-column CSV (v, Lambda(v)); '#' comments and a header line allowed.
    static WeightSpec tabulated_from_csv(const std::string& path);

    WeightKind kind() const { return kind_; }
    double gevrey_alpha() const { return alpha_; }

    /// Lambda(v); v < 1 is a domain error.
    double value(double v) const;
    /// Lambda'(v) (right-sided at tabulated knots).
    double derivative(double v) const;

private:
    WeightSpec() = default;
    WeightKind kind_ = WeightKind::analytic;
    double alpha_ = 1.0;
    std::vector<double> grid_, values_;
};

struct SubadditivityReport {
    bool subadditive = true;
    double worst_margin = 0; // max of Lambda(x+y) - Lambda(x) - Lambda(y)
    double x = 0, y = 0;     // where the worst margin occurs
};

/// Checks Lambda(x+y) <= Lambda(x) + Lambda(y) + tol on a grid of pairs with
/// x, y >= 1 and x + y <= vmax (samples_per_axis points per axis).
SubadditivityReport verify_subadditivity(const WeightSpec& w, double vmax,
                                         int samples_per_axis, double tol = 1e-12);

/// Continuous model of an approximating function Psi on [1, inf), exposing
/// what the condition integrals need: ln Psi and its v-derivative.
class PsiCurve {
public:
    virtual ~PsiCurve() = default;
    virtual double log_value(double v) const = 0; // ln Psi(v)
    virtual double log_slope(double v) const = 0; // d/dv ln Psi(v)
    double value_at(double v) const;
    double derivative(double v) const; // Psi'(v) = log_slope * Psi
};

/// Psi(v) = exp(v^beta), 0 < beta.
class ExpPowerPsi final : public PsiCurve {
public:
    explicit ExpPowerPsi(double beta);
    double log_value(double v) const override;
    double log_slope(double v) const override;

private:
    double beta_;
};

/// Psi(v) = psi1 * v^tau (Diophantine type).
class PowerLawPsi final : public PsiCurve {
public:
    explicit PowerLawPsi(double tau, double psi1 = 1.0);
    double log_value(double v) const override;
    double log_slope(double v) const override;

private:
    double tau_, log_psi1_;
};

enum class Verdict { converges, diverges, inconclusive };

const char* to_string(Verdict v);

/// Numerical evidence about one improper integral int_{v0}^{inf} g(v) dv,
/// assembled from per-decade contributions on [v0, vmax] plus a geometric
/// extrapolation of the tail.  The verdict is about the integral itself.
struct IntegralEvidence {
    std::vector<double> decade_edges;    // edges[j]..edges[j+1] brackets contribution j
    std::vector<double> contributions;   // per-decade integrals
    std::vector<double> partial_tails;   // estimated tail past each decade edge
    double range_total = 0;              // integral over [v0, vmax]
    double extrapolated_tail = 0;        // inf when no geometric decay is seen
    Verdict verdict = Verdict::inconclusive;
};

struct ClassifyOptions {
    int panels_per_decade = 8;        // log-spaced adaptive Simpson panels
    double quad_rel_tol = 1e-9;
    int samples_per_decade = 16;      // Russmann ratio sampling density
    double conv_tail_fraction = 1e-6; // tail below this fraction => converges
    double conv_ratio = 0.98;         // decade ratio uniformly below => converges
    double ratio_drift_tol = 0.02;    // ratios rising faster than this => inconclusive
    double div_last_fraction = 0.10;  // last decade above this fraction and
    double div_growth_slack = 1e-3;   //   non-decreasing (within slack) => diverges
};

/// Joint numerical classification of a (Lambda, Psi) pair:
///   lambda_br      : int Lambda'(v) ln Psi(v) / Lambda(v)^2 dv   (Lambda-BR)
///   br_equivalent  : int Psi'(v) / (Psi(v) Lambda(v)) dv         (same condition
///                    after integration by parts; verdicts must agree)
///   russmann ratio : ln Psi(v) / Lambda(v) -> 0                  (Lambda-R)
///   quasi_analytic : int Lambda(v)/v^2 dv; the class is quasi-analytic
///                    exactly when this integral diverges.
struct ConditionReport {
    IntegralEvidence lambda_br;
    IntegralEvidence br_equivalent;
    IntegralEvidence quasi_analytic;
    std::vector<double> russmann_v;
    std::vector<double> russmann_ratio;
    Verdict russmann_verdict = Verdict::inconclusive; // converges == ratio -> 0
    bool quasi_analytic_class = false;
    bool br_verdicts_agree = false;
};

ConditionReport classify_conditions(const WeightSpec& w, const PsiCurve& psi,
                                    double v0, double vmax,
                                    const ClassifyOptions& opts = {});

/// Adaptive Simpson quadrature used by the classifier (exposed for oracles).
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double rel_tol = 1e-10, double abs_tol = 1e-14);

} // namespace kamred
