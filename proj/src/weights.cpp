#include "kamred/weights.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

namespace kamred {

namespace {

void require_domain(double v) {
    if (!(v >= 1.0))
        throw std::domain_error("weight function: argument below domain [1, inf)");
}

} // namespace

WeightSpec WeightSpec::analytic() {
    WeightSpec w;
    w.kind_ = WeightKind::analytic;
    w.alpha_ = 1.0;
    return w;
}

WeightSpec WeightSpec::gevrey(double alpha) {
    if (!(alpha >= 1.0))
        throw std::invalid_argument("WeightSpec::gevrey: alpha must be >= 1");
    WeightSpec w;
    w.kind_ = WeightKind::gevrey;
    w.alpha_ = alpha;
    return w;
}

WeightSpec WeightSpec::tabulated(std::vector<double> grid, std::vector<double> values) {
    if (grid.size() != values.size() || grid.size() < 2)
        throw std::invalid_argument("WeightSpec::tabulated: need two equal-length columns, >= 2 rows");
    if (std::abs(grid.front() - 1.0) > 1e-12)
        throw std::invalid_argument("WeightSpec::tabulated: grid must start at v = 1");
    if (values.front() < 1.0 - 1e-12)
        throw std::invalid_argument("WeightSpec::tabulated: Lambda(1) < 1 is rejected");
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (!(grid[i] > grid[i - 1]))
            throw std::invalid_argument("WeightSpec::tabulated: grid must be strictly increasing");
        if (values[i] < values[i - 1])
            throw std::invalid_argument("WeightSpec::tabulated: values must be non-decreasing");
    }
    WeightSpec w;
    w.kind_ = WeightKind::tabulated;
    w.grid_ = std::move(grid);
    w.values_ = std::move(values);
    return w;
}

WeightSpec WeightSpec::tabulated_from_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("WeightSpec::tabulated_from_csv: cannot open " + path);
    std::vector<double> grid, values;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#')
            continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ss(line);
        double v, lam;
        if (!(ss >> v >> lam)) {
            if (grid.empty())
                continue; // header line
            throw std::runtime_error("WeightSpec::tabulated_from_csv: bad row '" + line + "'");
        }
        grid.push_back(v);
        values.push_back(lam);
    }
    return tabulated(std::move(grid), std::move(values));
}

double WeightSpec::value(double v) const {
    require_domain(v);
    switch (kind_) {
    case WeightKind::analytic:
        return v;
    case WeightKind::gevrey:
        return std::pow(v, 1.0 / alpha_);
    case WeightKind::tabulated: {
        if (v >= grid_.back()) {
            // extrapolate with the last segment slope
            std::size_t n = grid_.size();
            double s = (values_[n - 1] - values_[n - 2]) / (grid_[n - 1] - grid_[n - 2]);
            return values_[n - 1] + s * (v - grid_[n - 1]);
        }
        auto it = std::upper_bound(grid_.begin(), grid_.end(), v);
        std::size_t i = static_cast<std::size_t>(it - grid_.begin());
        if (i == 0)
            return values_.front();
        double t = (v - grid_[i - 1]) / (grid_[i] - grid_[i - 1]);
        return values_[i - 1] + t * (values_[i] - values_[i - 1]);
    }
    }
    throw std::logic_error("WeightSpec::value: bad kind");
}

double WeightSpec::derivative(double v) const {
    require_domain(v);
    switch (kind_) {
    case WeightKind::analytic:
        return 1.0;
    case WeightKind::gevrey:
        return (1.0 / alpha_) * std::pow(v, 1.0 / alpha_ - 1.0);
    case WeightKind::tabulated: {
        std::size_t n = grid_.size();
        if (v >= grid_[n - 1])
            return (values_[n - 1] - values_[n - 2]) / (grid_[n - 1] - grid_[n - 2]);
        auto it = std::upper_bound(grid_.begin(), grid_.end(), v);
        std::size_t i = static_cast<std::size_t>(it - grid_.begin());
        if (i == 0)
            i = 1;
        return (values_[i] - values_[i - 1]) / (grid_[i] - grid_[i - 1]);
    }
    }
    throw std::logic_error("WeightSpec::derivative: bad kind");
}

SubadditivityReport verify_subadditivity(const WeightSpec& w, double vmax,
                                         int samples_per_axis, double tol) {
    if (!(vmax >= 2.0))
        throw std::invalid_argument("verify_subadditivity: vmax must be >= 2");
    if (samples_per_axis < 1)
        throw std::invalid_argument("verify_subadditivity: need at least one sample");
    SubadditivityReport rep;
    rep.worst_margin = -std::numeric_limits<double>::infinity();
    double lo = 1.0, hi = vmax - 1.0;
    int n = samples_per_axis;
    for (int i = 0; i < n; ++i) {
        double x = (n == 1) ? lo : lo + (hi - lo) * i / (n - 1);
        for (int j = 0; j < n; ++j) {
            double y = (n == 1) ? lo : lo + (hi - lo) * j / (n - 1);
            if (x + y > vmax)
                continue;
            double margin = w.value(x + y) - w.value(x) - w.value(y);
            if (margin > rep.worst_margin) {
                rep.worst_margin = margin;
                rep.x = x;
                rep.y = y;
            }
        }
    }
    rep.subadditive = rep.worst_margin <= tol;
    return rep;
}

double PsiCurve::value_at(double v) const { return std::exp(log_value(v)); }

double PsiCurve::derivative(double v) const { return log_slope(v) * value_at(v); }

ExpPowerPsi::ExpPowerPsi(double beta) : beta_(beta) {
    if (!(beta > 0))
        throw std::invalid_argument("ExpPowerPsi: beta must be positive");
}

double ExpPowerPsi::log_value(double v) const { return std::pow(v, beta_); }

double ExpPowerPsi::log_slope(double v) const { return beta_ * std::pow(v, beta_ - 1.0); }

PowerLawPsi::PowerLawPsi(double tau, double psi1) : tau_(tau), log_psi1_(std::log(psi1)) {
    if (!(tau > 0) || !(psi1 > 0))
        throw std::invalid_argument("PowerLawPsi: tau and psi1 must be positive");
}

double PowerLawPsi::log_value(double v) const { return log_psi1_ + tau_ * std::log(v); }

double PowerLawPsi::log_slope(double v) const { return tau_ / v; }

const char* to_string(Verdict v) {
    switch (v) {
    case Verdict::converges:
        return "converges";
    case Verdict::diverges:
        return "diverges";
    default:
        return "inconclusive";
    }
}

namespace {

double simpson(double a, double fa, double b, double fb, double fm) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_step(const std::function<double(double)>& f, double a, double fa,
                     double b, double fb, double m, double fm, double whole,
                     double tol, int depth) {
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = simpson(a, fa, m, fm, flm);
    double right = simpson(m, fm, b, fb, frm);
    double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return adaptive_step(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
           adaptive_step(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

} // namespace

double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double rel_tol, double abs_tol) {
    if (!(b > a))
        return 0.0;
    double fa = f(a), fb = f(b), m = 0.5 * (a + b), fm = f(m);
    double whole = simpson(a, fa, b, fb, fm);
    double tol = std::max(abs_tol, rel_tol * std::abs(whole));
    return adaptive_step(f, a, fa, b, fb, m, fm, whole, tol, 28);
}

namespace {

// Integrate on log-spaced panels inside [a, b].
double integrate_log_panels(const std::function<double(double)>& f, double a, double b,
                            int panels, double rel_tol) {
    if (!(b > a))
        return 0.0;
    double total = 0.0;
    double ratio = std::pow(b / a, 1.0 / panels);
    double lo = a;
    for (int p = 0; p < panels; ++p) {
        double hi = (p + 1 == panels) ? b : lo * ratio;
        total += integrate_adaptive(f, lo, hi, rel_tol);
        lo = hi;
    }
    return total;
}

Verdict integral_verdict(IntegralEvidence& ev, const ClassifyOptions& o) {
    const auto& c = ev.contributions;
    std::size_t n = c.size();
    double total_abs = 0;
    for (double x : c)
        total_abs += std::abs(x);
    if (n < 3 || total_abs == 0)
        return Verdict::inconclusive;

    // The last decade can be partial, so the growth pattern is read off the
    // per-unit-log densities rather than the raw panel totals.
    std::vector<double> dens(n);
    for (std::size_t j = 0; j < n; ++j) {
        double width = std::log(ev.decade_edges[j + 1] / ev.decade_edges[j]);
        dens[j] = std::abs(c[j]) / width;
    }

    double rlast = dens[n - 1] / std::max(dens[n - 2], 1e-300);
    double rprev = dens[n - 2] / std::max(dens[n - 3], 1e-300);
    double tail = std::numeric_limits<double>::infinity();
    double r = std::max(rlast, rprev);
    if (r < 1.0)
        tail = dens[n - 1] * std::numbers::ln10 * r / (1.0 - r);
    ev.extrapolated_tail = tail;

    ev.partial_tails.assign(n, 0.0);
    double suffix = std::isfinite(tail) ? tail : 0.0;
    for (std::size_t j = n; j-- > 0;) {
        suffix += std::abs(c[j]);
        ev.partial_tails[j] = std::isfinite(tail) ? suffix
                                                  : std::numeric_limits<double>::infinity();
    }

    bool growing = dens[n - 1] >= dens[n - 2] * (1.0 - o.div_growth_slack) &&
                   dens[n - 2] >= dens[n - 3] * (1.0 - o.div_growth_slack);
    double last_full = dens[n - 1] * std::numbers::ln10; // last decade if completed
    double last_fraction = last_full / (total_abs - std::abs(c[n - 1]) + last_full);
    if (growing && last_fraction > o.div_last_fraction)
        return Verdict::diverges;
    if (std::isfinite(tail)) {
        if (tail <= o.conv_tail_fraction * total_abs)
            return Verdict::converges;
        // Geometric decay with a finite extrapolated tail.  Ratios creeping
        // up toward 1 signal sub-geometric behaviour (e.g. a double-log
        // divergence), which this range cannot decide.
        bool drifting_up = rlast > rprev + o.ratio_drift_tol;
        if (rlast <= o.conv_ratio && rprev <= o.conv_ratio && !drifting_up)
            return Verdict::converges;
    }
    return Verdict::inconclusive;
}

IntegralEvidence evidence_for(const std::function<double(double)>& f, double v0,
                              double vmax, const ClassifyOptions& o) {
    IntegralEvidence ev;
    double lo = v0;
    ev.decade_edges.push_back(lo);
    while (lo < vmax * (1.0 - 1e-12)) {
        double hi = std::min(lo * 10.0, vmax);
        ev.contributions.push_back(integrate_log_panels(f, lo, hi, o.panels_per_decade, o.quad_rel_tol));
        ev.decade_edges.push_back(hi);
        lo = hi;
    }
    for (double x : ev.contributions)
        ev.range_total += x;
    ev.verdict = integral_verdict(ev, o);
    return ev;
}

// Least-squares slope of y against x.
double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t n = x.size();
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    double denom = n * sxx - sx * sx;
    if (denom == 0)
        return 0;
    return (n * sxy - sx * sy) / denom;
}

Verdict russmann_verdict_from(const std::vector<double>& v, const std::vector<double>& ratio) {
    std::size_t n = v.size();
    if (n < 6)
        return Verdict::inconclusive;
    std::size_t lo = n / 2;
    double tail_max = -std::numeric_limits<double>::infinity();
    std::vector<double> lx, ly;
    for (std::size_t i = lo; i < n; ++i) {
        tail_max = std::max(tail_max, ratio[i]);
        if (ratio[i] > 0) {
            lx.push_back(std::log(v[i]));
            ly.push_back(std::log(ratio[i]));
        }
    }
    if (tail_max <= 1e-3)
        return Verdict::converges; // ratio already negligible (or negative)
    if (lx.size() < 4)
        return Verdict::inconclusive;
    double slope = fit_slope(lx, ly);
    if (slope <= -0.15)
        return Verdict::converges;
    if (slope >= -0.02 && tail_max > 1e-3)
        return Verdict::diverges;
    return Verdict::inconclusive;
}

} // namespace

ConditionReport classify_conditions(const WeightSpec& w, const PsiCurve& psi,
                                    double v0, double vmax, const ClassifyOptions& opts) {
    if (!(v0 >= 1.0) || !(vmax > v0))
        throw std::invalid_argument("classify_conditions: need 1 <= v0 < vmax");
    // monotonicity sanity on the approximating function
    for (double v : {v0, std::sqrt(v0 * vmax), vmax}) {
        if (psi.log_slope(v) < -1e-12)
            throw std::invalid_argument("classify_conditions: approximating function must be non-decreasing");
    }

    ConditionReport rep;
    auto lambda_br = [&](double v) {
        double L = w.value(v);
        return w.derivative(v) * psi.log_value(v) / (L * L);
    };
    auto br_equiv = [&](double v) { return psi.log_slope(v) / w.value(v); };
    auto quasi = [&](double v) { return w.value(v) / (v * v); };

    rep.lambda_br = evidence_for(lambda_br, v0, vmax, opts);
    rep.br_equivalent = evidence_for(br_equiv, v0, vmax, opts);
    rep.quasi_analytic = evidence_for(quasi, v0, vmax, opts);
    rep.quasi_analytic_class = rep.quasi_analytic.verdict == Verdict::diverges;

    // Lambda-R ratio samples, log-spaced
    double decades = std::log10(vmax / v0);
    int nsamp = std::max(8, static_cast<int>(decades * opts.samples_per_decade));
    for (int i = 0; i <= nsamp; ++i) {
        double v = v0 * std::pow(vmax / v0, static_cast<double>(i) / nsamp);
        rep.russmann_v.push_back(v);
        rep.russmann_ratio.push_back(psi.log_value(v) / w.value(v));
    }
    rep.russmann_verdict = russmann_verdict_from(rep.russmann_v, rep.russmann_ratio);
    rep.br_verdicts_agree = rep.lambda_br.verdict == rep.br_equivalent.verdict;
    return rep;
}

} // namespace kamred
