#include "kamred/counterexample.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace kamred {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;
constexpr double pi = std::numbers::pi;

} // namespace

cplx ScalarSeries::coefficient(const MultiIndex& k) const {
    auto it = coeffs.find(k);
    return it == coeffs.end() ? cplx{} : it->second;
}

void ScalarSeries::set_real_pair(const MultiIndex& k, cplx value) {
    if (value == cplx{})
        return;
    coeffs[k] = value;
    if (!is_zero_index(k))
        coeffs[negate(k)] = std::conj(value);
}

double ScalarSeries::average_real() const {
    return coefficient(MultiIndex(static_cast<std::size_t>(d), 0)).real();
}

double ScalarSeries::evaluate_real(std::span<const double> theta, double tol) const {
    cplx sum{};
    for (const auto& [k, c] : coeffs) {
        double phase = 0;
        for (std::size_t i = 0; i < k.size(); ++i)
            phase += k[i] * theta[i];
        sum += c * std::polar(1.0, two_pi * phase);
    }
    if (std::abs(sum.imag()) > tol * (1.0 + std::abs(sum)))
        throw std::runtime_error("ScalarSeries::evaluate_real: imaginary part above tolerance");
    return sum.real();
}

double ScalarSeries::weighted_norm_minus_mean(const WeightSpec& w, double r) const {
    double s = 0;
    for (const auto& [k, c] : coeffs) {
        int n = l1_norm(k);
        if (n == 0)
            continue;
        s += std::abs(c) * std::exp(two_pi * w.value(n) * r);
    }
    return s;
}

namespace {

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
    return denom == 0 ? 0.0 : (n * sxy - sx * sy) / denom;
}

} // namespace

ResonanceChain find_resonances(const Frequency& freq, const WeightSpec& w,
                               const PsiFunction& psi, int count,
                               const ResonanceOptions& opts) {
    if (count < 1)
        throw std::invalid_argument("find_resonances: count must be >= 1");

    // ratio ln Psi / Lambda at the record points, where the witnesses live
    const auto& records = psi.record_points();
    std::vector<double> ratio(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        int K = records[i];
        ratio[i] = std::log(psi.table_value(K)) / w.value(K);
    }

    std::size_t tail_from = records.size() / 2;
    double limsup = -std::numeric_limits<double>::infinity();
    std::vector<double> lx, ly;
    for (std::size_t i = tail_from; i < records.size(); ++i) {
        limsup = std::max(limsup, ratio[i]);
        if (ratio[i] > 0) {
            lx.push_back(std::log(static_cast<double>(records[i])));
            ly.push_back(std::log(ratio[i]));
        }
    }
    if (!(limsup > 0))
        throw InsufficientResonances(
            "find_resonances: ln Psi / Lambda is non-positive on the table tail; the "
            "Russmann condition holds within the enumerated range (0 modes found)",
            0, count);
    if (lx.size() >= 3 && fit_slope(lx, ly) <= opts.decay_slope_threshold)
        throw InsufficientResonances(
            "find_resonances: ln Psi / Lambda decays along the table (slope below " +
                std::to_string(opts.decay_slope_threshold) +
                "); no resonance chain exists at a radius bounded away from zero (0 modes found)",
            0, count);

    ResonanceChain chain;
    chain.limsup_estimate = limsup;
    chain.r = opts.slack * limsup / (3.0 * pi);

    for (std::size_t i = 0; i < records.size(); ++i) {
        int K = records[i];
        double divisor_abs = two_pi * psi.min_divisor(K); // |2 pi k.omega| at the witness
        double bound = std::exp(-3.0 * pi * chain.r * w.value(K));
        if (divisor_abs <= bound) {
            const auto& k = psi.witness(K);
            double dot = 0;
            for (std::size_t j = 0; j < k.size(); ++j)
                dot += k[j] * freq.omega[j];
            chain.modes.push_back(k);
            chain.divisors.push_back(two_pi * dot);
            chain.margins.push_back(bound - divisor_abs);
            if (static_cast<int>(chain.modes.size()) == count)
                break;
        }
    }
    if (static_cast<int>(chain.modes.size()) < count)
        throw InsufficientResonances(
            "find_resonances: only " + std::to_string(chain.modes.size()) + " of " +
                std::to_string(count) + " requested resonant modes found within the table",
            static_cast<int>(chain.modes.size()), count);

    for (std::size_t j = 0; j < chain.modes.size(); ++j)
        chain.C += std::exp(-pi * chain.r * w.value(l1_norm(chain.modes[j])));
    return chain;
}

CounterexampleCocycle build_counterexample(const ResonanceChain& chain, double rho, double eps,
                                           const WeightSpec& w, const Frequency& freq) {
    if (chain.modes.empty())
        throw std::invalid_argument("build_counterexample: empty resonance chain");
    if (!(eps >= 0))
        throw std::invalid_argument("build_counterexample: eps must be non-negative");

    int d = static_cast<int>(chain.modes.front().size());
    CounterexampleCocycle out;
    out.rho = rho;
    out.eps = eps;
    out.u.d = d;
    out.u.set_real_pair(MultiIndex(static_cast<std::size_t>(d), 0), rho);

    FourierMatrixSeries F(d, /*real_symmetric=*/true);
    Mat2c Jc(Mat2::rotation_generator());
    if (eps > 0) {
        for (std::size_t j = 0; j < chain.modes.size(); ++j) {
            double amp = eps / chain.C * chain.divisors[j]; // real coefficient
            out.u.set_real_pair(chain.modes[j], amp);
            F.set_real_pair(chain.modes[j], Jc * amp);
        }
    }

    out.u_minus_rho_norm = out.u.weighted_norm_minus_mean(w, chain.r);
    if (out.u_minus_rho_norm > eps * (1.0 + 1e-12))
        throw std::runtime_error(
            "build_counterexample: |u - rho|_r exceeds eps; the chain margins are too thin "
            "(lower the resonance slack)");

    out.cocycle.freq = freq;
    out.cocycle.A = Mat2::rotation_generator() * rho;
    out.cocycle.F = std::move(F);
    out.cocycle.r = chain.r;
    return out;
}

NonsolvabilityEvidence certify_nonsolvability(const ScalarSeries& u, const Frequency& freq,
                                              const ResonanceChain& chain) {
    NonsolvabilityEvidence ev;
    bool trivial = true;
    for (const auto& [k, c] : u.coeffs)
        trivial = trivial && (is_zero_index(k) || std::abs(c) == 0.0);
    if (chain.modes.empty() || trivial) {
        ev.solvable = true; // u == rho, solved by v = 0
        ev.coefficients_vanish_at_infinity = true;
        return ev;
    }

    // formal solution coefficients v^(k_j) = u^(k_j) / (2 pi i k_j.omega),
    // with the divisor recomputed from the frequency rather than taken from
    // the chain
    std::vector<cplx> v_hat;
    for (std::size_t j = 0; j < chain.modes.size(); ++j) {
        const auto& k = chain.modes[j];
        double dot = 0;
        for (std::size_t i = 0; i < k.size(); ++i)
            dot += k[i] * freq.omega[i];
        cplx uk = u.coefficient(k);
        cplx vk = uk / cplx(0.0, two_pi * dot);
        v_hat.push_back(vk);
        ev.v_hat_magnitudes.push_back(std::abs(vk));
    }
    ev.expected_magnitude = ev.v_hat_magnitudes.front();
    for (double m : ev.v_hat_magnitudes)
        ev.max_magnitude_deviation =
            std::max(ev.max_magnitude_deviation, std::abs(m - ev.expected_magnitude));

    double l1 = 0;
    for (std::size_t J = 0; J < v_hat.size(); ++J) {
        l1 += ev.v_hat_magnitudes[J];
        ev.l1_partial.push_back(l1);
    }

    // sup-norm lower bounds of the real partial sums on a theta grid
    int d = static_cast<int>(chain.modes.front().size());
    const int grid = 512;
    for (std::size_t J = 0; J < v_hat.size(); ++J) {
        double best = 0;
        std::vector<double> theta(static_cast<std::size_t>(d), 0.0);
        for (int g = 0; g < grid; ++g) {
            // golden-ratio lattice points fill the torus evenly
            theta[0] = std::fmod(0.6180339887498949 * g, 1.0);
            for (int i = 1; i < d; ++i)
                theta[static_cast<std::size_t>(i)] = std::fmod(0.7548776662466927 * g + 0.25 * i, 1.0);
            double sum = 0;
            for (std::size_t j = 0; j <= J; ++j) {
                double phase = 0;
                for (std::size_t i = 0; i < theta.size(); ++i)
                    phase += chain.modes[j][i] * theta[i];
                sum += 2.0 * (v_hat[j] * std::polar(1.0, two_pi * phase)).real();
            }
            best = std::max(best, std::abs(sum));
        }
        ev.sup_partial.push_back(best);
    }

    // Fourier coefficients of a continuous function vanish at infinity;
    // these have constant magnitude along |k_j| -> large
    ev.coefficients_vanish_at_infinity =
        ev.v_hat_magnitudes.back() < 0.5 * ev.expected_magnitude;
    ev.solvable = false;
    return ev;
}

} // namespace kamred
