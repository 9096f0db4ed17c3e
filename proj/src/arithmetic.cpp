#include "kamred/arithmetic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

namespace kamred {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

std::string format_index(const std::vector<int>& k) {
    std::string s = "(";
    for (std::size_t i = 0; i < k.size(); ++i) {
        if (i)
            s += ",";
        s += std::to_string(k[i]);
    }
    s += ")";
    return s;
}

} // namespace

Frequency golden_frequency() {
    return Frequency{{1.0, 0.5 * (1.0 + std::sqrt(5.0))}};
}

std::uint64_t lattice_ball_size(int d, int K) {
    // N(d,K) = sum_i binom(d,i) 2^i binom(K,i)
    long double total = 0;
    for (int i = 0; i <= std::min(d, K); ++i) {
        long double t = 1;
        for (int j = 0; j < i; ++j) {
            t *= static_cast<long double>(d - j) / (j + 1);
            t *= static_cast<long double>(K - j) / (j + 1);
        }
        // t now holds binom(d,i)*binom(K,i); note the split of /(j+1)
        total += t * std::pow(2.0L, i);
    }
    if (total > 1.8e19L)
        return std::numeric_limits<std::uint64_t>::max();
    return static_cast<std::uint64_t>(total);
}

namespace {

// Recursive composition of |k|_1 = shell over d components, canonical
// representatives only (first nonzero component positive).
void enumerate_rec(std::vector<int>& k, int pos, int remaining, bool have_nonzero,
                   const std::function<void(const std::vector<int>&)>& visit) {
    int d = static_cast<int>(k.size());
    if (pos == d - 1) {
        if (remaining == 0 && !have_nonzero)
            return; // k = 0 excluded (shell >= 1 prevents this anyway)
        if (remaining == 0) {
            k[pos] = 0;
            visit(k);
        } else {
            k[pos] = remaining;
            visit(k);
            if (have_nonzero) {
                k[pos] = -remaining;
                visit(k);
            }
        }
        k[pos] = 0;
        return;
    }
    for (int a = 0; a <= remaining; ++a) {
        k[pos] = a;
        enumerate_rec(k, pos + 1, remaining - a, have_nonzero || a > 0, visit);
        if (a > 0 && have_nonzero) {
            k[pos] = -a;
            enumerate_rec(k, pos + 1, remaining - a, true, visit);
        }
    }
    k[pos] = 0;
}

} // namespace

void for_each_canonical_point(int d, int shell,
                              const std::function<void(const std::vector<int>&)>& visit) {
    if (d < 1 || shell < 1)
        return;
    std::vector<int> k(static_cast<std::size_t>(d), 0);
    enumerate_rec(k, 0, shell, false, visit);
}

PsiFunction estimate_psi(const Frequency& freq, int Kmax, std::uint64_t point_budget) {
    if (freq.dim() < 1)
        throw std::invalid_argument("estimate_psi: empty frequency vector");
    if (Kmax < 1)
        throw std::invalid_argument("estimate_psi: Kmax must be >= 1");
    std::uint64_t required = lattice_ball_size(freq.dim(), Kmax);
    if (required > point_budget)
        throw EnumerationBudgetError(
            "estimate_psi: lattice ball of " + std::to_string(required) +
                " points exceeds the enumeration budget of " + std::to_string(point_budget),
            required, point_budget);

    PsiFunction psi;
    psi.d_ = freq.dim();
    psi.table_.reserve(static_cast<std::size_t>(Kmax));
    psi.witnesses_.reserve(static_cast<std::size_t>(Kmax));

    double best = std::numeric_limits<double>::infinity();
    std::vector<int> best_k;
    const auto& w = freq.omega;
    for (int shell = 1; shell <= Kmax; ++shell) {
        for_each_canonical_point(freq.dim(), shell, [&](const std::vector<int>& k) {
            double dot = 0;
            for (std::size_t i = 0; i < w.size(); ++i)
                dot += k[i] * w[i];
            double v = std::abs(dot);
            if (v < 1e-15)
                throw ResonantFrequencyError(
                    "estimate_psi: resonant frequency, |k.omega| < 1e-15 at k = " + format_index(k), k);
            if (v < best || (v == best && k < best_k)) {
                best = v;
                best_k = k;
            }
        });
        psi.table_.push_back(1.0 / (two_pi * best));
        psi.witnesses_.push_back(best_k);
    }
    psi.build_extension();
    return psi;
}

void PsiFunction::build_extension() {
    records_.clear();
    record_logs_.clear();
    for (int K = 1; K <= kmax(); ++K) {
        double lg = std::log(table_[static_cast<std::size_t>(K - 1)]);
        if (records_.empty() || lg > record_logs_.back() + 0.0) {
            records_.push_back(K);
            record_logs_.push_back(lg);
        }
    }
    // extrapolation slope: secant across the records of the last decade,
    // falling back to the last two records
    extrap_slope_ = 0;
    if (records_.size() >= 2) {
        double lo_edge = std::max(1.0, kmax() / 10.0);
        std::size_t first_in_decade = records_.size() - 1;
        for (std::size_t i = 0; i < records_.size(); ++i) {
            if (records_[i] >= lo_edge) {
                first_in_decade = i;
                break;
            }
        }
        std::size_t last = records_.size() - 1;
        std::size_t lo = (first_in_decade < last) ? first_in_decade : last - 1;
        extrap_slope_ = (record_logs_[last] - record_logs_[lo]) /
                        static_cast<double>(records_[last] - records_[lo]);
    }
}

double PsiFunction::table_value(int K) const {
    if (K < 1 || K > kmax())
        throw std::out_of_range("PsiFunction::table_value: K outside [1, Kmax]");
    return table_[static_cast<std::size_t>(K - 1)];
}

const std::vector<int>& PsiFunction::witness(int K) const {
    if (K < 1 || K > kmax())
        throw std::out_of_range("PsiFunction::witness: K outside [1, Kmax]");
    return witnesses_[static_cast<std::size_t>(K - 1)];
}

double PsiFunction::min_divisor(int K) const {
    return 1.0 / (two_pi * table_value(K));
}

double PsiFunction::log_value(double v) const {
    if (!(v >= 1.0))
        throw std::domain_error("PsiFunction: argument below domain [1, inf)");
    if (records_.empty())
        throw std::logic_error("PsiFunction: empty table");
    double last_rec = records_.back();
    if (v >= last_rec)
        return record_logs_.back() + extrap_slope_ * (v - last_rec);
    auto it = std::upper_bound(records_.begin(), records_.end(), v);
    std::size_t i = static_cast<std::size_t>(it - records_.begin());
    if (i == 0)
        return record_logs_.front();
    double t = (v - records_[i - 1]) / static_cast<double>(records_[i] - records_[i - 1]);
    return record_logs_[i - 1] + t * (record_logs_[i] - record_logs_[i - 1]);
}

double PsiFunction::log_slope(double v) const {
    if (!(v >= 1.0))
        throw std::domain_error("PsiFunction: argument below domain [1, inf)");
    if (records_.size() < 2 || v >= records_.back())
        return extrap_slope_;
    auto it = std::upper_bound(records_.begin(), records_.end(), v);
    std::size_t i = static_cast<std::size_t>(it - records_.begin());
    if (i == 0)
        i = 1;
    return (record_logs_[i] - record_logs_[i - 1]) /
           static_cast<double>(records_[i] - records_[i - 1]);
}

double PsiFunction::inverse(double y) const {
    double psi1 = table_value(1);
    if (!(y >= psi1 * (1.0 - 1e-12)))
        throw std::domain_error("PsiFunction::inverse: value below Psi(1)");
    double ly = std::log(y);
    if (ly <= record_logs_.front())
        return records_.front();
    if (ly >= record_logs_.back()) {
        if (extrap_slope_ <= 0)
            throw std::domain_error("PsiFunction::inverse: flat table, no inverse past the last record");
        return records_.back() + (ly - record_logs_.back()) / extrap_slope_;
    }
    auto it = std::upper_bound(record_logs_.begin(), record_logs_.end(), ly);
    std::size_t i = static_cast<std::size_t>(it - record_logs_.begin());
    double t = (ly - record_logs_[i - 1]) / (record_logs_[i] - record_logs_[i - 1]);
    return records_[i - 1] + t * static_cast<double>(records_[i] - records_[i - 1]);
}

void PsiFunction::write_csv(std::ostream& out) const {
    out << "K,psi";
    for (int i = 1; i <= d_; ++i)
        out << ",k" << i;
    out << "\n";
    char buf[64];
    for (int K = 1; K <= kmax(); ++K) {
        std::snprintf(buf, sizeof buf, "%.17g", table_value(K));
        out << K << "," << buf;
        for (int c : witness(K))
            out << "," << c;
        out << "\n";
    }
}

RotationConditionResult check_rotation_condition(double rho, const Frequency& freq,
                                                 const PsiFunction& psi, int K) {
    if (K < 1 || K > psi.kmax())
        throw std::invalid_argument("check_rotation_condition: K outside the tabulated range");
    RotationConditionResult res;
    res.worst_margin = std::numeric_limits<double>::infinity();
    const auto& w = freq.omega;
    for (int shell = 1; shell <= K; ++shell) {
        double bound = 1.0 / psi.table_value(shell);
        for_each_canonical_point(freq.dim(), shell, [&](const std::vector<int>& k) {
            double dot = 0;
            for (std::size_t i = 0; i < w.size(); ++i)
                dot += k[i] * w[i];
            for (int sign : {+1, -1}) {
                double margin = std::abs(2.0 * rho + sign * two_pi * dot) - bound;
                if (margin < res.worst_margin) {
                    res.worst_margin = margin;
                    res.witness = k;
                    res.sign = sign;
                }
            }
        });
    }
    res.satisfied = res.worst_margin >= 0.0;
    return res;
}

} // namespace kamred
