#pragma once

#include "kamred/weights.hpp"

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <vector>

namespace kamred {

/// Frequency vector omega in R^d driving the torus translation flow.
struct Frequency {
    std::vector<double> omega;
    int dim() const { return static_cast<int>(omega.size()); }
};

/// Golden-mean test frequency (1, (1+sqrt 5)/2), d = 2.
Frequency golden_frequency();

struct ResonantFrequencyError : std::runtime_error {
    ResonantFrequencyError(std::string msg, std::vector<int> k)
        : std::runtime_error(std::move(msg)), witness(std::move(k)) {}
    std::vector<int> witness;
};

struct EnumerationBudgetError : std::runtime_error {
    EnumerationBudgetError(std::string msg, std::uint64_t req, std::uint64_t bud)
        : std::runtime_error(std::move(msg)), required(req), budget(bud) {}
    std::uint64_t required, budget;
};

/// Number of lattice points k in Z^d with |k|_1 <= K (for the budget guard).
std::uint64_t lattice_ball_size(int d, int K);

/// Approximating function Psi(K) = max{ |2 pi k.omega|^{-1} : 0 < |k|_1 <= K },
/// tabulated at integers by exhaustive lattice enumeration, with the
/// minimizing multi-index recorded per K.
///
/// The continuous extension interpolates ln Psi linearly in v across the
/// *record points* (the K where the table strictly increases) and
/// extrapolates past the table with the slope of the last decade of records.
/// A flat run in the table admits no increasing interpolation through every
/// integer, so the extension is a strictly increasing continuous majorant:
/// it equals the table exactly at record points and exceeds it between them.
/// Every consumer of small-divisor bounds remains valid under a majorant.
class PsiFunction final : public PsiCurve {
public:
    int dim() const { return d_; }
    int kmax() const { return static_cast<int>(table_.size()); }

    /// Exact tabulated value at integer K in [1, kmax].
    double table_value(int K) const;
    /// Minimizing multi-index for the table value at K (canonical sign:
    /// first nonzero component positive; ties broken lexicographically).
    const std::vector<int>& witness(int K) const;
    /// min |k.omega| over 0 < |k| <= K  (= 1/(2 pi Psi(K))).
    double min_divisor(int K) const;

    // strictly increasing continuous extension
    double log_value(double v) const override;
    double log_slope(double v) const override;

    /// Inverse of the extension; y below Psi(1) is a domain error.
    double inverse(double y) const;
    /// True when v lies past the tabulated (enumerated) range.
    bool beyond_table(double v) const { return v > kmax() + 1e-12; }

    const std::vector<int>& record_points() const { return records_; }
    double extrapolation_slope() const { return extrap_slope_; }

    /// CSV export: K, psi, witness components.
    void write_csv(std::ostream& out) const;

    friend PsiFunction estimate_psi(const Frequency&, int, std::uint64_t);

private:
    int d_ = 0;
    std::vector<double> table_;                // index K-1
    std::vector<std::vector<int>> witnesses_;  // index K-1
    std::vector<int> records_;                 // K where the table strictly increases
    std::vector<double> record_logs_;          // ln table at records_
    double extrap_slope_ = 0;

    void build_extension();
};

/// Exhaustive enumeration of 0 < |k|_1 <= Kmax.  Throws
/// ResonantFrequencyError when some |k.omega| < 1e-15 (witness named),
/// EnumerationBudgetError when the lattice ball exceeds point_budget.
PsiFunction estimate_psi(const Frequency& freq, int Kmax,
                         std::uint64_t point_budget = 400000000ULL);

/// Arithmetic condition on a rotation number rho:
/// |2 rho +/- 2 pi k.omega| >= 1/Psi(|k|) for all 0 < |k| <= K.
/// Equality passes.  The worst margin and its witness are reported.
struct RotationConditionResult {
    bool satisfied = true;
    double worst_margin = 0;
    std::vector<int> witness;
    int sign = +1; // sign of the 2 pi k.omega term in the binding combination
};

RotationConditionResult check_rotation_condition(double rho, const Frequency& freq,
                                                 const PsiFunction& psi, int K);

/// Visits every canonical lattice point (first nonzero component positive)
/// with |k|_1 = shell, in deterministic order.  Exposed for enumeration
/// cross-checks and small-divisor scans.
void for_each_canonical_point(int d, int shell,
                              const std::function<void(const std::vector<int>&)>& visit);

} // namespace kamred
