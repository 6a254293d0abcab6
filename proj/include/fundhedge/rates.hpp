#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

namespace fundhedge {

/// Deterministic piecewise-constant rate, continuously compounded per annum.
///
/// The rate equals values()[k] on [breakpoints()[k], breakpoints()[k+1]).
/// The last breakpoint is the horizon of the curve; flat curves use +inf.
class RateSpec {
public:
    RateSpec();
    RateSpec(std::vector<double> breakpoints, std::vector<double> values);

    static RateSpec flat(double rate,
                         double horizon = std::numeric_limits<double>::infinity());

    /// Rate in force at time t (right-continuous; t == horizon maps to the last piece).
    double value_at(double t) const;

    /// Rate in force on the grid step [t0, t0 + dt), read at the step midpoint
    /// so that floating-point noise in t0 cannot select the previous piece.
    double on_step(double t0, double dt) const { return value_at(t0 + 0.5 * dt); }

    /// Integral of the rate over [t0, t1].
    double integral(double t0, double t1) const;

    const std::vector<double>& breakpoints() const noexcept { return breakpoints_; }
    const std::vector<double>& values() const noexcept { return values_; }
    double horizon() const noexcept { return breakpoints_.back(); }
    bool is_flat() const;
    double min_value() const;
    double max_value() const;

    /// Throws DomainError unless the curve covers [0, T].
    void check_covers(double T, const std::string& name = "rate") const;

    /// Throws StepSizeError unless every breakpoint inside (0, T) is a grid time of dt = T/N.
    void check_aligned(double T, std::size_t N, const std::string& name = "rate") const;

    /// Pointwise combination a(t) op b(t) on the merged breakpoint grid.
    static RateSpec combine(const RateSpec& a, const RateSpec& b, double sign);

    RateSpec operator+(const RateSpec& other) const { return combine(*this, other, 1.0); }
    RateSpec operator-(const RateSpec& other) const { return combine(*this, other, -1.0); }

    friend bool operator==(const RateSpec& a, const RateSpec& b) {
        return a.breakpoints_ == b.breakpoints_ && a.values_ == b.values_;
    }

private:
    std::vector<double> breakpoints_;
    std::vector<double> values_;
};

/// exp of the integrated rate over [t0, t1]; DomainError outside [0, horizon].
double accrual(const RateSpec& rate, double t0, double t1);

/// Funding rates of one risky asset: r^{i,+} on positive balances of its
/// funding account (short asset), r^{i,-} on negative ones (long asset).
struct AssetFunding {
    RateSpec lend;
    RateSpec borrow;

    static AssetFunding single(const RateSpec& r) { return {r, r}; }
    bool symmetric() const { return lend == borrow; }
};

/// Every account the hedger can hold.
struct AccountSet {
    RateSpec cash_lend;                 // r^{0,+}
    RateSpec cash_borrow;               // r^{0,-}
    std::vector<AssetFunding> assets;   // r^{i,+}, r^{i,-}
    RateSpec collateral_received;       // r^{C,+}: paid on collateral held
    RateSpec collateral_posted;         // r^{C,-}: earned on collateral posted
    RateSpec collateral_reinvest;       // r^{CC,+}: earned on segregated collateral
    RateSpec collateral_borrow;         // r^{CC,-}: paid to fund posted collateral

    /// All rates equal to r; one risky asset unless stated otherwise.
    static AccountSet flat(double r, std::size_t asset_count = 1);

    bool symmetric_cash() const { return cash_lend == cash_borrow; }
    bool symmetric_collateral() const { return collateral_received == collateral_posted; }
    bool symmetric_reinvestment() const { return collateral_reinvest == collateral_borrow; }

    /// Every rate covers [0,T]; DomainError naming the first offender otherwise.
    void check_covers(double T) const;
    /// Every breakpoint inside (0,T) is a multiple of T/N; StepSizeError otherwise.
    void check_aligned(double T, std::size_t N) const;

    /// Every rate replaced by r (used for bounding linear solves).
    AccountSet with_all_rates(const RateSpec& r) const;
};

/// Per-interval evaluation of r^{0,+} <= r^{0,-} and r^{0,+} <= r^{i,-}.
struct CertificateInterval {
    double start = 0.0;
    double end = 0.0;
    double cash_lend = 0.0;
    double cash_borrow = 0.0;
    std::vector<double> asset_borrow;
    bool cash_ordered = true;
    bool assets_ordered = true;
};

struct OrderingCertificate {
    std::vector<CertificateInterval> intervals;
    bool holds = true;
};

OrderingCertificate ordering_certificate(const AccountSet& accounts, double T);

/// Merged breakpoints of several curves restricted to [0,T], including 0 and T.
std::vector<double> merged_grid(const std::vector<const RateSpec*>& rates, double T);

/// Rates and growth factors applying over one grid step. growth = e^{r dt} - 1
/// computed with expm1 so small steps keep full relative precision.
struct Growth {
    double rate = 0.0;
    double growth = 0.0;
};

struct StepRates {
    double dt = 0.0;
    Growth cash_lend;
    Growth cash_borrow;
    std::vector<Growth> asset_lend;
    std::vector<Growth> asset_borrow;
    Growth collateral_received;
    Growth collateral_posted;
    Growth collateral_reinvest;
    Growth collateral_borrow;
};

Growth step_growth(const RateSpec& rate, double t0, double dt);
StepRates step_rates(const AccountSet& accounts, double t0, double dt);

}  // namespace fundhedge
