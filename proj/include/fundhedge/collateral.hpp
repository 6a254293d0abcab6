#pragma once

#include "fundhedge/cashflow.hpp"
#include "fundhedge/rates.hpp"

#include <string>
#include <vector>

namespace fundhedge {

/// How much collateral the hedger holds at a given state. Positive C means
/// collateral received by the hedger, negative C collateral posted.
struct CollateralSpec {
    enum class Kind { None, Exogenous, Proportional, Haircut, Full };

    Kind kind = Kind::None;
    StateFunction exogenous;       // C(t, S) for Exogenous
    RateSpec alpha;                // C = alpha V for Proportional
    RateSpec haircut_negative;     // delta^1: C = (1 + delta^1) V^- when V < 0
    RateSpec haircut_positive;     // delta^2: C = -(1 + delta^2) V^+ when V > 0

    static CollateralSpec none() { return {}; }
    static CollateralSpec exogenous_amount(StateFunction c);
    static CollateralSpec proportional(const RateSpec& alpha);
    static CollateralSpec haircut(const RateSpec& delta1, const RateSpec& delta2);
    static CollateralSpec full();

    /// True when the amount depends on the hedger's wealth.
    bool endogenous() const {
        return kind == Kind::Proportional || kind == Kind::Haircut || kind == Kind::Full;
    }
    /// Bound on |dC/dV|.
    double wealth_sensitivity() const;
    std::string name() const;
};

struct CollateralAmount {
    double value = 0.0;     // C
    double received = 0.0;  // C^+
    double posted = 0.0;    // C^-
};

CollateralAmount collateral_amount(const CollateralSpec& spec, double t, double S, double V);

/// Treatment of collateral held or posted.
///
/// Segregated: received cash sits in the B^{CC,+} account and posted cash is
/// borrowed on B^{CC,-}. FullRehypo: collateral flows through the hedger's
/// cash. PartialRehypo: a fraction beta of received and gamma_cap of posted
/// collateral flows through cash, the rest is segregated.
struct MarginConvention {
    enum class Kind { Segregated, FullRehypo, PartialRehypo };

    Kind kind = Kind::Segregated;
    RateSpec beta;
    RateSpec gamma_cap;

    static MarginConvention segregated() { return {}; }
    static MarginConvention full_rehypothecation() { return {Kind::FullRehypo, {}, {}}; }
    static MarginConvention partial_rehypothecation(const RateSpec& beta, const RateSpec& gamma_cap);

    /// Fractions of received / posted collateral that pass through cash on the step.
    double usable_received(double t0, double dt) const;
    double usable_posted(double t0, double dt) const;

    void validate() const;
    std::string name() const;
};

/// Margin-account gain over one step with exact exponential accrual.
double margin_cost_increment(const MarginConvention& conv, double received, double posted,
                             const AccountSet& accounts, double t, double dt);

/// Same increment on precomputed step rates; beta and gamma_cap already resolved.
double margin_cost_step(MarginConvention::Kind kind, double beta, double gamma_cap,
                        double received, double posted, const StepRates& rates);

/// A^C = A + F^C, where fc_increment(t_n, S_n) is the margin-account gain on
/// [t_n, t_{n+1}) paid at t_{n+1}. It is carried as an extra continuous rate.
CashFlowStream adjusted_stream(const CashFlowStream& stream, StateFunction fc_increment, double dt);

struct RemunerationInterval {
    double start = 0.0;
    double end = 0.0;
    double received = 0.0;   // r^{C,+}
    double reinvest = 0.0;   // r^{CC,+}
    double posted = 0.0;     // r^{C,-}
    double borrow = 0.0;     // r^{CC,-}
    bool received_ok = true; // r^{C,+} >= r^{CC,+}
    bool posted_ok = true;   // r^{CC,-} >= r^{C,-}
};

struct RemunerationReport {
    std::vector<RemunerationInterval> intervals;
    bool pass = true;
    std::string first_failure;  // empty when pass
};

RemunerationReport remuneration_monotonicity(const AccountSet& accounts, double T);

}  // namespace fundhedge
