#include "fundhedge/collateral.hpp"

#include "fundhedge/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fundhedge {

namespace {
constexpr const char* kModule = "collateral";
inline double pos(double x) { return x > 0.0 ? x : 0.0; }
inline double neg(double x) { return x < 0.0 ? -x : 0.0; }
}  // namespace

CollateralSpec CollateralSpec::exogenous_amount(StateFunction c) {
    CollateralSpec s;
    s.kind = Kind::Exogenous;
    s.exogenous = std::move(c);
    return s;
}

CollateralSpec CollateralSpec::proportional(const RateSpec& alpha) {
    CollateralSpec s;
    s.kind = Kind::Proportional;
    s.alpha = alpha;
    return s;
}

CollateralSpec CollateralSpec::haircut(const RateSpec& delta1, const RateSpec& delta2) {
    CollateralSpec s;
    s.kind = Kind::Haircut;
    s.haircut_negative = delta1;
    s.haircut_positive = delta2;
    return s;
}

CollateralSpec CollateralSpec::full() {
    CollateralSpec s;
    s.kind = Kind::Full;
    return s;
}

double CollateralSpec::wealth_sensitivity() const {
    switch (kind) {
        case Kind::None:
        case Kind::Exogenous: return 0.0;
        case Kind::Proportional:
            return std::max(std::abs(alpha.min_value()), std::abs(alpha.max_value()));
        case Kind::Haircut:
            return 1.0 + std::max({std::abs(haircut_negative.min_value()),
                                   std::abs(haircut_negative.max_value()),
                                   std::abs(haircut_positive.min_value()),
                                   std::abs(haircut_positive.max_value())});
        case Kind::Full: return 1.0;
    }
    return 0.0;
}

std::string CollateralSpec::name() const {
    switch (kind) {
        case Kind::None: return "none";
        case Kind::Exogenous: return "exogenous";
        case Kind::Proportional: return "proportional";
        case Kind::Haircut: return "haircut";
        case Kind::Full: return "full";
    }
    return "?";
}

CollateralAmount collateral_amount(const CollateralSpec& spec, double t, double S, double V) {
    double c = 0.0;
    switch (spec.kind) {
        case CollateralSpec::Kind::None: break;
        case CollateralSpec::Kind::Exogenous: c = spec.exogenous ? spec.exogenous(t, S) : 0.0; break;
        case CollateralSpec::Kind::Proportional: c = spec.alpha.value_at(t) * V; break;
        case CollateralSpec::Kind::Haircut:
            c = (1.0 + spec.haircut_negative.value_at(t)) * neg(V) -
                (1.0 + spec.haircut_positive.value_at(t)) * pos(V);
            break;
        case CollateralSpec::Kind::Full: c = -V; break;
    }
    return {c, pos(c), neg(c)};
}

MarginConvention MarginConvention::partial_rehypothecation(const RateSpec& beta,
                                                           const RateSpec& gamma_cap) {
    MarginConvention m{Kind::PartialRehypo, beta, gamma_cap};
    m.validate();
    return m;
}

double MarginConvention::usable_received(double t0, double dt) const {
    switch (kind) {
        case Kind::Segregated: return 0.0;
        case Kind::FullRehypo: return 1.0;
        case Kind::PartialRehypo: return beta.on_step(t0, dt);
    }
    return 0.0;
}

double MarginConvention::usable_posted(double t0, double dt) const {
    switch (kind) {
        case Kind::Segregated: return 0.0;
        case Kind::FullRehypo: return 1.0;
        case Kind::PartialRehypo: return gamma_cap.on_step(t0, dt);
    }
    return 0.0;
}

void MarginConvention::validate() const {
    if (kind != Kind::PartialRehypo) return;
    if (beta.min_value() < 0.0 || beta.max_value() > 1.0 || gamma_cap.min_value() < 0.0 ||
        gamma_cap.max_value() > 1.0) {
        throw DomainError(kModule, "rehypothecation fractions must lie in [0,1]");
    }
}

std::string MarginConvention::name() const {
    switch (kind) {
        case Kind::Segregated: return "segregated";
        case Kind::FullRehypo: return "full_rehypothecation";
        case Kind::PartialRehypo: return "partial_rehypothecation";
    }
    return "?";
}

double margin_cost_step(MarginConvention::Kind kind, double beta, double gamma_cap,
                        double received, double posted, const StepRates& r) {
    const double g_cp = r.collateral_received.growth;
    const double g_cm = r.collateral_posted.growth;
    const double g_ccp = r.collateral_reinvest.growth;
    const double g_ccm = r.collateral_borrow.growth;
    switch (kind) {
        case MarginConvention::Kind::Segregated:
            return received * (g_ccp - g_cp) - posted * (g_ccm - g_cm);
        case MarginConvention::Kind::FullRehypo:
            return received * (-g_cp) - posted * (-g_cm);
        case MarginConvention::Kind::PartialRehypo:
            return received * ((1.0 - beta) * g_ccp - g_cp) -
                   posted * ((1.0 - gamma_cap) * g_ccm - g_cm);
    }
    return 0.0;
}

double margin_cost_increment(const MarginConvention& conv, double received, double posted,
                             const AccountSet& accounts, double t, double dt) {
    if (received < 0.0 || posted < 0.0) {
        throw DomainError(kModule, "collateral parts C+ and C- must be non-negative");
    }
    if (!(dt > 0.0)) throw DomainError(kModule, "step length must be positive");
    const StepRates r = step_rates(accounts, t, dt);
    return margin_cost_step(conv.kind, conv.usable_received(t, dt), conv.usable_posted(t, dt),
                            received, posted, r);
}

CashFlowStream adjusted_stream(const CashFlowStream& stream, StateFunction fc_increment, double dt) {
    CashFlowStream out = stream;
    if (!fc_increment) return out;
    out.rate = [base = stream.rate, fc = std::move(fc_increment), dt](double t, double S) {
        return (base ? base(t, S) : 0.0) + fc(t, S) / dt;
    };
    return out;
}

RemunerationReport remuneration_monotonicity(const AccountSet& accounts, double T) {
    const auto grid = merged_grid({&accounts.collateral_received, &accounts.collateral_posted,
                                   &accounts.collateral_reinvest, &accounts.collateral_borrow},
                                  T);
    RemunerationReport report;
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
        const double mid = 0.5 * (grid[k] + grid[k + 1]);
        RemunerationInterval iv;
        iv.start = grid[k];
        iv.end = grid[k + 1];
        iv.received = accounts.collateral_received.value_at(mid);
        iv.reinvest = accounts.collateral_reinvest.value_at(mid);
        iv.posted = accounts.collateral_posted.value_at(mid);
        iv.borrow = accounts.collateral_borrow.value_at(mid);
        iv.received_ok = iv.received >= iv.reinvest;
        iv.posted_ok = iv.borrow >= iv.posted;
        if ((!iv.received_ok || !iv.posted_ok) && report.pass) {
            std::ostringstream os;
            os << "interval [" << iv.start << ", " << iv.end << "): ";
            if (!iv.received_ok) os << "r^{C,+}=" << iv.received << " < r^{CC,+}=" << iv.reinvest;
            else os << "r^{CC,-}=" << iv.borrow << " < r^{C,-}=" << iv.posted;
            report.first_failure = os.str();
            report.pass = false;
        }
        report.intervals.push_back(iv);
    }
    return report;
}

}  // namespace fundhedge
