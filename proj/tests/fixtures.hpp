#pragma once

#include "fundhedge/arbitrage.hpp"
#include "fundhedge/pricing.hpp"
#include "fundhedge/verify.hpp"

#include <algorithm>

namespace fixture {

using namespace fundhedge;

inline constexpr double kSpot = 100.0;
inline constexpr double kStrike = 100.0;
inline constexpr double kVol = 0.2;
inline constexpr double kMaturity = 1.0;

inline EquityModel equity(double kappa = 0.0) {
    EquityModel e;
    e.spot = kSpot;
    e.volatility = kVol;
    e.drift = 0.08;
    e.dividend_yield = RateSpec::flat(kappa);
    return e;
}

inline CashFlowStream sold_call(double K = kStrike) {
    return CashFlowStream::european([K](double S) { return -std::max(S - K, 0.0); });
}

inline CashFlowStream bought_call(double K = kStrike) {
    return CashFlowStream::european([K](double S) { return std::max(S - K, 0.0); });
}

// Three-account setting: cash r0, repo r1, collateral rC, segregated collateral at r0.
inline AccountSet three_accounts(double r0, double r1, double rC) {
    AccountSet a = AccountSet::flat(r0);
    a.assets[0] = AssetFunding::single(RateSpec::flat(r1));
    a.collateral_received = RateSpec::flat(rC);
    a.collateral_posted = RateSpec::flat(rC);
    return a;
}

// All rates 0.03, no dividends.
inline AccountSet ci_flat() { return AccountSet::flat(0.03); }
inline EquityModel ci_flat_equity() { return equity(0.0); }

// kappa = 0.02, r0 = 0.03, r1 = 0.05, rC = 0.01.
inline AccountSet ci_spread() { return three_accounts(0.03, 0.05, 0.01); }
inline EquityModel ci_spread_equity() { return equity(0.02); }

// r0+ = 0.02, r0- = 0.05, r1- = 0.04, r1+ = 0.02, no dividends.
inline AccountSet ci_asym() {
    AccountSet a = AccountSet::flat(0.02);
    a.cash_lend = RateSpec::flat(0.02);
    a.cash_borrow = RateSpec::flat(0.05);
    a.assets[0].lend = RateSpec::flat(0.02);
    a.assets[0].borrow = RateSpec::flat(0.04);
    return a;
}
// CI-ASYM cash rates with a single repo rate 0.04, as split-cash pricing requires.
inline AccountSet ci_asym_repo() {
    AccountSet a = ci_asym();
    a.assets[0] = AssetFunding::single(RateSpec::flat(0.04));
    return a;
}
inline EquityModel ci_asym_equity() { return equity(0.0); }

// r0 = 0.05 > r1 = 0.02, rC = 0.01, no dividends; collateral C = -0.5 S.
inline AccountSet ci_ext() { return three_accounts(0.05, 0.02, 0.01); }
inline EquityModel ci_ext_equity() { return equity(0.0); }

inline StateFunction half_spot_posted() {
    return [](double, double S) { return -0.5 * S; };
}

inline FractionPolicy fraction(double phi) {
    return [phi](const PolicyState&, std::size_t) { return phi; };
}

inline PricingOptions quick() {
    PricingOptions o;
    o.half_step_diagnostic = false;
    return o;
}

}  // namespace fixture
