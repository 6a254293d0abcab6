#pragma once

#include "fundhedge/bsde.hpp"

#include <cstdint>
#include <span>

namespace fundhedge {

struct PricingOptions {
    SolverOptions solver;
    /// Also solve on N/2 steps and store the price as a convergence diagnostic.
    bool half_step_diagnostic = true;
};

/// The three rates of the repo/cash/collateral setting, checked for the
/// required symmetries: one cash rate r0, one repo rate r1 for the asset, one
/// collateral rate rC, and segregated collateral reinvested at r0.
struct ThreeAccountRates {
    RateSpec cash;        // r0
    RateSpec repo;        // r1
    RateSpec collateral;  // rC
};

ThreeAccountRates three_account_rates(const AccountSet& accounts);

/// Solve with the convention driver of `setup` and attach the setup so the
/// result can be replayed through the wealth engine.
BsdeSolution price_with_setup(const CashFlowStream& stream, const ReplicationSetup& setup,
                              const Lattice& lattice, const RateSpec& drift,
                              const RateSpec& discount, const PricingOptions& options = {});

/// -B_t E[X / B_T] under the given drift, discounting at `discount`.
BsdeSolution price_linear(const CashFlowStream& stream, const Lattice& lattice,
                          const RateSpec& drift, const RateSpec& discount,
                          const PricingOptions& options = {});

struct ExogenousCollateralPrice {
    double value_k3 = 0.0;   // cash-discounted with collateral cost source
    double value_k3t = 0.0;  // collateral-rate discounted with (r0 - rC)(C + V) source
    BsdeSolution k3;
    BsdeSolution k3t;
    Surface<double> hedge;   // from the cash-discounted recursion
};

ExogenousCollateralPrice price_exogenous_collateral(const CashFlowStream& stream,
                                                    const StateFunction& collateral,
                                                    const AccountSet& accounts, const Lattice& lattice,
                                                    const PricingOptions& options = {});

/// C = -V: discount at rC under drift r1 - kappa.
BsdeSolution price_full_collateral(const CashFlowStream& stream, const AccountSet& accounts,
                                   const Lattice& lattice, const PricingOptions& options = {});

/// C = (1 + delta1) V^- - (1 + delta2) V^+, evaluated at the candidate value.
BsdeSolution price_hedger_collateral(const CashFlowStream& stream, const RateSpec& delta1,
                                     const RateSpec& delta2, const AccountSet& accounts,
                                     const Lattice& lattice, const PricingOptions& options = {});

/// Split lending/borrowing rates under PartialNettingShorts or SplitCash,
/// discounting at r^{0,+} under drift r^{0,+} - kappa.
BsdeSolution price_asymmetric_rates(const CashFlowStream& stream, const ConventionSpec& convention,
                                    const AccountSet& accounts, const Lattice& lattice,
                                    const PricingOptions& options = {});

/// Exogenous collateral with only a fraction phi(t, S) of the stock position on
/// repo; the remainder is funded from cash at r0, adding (r1 - r0) zeta.
BsdeSolution price_piterbarg_extension(const CashFlowStream& stream, const StateFunction& collateral,
                                       const FractionPolicy& repo_fraction,
                                       const AccountSet& accounts, const Lattice& lattice,
                                       const PricingOptions& options = {});

Surface<double> hedge_ratio(const BsdeSolution& solution);

/// Feedback policy that reads xi off the solution's hedge surface at the
/// lattice node nearest to (t, S).
StrategySpec hedge_strategy(const BsdeSolution& solution, const Lattice& lattice);

/// Run the solution's replication setup along one lattice path from V_0 = Z(0,0).
WealthLedger replicate(const BsdeSolution& solution, const Lattice& lattice,
                       const CashFlowStream& stream, std::span<const std::uint8_t> moves);

}  // namespace fundhedge
