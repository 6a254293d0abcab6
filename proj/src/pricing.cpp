#include "fundhedge/pricing.hpp"

#include "fundhedge/errors.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace fundhedge {

namespace {

constexpr const char* kModule = "bsde-pricer";

using Solver = std::function<BsdeSolution(const Lattice&, const PricingOptions&)>;

BsdeSolution with_half_step(const Solver& solve, const Lattice& lattice, const PricingOptions& options) {
    BsdeSolution sol = solve(lattice, options);
    if (!options.half_step_diagnostic || lattice.steps() < 2) return sol;
    PricingOptions half = options;
    half.half_step_diagnostic = false;
    half.solver.keep_surfaces = false;
    half.solver.verify_uniqueness = false;
    try {
        sol.price_half_steps = solve(lattice.with_steps(lattice.steps() / 2), half).price;
    } catch (const StepSizeError& e) {
        sol.warnings.push_back(std::string("no half-step diagnostic: ") + e.what());
    }
    return sol;
}

ReplicationSetup repo_setup(const AccountSet& accounts, CollateralSpec collateral) {
    ReplicationSetup s;
    s.convention = ConventionSpec::common_unsecured_with_repo(0);
    s.collateral = std::move(collateral);
    s.accounts = accounts;
    return s;
}

}  // namespace

ThreeAccountRates three_account_rates(const AccountSet& accounts) {
    if (!accounts.symmetric_cash()) {
        throw DomainError(kModule, "the three-account setting needs one cash rate r0");
    }
    if (accounts.assets.empty() || !accounts.assets[0].symmetric()) {
        throw DomainError(kModule, "the three-account setting needs one repo rate r1 for the asset");
    }
    if (!accounts.symmetric_collateral()) {
        throw DomainError(kModule, "the three-account setting needs one collateral rate rC");
    }
    if (!(accounts.collateral_reinvest == accounts.cash_lend) ||
        !(accounts.collateral_borrow == accounts.cash_lend)) {
        throw DomainError(kModule, "the three-account setting reinvests and funds collateral at r0");
    }
    return {accounts.cash_lend, accounts.assets[0].lend, accounts.collateral_received};
}

BsdeSolution price_with_setup(const CashFlowStream& stream, const ReplicationSetup& setup,
                              const Lattice& lattice, const RateSpec& drift,
                              const RateSpec& discount, const PricingOptions& options) {
    const Solver solve = [&](const Lattice& lat, const PricingOptions& opt) {
        const Driver driver = make_convention_driver(lat, setup, drift, discount);
        BsdeSolution sol = solve_bsde(lat, driver, stream, drift, opt.solver);
        sol.setup = setup;
        return sol;
    };
    return with_half_step(solve, lattice, options);
}

BsdeSolution price_linear(const CashFlowStream& stream, const Lattice& lattice,
                          const RateSpec& drift, const RateSpec& discount,
                          const PricingOptions& options) {
    const Solver solve = [&](const Lattice& lat, const PricingOptions& opt) {
        return solve_bsde(lat, Driver::linear(discount), stream, drift, opt.solver);
    };
    return with_half_step(solve, lattice, options);
}

ExogenousCollateralPrice price_exogenous_collateral(const CashFlowStream& stream,
                                                    const StateFunction& collateral,
                                                    const AccountSet& accounts, const Lattice& lattice,
                                                    const PricingOptions& options) {
    const ThreeAccountRates r = three_account_rates(accounts);
    const RateSpec drift = martingale_drift(accounts, lattice.equity());
    ExogenousCollateralPrice out;

    out.k3 = price_with_setup(stream, repo_setup(accounts, CollateralSpec::exogenous_amount(collateral)),
                              lattice, drift, r.cash, options);
    out.k3.label = "cash-discounted";

    const Solver solve_k3t = [&](const Lattice& lat, const PricingOptions& opt) {
        const Driver driver = discount_switch_driver(
            r.collateral, r.cash,
            [collateral](const DriverContext& ctx, double V) { return collateral(ctx.t, ctx.spot) + V; },
            1.0, SourceConvention::LeftEndpoint, "collateral-rate-discounted");
        return solve_bsde(lat, driver, stream, drift, opt.solver);
    };
    out.k3t = with_half_step(solve_k3t, lattice, options);

    out.value_k3 = out.k3.price;
    out.value_k3t = out.k3t.price;
    out.hedge = out.k3.hedge;
    return out;
}

BsdeSolution price_full_collateral(const CashFlowStream& stream, const AccountSet& accounts,
                                   const Lattice& lattice, const PricingOptions& options) {
    const ThreeAccountRates r = three_account_rates(accounts);
    const RateSpec drift = martingale_drift(accounts, lattice.equity());
    BsdeSolution sol = price_linear(stream, lattice, drift, r.collateral, options);
    sol.label = "full-collateral";
    sol.setup = repo_setup(accounts, CollateralSpec::full());
    return sol;
}

BsdeSolution price_hedger_collateral(const CashFlowStream& stream, const RateSpec& delta1,
                                     const RateSpec& delta2, const AccountSet& accounts,
                                     const Lattice& lattice, const PricingOptions& options) {
    const ThreeAccountRates r = three_account_rates(accounts);
    const RateSpec drift = martingale_drift(accounts, lattice.equity());
    BsdeSolution sol = price_with_setup(
        stream, repo_setup(accounts, CollateralSpec::haircut(delta1, delta2)), lattice, drift, r.cash, options);
    sol.label = "hedger-collateral";
    return sol;
}

BsdeSolution price_asymmetric_rates(const CashFlowStream& stream, const ConventionSpec& convention,
                                    const AccountSet& accounts, const Lattice& lattice,
                                    const PricingOptions& options) {
    if (convention.kind != ConventionSpec::Kind::PartialNettingShorts &&
        convention.kind != ConventionSpec::Kind::SplitCash) {
        throw DomainError(kModule, "asymmetric-rate pricing needs partial_netting_shorts or split_cash");
    }
    ReplicationSetup setup;
    setup.convention = convention;
    setup.collateral = CollateralSpec::none();
    setup.accounts = accounts;
    const RateSpec drift = accounts.cash_lend - lattice.equity().dividend_yield;
    BsdeSolution sol = price_with_setup(stream, setup, lattice, drift, accounts.cash_lend, options);
    sol.label = "asymmetric-rates";
    const OrderingCertificate cert = ordering_certificate(accounts, lattice.maturity());
    if (!cert.holds) {
        sol.warnings.push_back("rate ordering r0+ <= r0- and r0+ <= ri- fails on some interval");
    }
    return sol;
}

BsdeSolution price_piterbarg_extension(const CashFlowStream& stream, const StateFunction& collateral,
                                       const FractionPolicy& repo_fraction,
                                       const AccountSet& accounts, const Lattice& lattice,
                                       const PricingOptions& options) {
    const ThreeAccountRates r = three_account_rates(accounts);
    const RateSpec drift = martingale_drift(accounts, lattice.equity());
    ReplicationSetup setup = repo_setup(accounts, CollateralSpec::exogenous_amount(collateral));
    setup.repo_fraction = repo_fraction;
    BsdeSolution sol = price_with_setup(stream, setup, lattice, drift, r.cash, options);
    sol.label = "partial-repo";
    return sol;
}

Surface<double> hedge_ratio(const BsdeSolution& solution) {
    if (!solution.has_surfaces()) throw DomainError(kModule, "solution was computed without surfaces");
    return solution.hedge;
}

StrategySpec hedge_strategy(const BsdeSolution& solution, const Lattice& lattice) {
    if (!solution.has_surfaces()) throw DomainError(kModule, "solution was computed without surfaces");
    auto surface = std::make_shared<const Surface<double>>(solution.hedge);
    const double log_step = std::log(lattice.up());
    const double s0 = lattice.equity().spot;
    const double dt = lattice.dt();
    const std::size_t N = lattice.steps();
    StrategySpec s;
    s.hedge = [surface, log_step, s0, dt, N](const PolicyState& state, std::span<double> units) {
        const double layer = std::floor(state.t / dt + 1e-9);
        const std::size_t n = std::min<std::size_t>(N - 1, static_cast<std::size_t>(std::max(0.0, layer)));
        const double k = std::log(state.spots[0] / s0) / log_step;
        const double jj = std::round(0.5 * (k + static_cast<double>(n)));
        const std::size_t j = static_cast<std::size_t>(std::clamp(jj, 0.0, static_cast<double>(n)));
        units[0] = surface->at(n, j);
    };
    if (solution.setup) s.repo_fraction = solution.setup->repo_fraction;
    return s;
}

WealthLedger replicate(const BsdeSolution& solution, const Lattice& lattice,
                       const CashFlowStream& stream, std::span<const std::uint8_t> moves) {
    if (!solution.setup) {
        throw DomainError(kModule, "solution '" + solution.label + "' carries no replication setup");
    }
    const ReplicationSetup& setup = *solution.setup;
    return evolve_wealth(hedge_strategy(solution, lattice), stream, setup.collateral, setup.convention,
                         setup.accounts, Scenario::from_lattice(lattice, moves), solution.price);
}

}  // namespace fundhedge
