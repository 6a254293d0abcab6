#pragma once

#include "fundhedge/cashflow.hpp"
#include "fundhedge/collateral.hpp"
#include "fundhedge/market.hpp"
#include "fundhedge/rates.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace fundhedge {

/// Trading convention: which accounts fund which positions.
///
/// SingleCurve: every position is funded from one symmetric cash account.
/// CommonUnsecuredWithRepo: assets 1..k from symmetric cash, the rest on repo.
/// SplitCash: as above but cash lends at r^{0,+} and borrows at r^{0,-}.
/// NettingPerAsset: each asset nets against its own B^{i,+}/B^{i,-} account.
/// PartialNettingShorts: short proceeds pool into cash, longs borrow at r^{i,-}.
struct ConventionSpec {
    enum class Kind { SingleCurve, CommonUnsecuredWithRepo, SplitCash, NettingPerAsset, PartialNettingShorts };

    Kind kind = Kind::SingleCurve;
    std::size_t unsecured_assets = 0;  // k, used by CommonUnsecuredWithRepo and SplitCash
    MarginConvention margin;

    static ConventionSpec single_curve() { return {Kind::SingleCurve, 0, {}}; }
    static ConventionSpec common_unsecured_with_repo(std::size_t k) { return {Kind::CommonUnsecuredWithRepo, k, {}}; }
    static ConventionSpec split_cash(std::size_t k) { return {Kind::SplitCash, k, {}}; }
    static ConventionSpec netting_per_asset() { return {Kind::NettingPerAsset, 0, {}}; }
    static ConventionSpec partial_netting_shorts() { return {Kind::PartialNettingShorts, 0, {}}; }

    ConventionSpec with_margin(MarginConvention m) const {
        ConventionSpec c = *this;
        c.margin = std::move(m);
        return c;
    }

    std::string name() const;

    /// Throws ConventionError when the accounts cannot support the convention
    /// (asymmetric cash under SingleCurve, asymmetric repo rate, k > d, ...).
    void validate(const AccountSet& accounts) const;
};

/// Balances held over one step and the interest they earn, in currency.
struct FundingState {
    double cash = 0.0;                  // net unsecured cash balance x
    std::vector<double> asset_lend;     // >= 0, balance on B^{i,+}
    std::vector<double> asset_borrow;   // <= 0, balance on B^{i,-}
    double segregated_received = 0.0;   // (1 - beta) C^+ on B^{CC,+}
    double segregated_posted = 0.0;     // -(1 - gamma) C^- on B^{CC,-}
    double collateral_liability = 0.0;  // -C^+ owed on B^{C,+}
    double collateral_claim = 0.0;      // C^- claimed on B^{C,-}
    double funding = 0.0;               // dF over the step
    double margin = 0.0;                // dF^C over the step
};

/// Fraction of each repo-funded asset position carried on its repo account;
/// 1 restores the repo constraint. Indexed by asset.
using RepoFractions = std::span<const double>;

/// The one-step funding map shared by the wealth engine and the pricing
/// drivers. Positions are fixed at the step start, balances accrue with
/// exp(r dt) over the step.
void funding_step(const ConventionSpec& convention, const StepRates& rates, double beta,
                  double gamma_cap, double wealth, std::span<const double> spots,
                  std::span<const double> units, const CollateralAmount& collateral,
                  RepoFractions repo_fraction, FundingState& out);

/// State seen by a feedback policy at the start of step `step`.
struct PolicyState {
    std::size_t step = 0;
    double t = 0.0;
    std::span<const double> spots;
};

using HedgePolicy = std::function<void(const PolicyState&, std::span<double> units)>;
using FractionPolicy = std::function<double(const PolicyState&, std::size_t asset)>;

/// Hedge-ratio policy plus the optional repo fraction policy (defaults to 1).
struct StrategySpec {
    HedgePolicy hedge;
    FractionPolicy repo_fraction;

    static StrategySpec constant(std::vector<double> units);
};

/// One realized trajectory of every asset on a uniform grid.
struct Scenario {
    double maturity = 0.0;
    std::size_t steps = 0;
    std::size_t assets = 1;
    std::vector<double> spots;              // (steps + 1) x assets, row-major
    std::vector<RateSpec> dividend_yields;  // one per asset

    double time(std::size_t n) const {
        return maturity * static_cast<double>(n) / static_cast<double>(steps);
    }
    std::span<const double> at(std::size_t n) const { return {spots.data() + n * assets, assets}; }

    /// Lattice path given as up (1) / down (0) moves.
    static Scenario from_lattice(const Lattice& lattice, std::span<const std::uint8_t> moves);
    /// Path m of each ensemble, one ensemble per asset.
    static Scenario from_paths(const std::vector<const PathEnsemble*>& ensembles, std::size_t m,
                               std::vector<RateSpec> dividend_yields);
};

/// Per-step record of a strategy's wealth and its decomposition. Row n holds
/// the state at t_n after flows dated t_n; positions are those held on
/// [t_n, t_{n+1}) and are left at zero on the final row.
struct WealthLedger {
    std::size_t steps = 0;
    std::size_t assets = 1;
    double initial_wealth = 0.0;
    std::vector<double> t;
    std::vector<double> spots;        // (steps + 1) x assets
    std::vector<double> wealth;       // V
    std::vector<double> gains;        // G
    std::vector<double> funding;      // F
    std::vector<double> margin;       // F^C
    std::vector<double> flows;        // A to date
    std::vector<double> flow_step;    // A increment dated t_n
    std::vector<double> price_gains;  // sum of xi dS
    std::vector<double> dividend_gains;  // sum of xi dA^i
    std::vector<double> netted;       // V^{cld}
    std::vector<double> cash;         // gamma, the cash process
    std::vector<double> collateral;   // C
    std::vector<double> units;        // xi, (steps + 1) x assets
    // Account units psi = balance / B_t.
    std::vector<double> cash_lend_units;
    std::vector<double> cash_borrow_units;
    std::vector<double> asset_lend_units;    // (steps + 1) x assets
    std::vector<double> asset_borrow_units;  // (steps + 1) x assets
    std::vector<double> segregated_received_units;
    std::vector<double> segregated_posted_units;
    std::vector<double> collateral_liability_units;
    std::vector<double> collateral_claim_units;

    void resize(std::size_t steps, std::size_t assets);
    double terminal_wealth() const { return wealth.back(); }
};

WealthLedger evolve_wealth(const StrategySpec& strategy, const CashFlowStream& stream,
                           const CollateralSpec& collateral, const ConventionSpec& convention,
                           const AccountSet& accounts, const Scenario& scenario, double initial_wealth);

struct Decomposition {
    std::vector<double> gains;
    std::vector<double> funding;
    std::vector<double> margin;
    std::vector<double> flows;
};

Decomposition decompose(const WealthLedger& ledger);

/// V^{cld}: flows received are removed with B^{0,-} accrual, flows paid are
/// added back with B^{0,+} accrual, netting each step's flows before splitting.
std::vector<double> netted_wealth(const WealthLedger& ledger, const AccountSet& accounts);

/// gamma_t = V_0 + F_t + F^C_t + sum of xi dA^i + A_t.
std::vector<double> cash_process(const WealthLedger& ledger);

/// max |V_t - (sum of xi dS) - gamma_t|.
double cash_identity_residual(const WealthLedger& ledger);

/// max |V - (V_0 + G + F + F^C + A)|.
double self_financing_residual(const WealthLedger& ledger);

}  // namespace fundhedge
