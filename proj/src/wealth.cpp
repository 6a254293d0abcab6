#include "fundhedge/wealth.hpp"

#include "fundhedge/errors.hpp"

#include <algorithm>
#include <cmath>

namespace fundhedge {

namespace {
constexpr const char* kModule = "wealth-engine";
inline double pos(double x) { return x > 0.0 ? x : 0.0; }
inline double neg(double x) { return x < 0.0 ? -x : 0.0; }
}  // namespace

std::string ConventionSpec::name() const {
    switch (kind) {
        case Kind::SingleCurve: return "single_curve";
        case Kind::CommonUnsecuredWithRepo: return "common_unsecured_with_repo";
        case Kind::SplitCash: return "split_cash";
        case Kind::NettingPerAsset: return "netting_per_asset";
        case Kind::PartialNettingShorts: return "partial_netting_shorts";
    }
    return "?";
}

void ConventionSpec::validate(const AccountSet& accounts) const {
    const bool needs_symmetric_cash =
        kind == Kind::SingleCurve || kind == Kind::CommonUnsecuredWithRepo;
    if (needs_symmetric_cash && !accounts.symmetric_cash()) {
        throw ConventionError(kModule, name() + " needs a single cash rate (cash_lend == cash_borrow)");
    }
    if (kind == Kind::CommonUnsecuredWithRepo || kind == Kind::SplitCash) {
        if (unsecured_assets > accounts.assets.size()) {
            throw ConventionError(kModule, "split index k exceeds the number of assets");
        }
        for (std::size_t i = unsecured_assets; i < accounts.assets.size(); ++i) {
            if (!accounts.assets[i].symmetric()) {
                throw ConventionError(kModule, "repo-funded asset " + std::to_string(i + 1) +
                                                   " needs a single repo rate");
            }
        }
    }
    margin.validate();
}

void funding_step(const ConventionSpec& convention, const StepRates& rates, double beta,
                  double gamma_cap, double wealth, std::span<const double> spots,
                  std::span<const double> units, const CollateralAmount& collateral,
                  RepoFractions repo_fraction, FundingState& out) {
    const std::size_t d = spots.size();
    out.asset_lend.assign(d, 0.0);
    out.asset_borrow.assign(d, 0.0);

    double x = wealth;
    switch (convention.kind) {
        case ConventionSpec::Kind::SingleCurve:
            for (std::size_t i = 0; i < d; ++i) x -= units[i] * spots[i];
            break;
        case ConventionSpec::Kind::CommonUnsecuredWithRepo:
        case ConventionSpec::Kind::SplitCash: {
            const std::size_t k = std::min(convention.unsecured_assets, d);
            for (std::size_t i = 0; i < k; ++i) x -= units[i] * spots[i];
            for (std::size_t i = k; i < d; ++i) {
                const double position = units[i] * spots[i];
                const double phi = repo_fraction.empty() ? 1.0 : repo_fraction[i];
                const double repo = -phi * position;
                if (phi != 1.0) x -= (1.0 - phi) * position;
                if (repo > 0.0) out.asset_lend[i] = repo;
                else out.asset_borrow[i] = repo;
            }
            break;
        }
        case ConventionSpec::Kind::NettingPerAsset:
            for (std::size_t i = 0; i < d; ++i) {
                const double position = units[i] * spots[i];
                out.asset_lend[i] = neg(position);
                out.asset_borrow[i] = -pos(position);
            }
            break;
        case ConventionSpec::Kind::PartialNettingShorts:
            for (std::size_t i = 0; i < d; ++i) {
                const double position = units[i] * spots[i];
                x += neg(position);
                out.asset_borrow[i] = -pos(position);
            }
            break;
    }
    x += beta * collateral.received - gamma_cap * collateral.posted;
    out.cash = x;

    double funding = pos(x) * rates.cash_lend.growth - neg(x) * rates.cash_borrow.growth;
    for (std::size_t i = 0; i < d; ++i) {
        if (out.asset_lend[i] != 0.0) funding += out.asset_lend[i] * rates.asset_lend[i].growth;
        if (out.asset_borrow[i] != 0.0) funding += out.asset_borrow[i] * rates.asset_borrow[i].growth;
    }
    out.funding = funding;

    out.segregated_received = (1.0 - beta) * collateral.received;
    out.segregated_posted = -(1.0 - gamma_cap) * collateral.posted;
    out.collateral_liability = -collateral.received;
    out.collateral_claim = collateral.posted;
    out.margin = margin_cost_step(convention.margin.kind, beta, gamma_cap, collateral.received,
                                  collateral.posted, rates);
}

StrategySpec StrategySpec::constant(std::vector<double> units) {
    StrategySpec s;
    s.hedge = [u = std::move(units)](const PolicyState&, std::span<double> out) {
        std::copy(u.begin(), u.end(), out.begin());
    };
    return s;
}

Scenario Scenario::from_lattice(const Lattice& lattice, std::span<const std::uint8_t> moves) {
    if (moves.size() != lattice.steps()) {
        throw DomainError(kModule, "lattice path needs one move per step");
    }
    Scenario s;
    s.maturity = lattice.maturity();
    s.steps = lattice.steps();
    s.assets = 1;
    s.dividend_yields = {lattice.equity().dividend_yield};
    s.spots.resize(s.steps + 1);
    std::size_t j = 0;
    s.spots[0] = lattice.spot(0, 0);
    for (std::size_t n = 0; n < s.steps; ++n) {
        j += moves[n] ? 1 : 0;
        s.spots[n + 1] = lattice.spot(n + 1, j);
    }
    return s;
}

Scenario Scenario::from_paths(const std::vector<const PathEnsemble*>& ensembles, std::size_t m,
                              std::vector<RateSpec> dividend_yields) {
    if (ensembles.empty()) throw DomainError(kModule, "no path ensembles supplied");
    if (dividend_yields.size() != ensembles.size()) {
        throw DomainError(kModule, "one dividend yield per asset is required");
    }
    Scenario s;
    s.maturity = ensembles.front()->maturity;
    s.steps = ensembles.front()->steps;
    s.assets = ensembles.size();
    s.dividend_yields = std::move(dividend_yields);
    s.spots.resize((s.steps + 1) * s.assets);
    for (std::size_t i = 0; i < s.assets; ++i) {
        const PathEnsemble& e = *ensembles[i];
        if (e.steps != s.steps || e.maturity != s.maturity || m >= e.paths) {
            throw DomainError(kModule, "path ensembles disagree on grid or path count");
        }
        for (std::size_t n = 0; n <= s.steps; ++n) s.spots[n * s.assets + i] = e.at(m, n);
    }
    return s;
}

void WealthLedger::resize(std::size_t n_steps, std::size_t n_assets) {
    steps = n_steps;
    assets = n_assets;
    const std::size_t rows = n_steps + 1;
    for (auto* v : {&t, &wealth, &gains, &funding, &margin, &flows, &flow_step, &price_gains,
                    &dividend_gains, &netted, &cash, &collateral, &cash_lend_units,
                    &cash_borrow_units, &segregated_received_units, &segregated_posted_units,
                    &collateral_liability_units, &collateral_claim_units}) {
        v->assign(rows, 0.0);
    }
    for (auto* v : {&spots, &units, &asset_lend_units, &asset_borrow_units}) {
        v->assign(rows * n_assets, 0.0);
    }
}

WealthLedger evolve_wealth(const StrategySpec& strategy, const CashFlowStream& stream,
                           const CollateralSpec& collateral, const ConventionSpec& convention,
                           const AccountSet& accounts, const Scenario& scenario,
                           double initial_wealth) {
    convention.validate(accounts);
    const std::size_t N = scenario.steps;
    const std::size_t d = scenario.assets;
    if (N == 0) throw DomainError(kModule, "scenario has no steps");
    if (accounts.assets.size() < d) {
        throw ConventionError(kModule, "the account set funds fewer assets than the scenario holds");
    }
    if (!strategy.hedge) throw DomainError(kModule, "strategy has no hedge policy");
    const double T = scenario.maturity;
    const double dt = T / static_cast<double>(N);
    accounts.check_covers(T);
    const auto schedule = stream.schedule(T, N);

    WealthLedger L;
    L.resize(N, d);
    L.initial_wealth = initial_wealth;

    std::vector<double> units(d, 0.0);
    std::vector<double> fractions;
    FundingState fs;
    double V = initial_wealth;
    double G = 0.0, F = 0.0, FC = 0.0, A = 0.0, price_g = 0.0, div_g = 0.0;

    for (std::size_t n = 0; n <= N; ++n) {
        const double t = scenario.time(n);
        const auto S = scenario.at(n);
        L.t[n] = t;
        std::copy(S.begin(), S.end(), L.spots.begin() + static_cast<std::ptrdiff_t>(n * d));
        L.wealth[n] = V;
        L.gains[n] = G;
        L.funding[n] = F;
        L.margin[n] = FC;
        L.flows[n] = A;
        L.price_gains[n] = price_g;
        L.dividend_gains[n] = div_g;
        if (n == N) break;

        const PolicyState state{n, t, S};
        std::fill(units.begin(), units.end(), 0.0);
        strategy.hedge(state, units);
        fractions.clear();
        if (strategy.repo_fraction) {
            for (std::size_t i = 0; i < d; ++i) fractions.push_back(strategy.repo_fraction(state, i));
        }

        const StepRates rates = step_rates(accounts, t, dt);
        const double beta = convention.margin.usable_received(t, dt);
        const double gamma_cap = convention.margin.usable_posted(t, dt);
        const CollateralAmount C = collateral_amount(collateral, t, S[0], V);
        funding_step(convention, rates, beta, gamma_cap, V, S, units, C, fractions, fs);

        const double b_lend = accrual(accounts.cash_lend, 0.0, t);
        const double b_borrow = accrual(accounts.cash_borrow, 0.0, t);
        L.cash_lend_units[n] = pos(fs.cash) / b_lend;
        L.cash_borrow_units[n] = -neg(fs.cash) / b_borrow;
        for (std::size_t i = 0; i < d; ++i) {
            L.units[n * d + i] = units[i];
            L.asset_lend_units[n * d + i] = fs.asset_lend[i] / accrual(accounts.assets[i].lend, 0.0, t);
            L.asset_borrow_units[n * d + i] =
                fs.asset_borrow[i] / accrual(accounts.assets[i].borrow, 0.0, t);
        }
        L.collateral[n] = C.value;
        L.segregated_received_units[n] =
            fs.segregated_received / accrual(accounts.collateral_reinvest, 0.0, t);
        L.segregated_posted_units[n] = fs.segregated_posted / accrual(accounts.collateral_borrow, 0.0, t);
        L.collateral_liability_units[n] =
            fs.collateral_liability / accrual(accounts.collateral_received, 0.0, t);
        L.collateral_claim_units[n] = fs.collateral_claim / accrual(accounts.collateral_posted, 0.0, t);

        const auto S1 = scenario.at(n + 1);
        double dG_price = 0.0;
        double dG_div = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            dG_price += units[i] * (S1[i] - S[i]);
            const double kappa = scenario.dividend_yields[i].on_step(t, dt);
            if (kappa != 0.0) dG_div += units[i] * S1[i] * std::expm1(kappa * dt);
        }
        const double t1 = scenario.time(n + 1);
        double dA = stream.rate_at(t, S[0]) * dt;
        for (const LumpFlow* lump : schedule[n + 1]) dA += lump->amount(t1, S1[0]);
        if (n + 1 == N) dA += stream.terminal_at(S1[0]);

        const double dG = dG_price + dG_div;
        V = V + dG + fs.funding + fs.margin + dA;
        G += dG;
        F += fs.funding;
        FC += fs.margin;
        A += dA;
        price_g += dG_price;
        div_g += dG_div;
        L.flow_step[n + 1] = dA;
    }

    L.netted = netted_wealth(L, accounts);
    L.cash = cash_process(L);
    return L;
}

Decomposition decompose(const WealthLedger& ledger) {
    return {ledger.gains, ledger.funding, ledger.margin, ledger.flows};
}

std::vector<double> netted_wealth(const WealthLedger& ledger, const AccountSet& accounts) {
    const std::size_t N = ledger.steps;
    std::vector<double> out(N + 1);
    double received = 0.0;  // B^{0,-} accrued value of flows received
    double paid = 0.0;      // B^{0,+} accrued value of flows paid
    out[0] = ledger.wealth[0];
    for (std::size_t n = 0; n < N; ++n) {
        const double dt = ledger.t[n + 1] - ledger.t[n];
        received *= 1.0 + step_growth(accounts.cash_borrow, ledger.t[n], dt).growth;
        paid *= 1.0 + step_growth(accounts.cash_lend, ledger.t[n], dt).growth;
        const double dA = ledger.flow_step[n + 1];
        received += pos(dA);
        paid += neg(dA);
        out[n + 1] = ledger.wealth[n + 1] - received + paid;
    }
    return out;
}

std::vector<double> cash_process(const WealthLedger& ledger) {
    std::vector<double> gamma(ledger.steps + 1);
    for (std::size_t n = 0; n <= ledger.steps; ++n) {
        gamma[n] = ledger.initial_wealth + ledger.funding[n] + ledger.margin[n] +
                   ledger.dividend_gains[n] + ledger.flows[n];
    }
    return gamma;
}

double cash_identity_residual(const WealthLedger& ledger) {
    const auto gamma = cash_process(ledger);
    double worst = 0.0;
    for (std::size_t n = 0; n <= ledger.steps; ++n) {
        worst = std::max(worst, std::abs(ledger.wealth[n] - ledger.price_gains[n] - gamma[n]));
    }
    return worst;
}

double self_financing_residual(const WealthLedger& ledger) {
    double worst = 0.0;
    for (std::size_t n = 0; n <= ledger.steps; ++n) {
        const double rebuilt = ledger.initial_wealth + ledger.gains[n] + ledger.funding[n] +
                               ledger.margin[n] + ledger.flows[n];
        worst = std::max(worst, std::abs(ledger.wealth[n] - rebuilt));
    }
    return worst;
}

}  // namespace fundhedge
