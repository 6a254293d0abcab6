#include "fundhedge/arbitrage.hpp"

#include "fundhedge/errors.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <random>

namespace fundhedge {

namespace {

constexpr const char* kModule = "measure-verify";
constexpr std::size_t kMaxGateSteps = 20;
constexpr std::size_t kPieces = 4;

double uniform(std::mt19937_64& rng, double lo, double hi) {
    const double u = static_cast<double>(rng() >> 11) * 0x1p-53;
    return lo + (hi - lo) * u;
}

std::vector<double> compounded(const RateSpec& rate, const Lattice& lattice) {
    std::vector<double> B(lattice.steps() + 1, 1.0);
    for (std::size_t n = 0; n < lattice.steps(); ++n) {
        B[n + 1] = B[n] * (1.0 + step_growth(rate, lattice.time(n), lattice.dt()).growth);
    }
    return B;
}

void check_gate_convention(const ConventionSpec& convention) {
    if (convention.kind != ConventionSpec::Kind::PartialNettingShorts &&
        convention.kind != ConventionSpec::Kind::SingleCurve) {
        throw ConventionError(kModule, "the arbitrage gate covers partial_netting_shorts and single_curve, not " +
                                           convention.name());
    }
}

}  // namespace

double cash_benchmark(double x, const AccountSet& accounts, const Lattice& lattice) {
    if (x >= 0.0) return x * compounded(accounts.cash_lend, lattice).back();
    return x * compounded(accounts.cash_borrow, lattice).back();
}

StrategySpec SampledStrategy::policy(double s0, double maturity) const {
    StrategySpec s;
    s.hedge = [a = level, b = slope, bound = bound, s0, maturity](const PolicyState& state,
                                                                  std::span<double> units) {
        if (a.empty()) {
            units[0] = 0.0;
            return;
        }
        const double pos = static_cast<double>(a.size()) * state.t / maturity;
        const std::size_t k = std::min(a.size() - 1, static_cast<std::size_t>(std::max(0.0, pos)));
        units[0] = std::clamp(a[k] + b[k] * std::log(state.spots[0] / s0), -bound, bound);
    };
    return s;
}

std::vector<SampledStrategy> sample_strategies(std::size_t count, std::uint64_t seed) {
    std::vector<SampledStrategy> out;
    out.reserve(count + 1);
    SampledStrategy cash;
    cash.capital = 1.0;
    cash.label = "cash-only";
    out.push_back(cash);
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < count; ++i) {
        SampledStrategy s;
        for (std::size_t k = 0; k < kPieces; ++k) {
            s.level.push_back(uniform(rng, -3.0, 3.0));
            s.slope.push_back(uniform(rng, -2.0, 2.0));
        }
        s.capital = uniform(rng, 0.0, 100.0);
        s.label = "sample-" + std::to_string(i);
        out.push_back(std::move(s));
    }
    return out;
}

StrategyAudit audit_strategy(const StrategySpec& strategy, double capital, const ConventionSpec& convention,
                             const AccountSet& accounts, const CashFlowStream& contract,
                             const Lattice& lattice, double dominance_tolerance) {
    const std::size_t N = lattice.steps();
    if (N == 0 || N > kMaxGateSteps) {
        throw DomainError(kModule, "path enumeration needs 1 <= N <= " + std::to_string(kMaxGateSteps));
    }
    const std::size_t paths = std::size_t{1} << N;
    const std::vector<double> B = compounded(accounts.cash_lend, lattice);
    const std::vector<double> q = lattice.weights(accounts.cash_lend - lattice.equity().dividend_yield);
    const double benchmark = cash_benchmark(capital, accounts, lattice);

    std::vector<double> discounted(paths * (N + 1));
    std::vector<std::uint8_t> moves(N);
    StrategyAudit audit;
    audit.capital = capital;
    audit.min_terminal_excess = std::numeric_limits<double>::infinity();
    audit.max_terminal_excess = -std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < paths; ++p) {
        for (std::size_t n = 0; n < N; ++n) moves[n] = static_cast<std::uint8_t>((p >> (N - 1 - n)) & 1u);
        const WealthLedger ledger = evolve_wealth(strategy, contract, CollateralSpec::none(), convention,
                                                  accounts, Scenario::from_lattice(lattice, moves), capital);
        for (std::size_t n = 0; n <= N; ++n) discounted[p * (N + 1) + n] = ledger.netted[n] / B[n];
        const double excess = ledger.netted[N] - benchmark;
        audit.min_terminal_excess = std::min(audit.min_terminal_excess, excess);
        audit.max_terminal_excess = std::max(audit.max_terminal_excess, excess);
    }

    audit.max_drift = -std::numeric_limits<double>::infinity();
    for (std::size_t n = 0; n < N; ++n) {
        const std::size_t bit = std::size_t{1} << (N - 1 - n);
        const std::size_t stride = bit << 1;
        // Paths whose moves after step n are all down represent each node prefix.
        for (std::size_t p = 0; p < paths; p += stride) {
            const double now = discounted[p * (N + 1) + n];
            const double down = discounted[p * (N + 1) + n + 1];
            const double up = discounted[(p | bit) * (N + 1) + n + 1];
            audit.max_drift = std::max(audit.max_drift, q[n] * up + (1.0 - q[n]) * down - now);
        }
    }
    audit.dominates = audit.min_terminal_excess >= -dominance_tolerance &&
                      audit.max_terminal_excess > dominance_tolerance;
    return audit;
}

ArbitrageReport arbitrage_gate(const ConventionSpec& convention, const AccountSet& accounts,
                               const CashFlowStream& contract, const Lattice& lattice,
                               const ArbitrageOptions& options) {
    check_gate_convention(convention);
    convention.validate(accounts);

    ArbitrageReport report;
    report.certificate = ordering_certificate(accounts, lattice.maturity());
    report.convention = convention.name();
    report.measure = "drift r0+ - kappa";
    report.discounting = "B0+";
    report.lattice_steps = lattice.steps();
    report.paths = std::size_t{1} << std::min(lattice.steps(), kMaxGateSteps);
    report.notes.push_back("netted wealth is discounted by the cash lending account B0+");
    report.notes.push_back("strategies are a seeded falsification sample, not a proof over all strategies");

    const double s0 = lattice.equity().spot;
    const double T = lattice.maturity();

    if (!report.certificate.holds) {
        report.verdict = "not_applicable";
        struct Constructed {
            const char* label;
            double units;
            double capital;
        };
        const Constructed constructed[] = {{"long-1-funded-at-r1-", 1.0, 0.0},
                                           {"short-1-proceeds-in-cash", -1.0, 0.0},
                                           {"cash-borrower", 0.0, -1.0}};
        for (const auto& c : constructed) {
            StrategyAudit a = audit_strategy(StrategySpec::constant({c.units}), c.capital, convention, accounts,
                                             contract, lattice, options.dominance_tolerance);
            a.label = c.label;
            report.violation_exhibited = report.violation_exhibited || a.max_drift > options.drift_tolerance;
            report.counterexamples.push_back(std::move(a));
        }
        report.notes.push_back("rate ordering certificate fails; no verdict is given");
        return report;
    }

    const std::vector<SampledStrategy> sample = sample_strategies(options.strategies, options.seed);
    report.audits.resize(sample.size());
    detail::parallel_for(sample.size(), options.threads, [&](std::size_t i) {
        StrategyAudit a = audit_strategy(sample[i].policy(s0, T), sample[i].capital, convention, accounts,
                                         contract, lattice, options.dominance_tolerance);
        a.label = sample[i].label;
        report.audits[i] = std::move(a);
    });

    report.max_drift = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < report.audits.size(); ++i) {
        const StrategyAudit& a = report.audits[i];
        if (a.max_drift > report.max_drift) {
            report.max_drift = a.max_drift;
            report.worst_strategy = i;
        }
        if (a.dominates) ++report.dominating;
    }
    const StrategyAudit& cash = report.audits.front();
    report.cash_only_gap = std::max(std::abs(cash.min_terminal_excess), std::abs(cash.max_terminal_excess));
    const bool ok = report.max_drift <= options.drift_tolerance && report.dominating == 0;
    report.verdict = ok ? "pass" : "fail";
    return report;
}

HedgerPriceSet hedger_price_set(const CashFlowStream& contract, const ConventionSpec& convention,
                                const AccountSet& accounts, const Lattice& lattice, double capital,
                                const PricingOptions& options) {
    ReplicationSetup setup;
    setup.convention = convention;
    setup.collateral = CollateralSpec::none();
    setup.accounts = accounts;
    const RateSpec& kappa = lattice.equity().dividend_yield;
    const RateSpec drift = accounts.cash_lend - kappa;

    const auto solve_for = [&](double x) {
        PricingOptions opts = options;
        const double target = cash_benchmark(x, accounts, lattice);
        opts.solver.terminal_wealth = [target](double) { return target; };
        opts.half_step_diagnostic = false;
        return price_with_setup(contract, setup, lattice, drift, accounts.cash_lend, opts);
    };

    HedgerPriceSet out;
    out.capital = capital;
    out.solution = solve_for(capital);
    out.solution.label = "hedger-price";
    out.price = out.solution.price - capital;
    if (convention.kind == ConventionSpec::Kind::SingleCurve) {
        out.price_at_zero_capital = solve_for(0.0).price;
    }

    PricingOptions linear_opts = options;
    linear_opts.half_step_diagnostic = false;
    linear_opts.solver.keep_surfaces = false;
    const double p_lend = price_linear(contract, lattice, accounts.cash_lend - kappa, accounts.cash_lend,
                                       linear_opts).price;
    const double p_borrow = price_linear(contract, lattice, accounts.cash_borrow - kappa,
                                         accounts.cash_borrow, linear_opts).price;
    out.low = std::min(p_lend, p_borrow);
    out.high = std::max(p_lend, p_borrow);
    const double slack = 1e-12 * std::max(1.0, std::abs(out.price));
    out.in_bracket = out.low - slack <= out.price && out.price <= out.high + slack;
    return out;
}

}  // namespace fundhedge
