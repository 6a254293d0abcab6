#include "fundhedge/verify.hpp"

#include "fundhedge/errors.hpp"

#include <algorithm>
#include <cmath>

namespace fundhedge {

namespace {

constexpr const char* kModule = "measure-verify";

void require_replication(const BsdeSolution& replication, const Lattice& lattice) {
    if (!replication.has_surfaces()) {
        throw DomainError(kModule, "the replication solution was computed without surfaces");
    }
    if (replication.steps != lattice.steps() || replication.maturity != lattice.maturity()) {
        throw DomainError(kModule, "the replication solution lives on a different lattice");
    }
}

RateSpec cash_rate(const AccountSet& accounts, const Lattice& lattice) {
    if (!accounts.symmetric_cash()) {
        throw DomainError(kModule, "the gamma-measure lab needs one cash rate r0");
    }
    const RateSpec& kappa = lattice.equity().dividend_yield;
    if (kappa.min_value() != 0.0 || kappa.max_value() != 0.0) {
        throw DomainError(kModule, "the gamma-measure lab assumes a non-dividend asset");
    }
    return accounts.cash_lend;
}

std::vector<double> account_values(const RateSpec& rate, const Lattice& lattice) {
    const std::size_t N = lattice.steps();
    std::vector<double> B(N + 1, 1.0);
    for (std::size_t n = 0; n < N; ++n) {
        B[n + 1] = B[n] * (1.0 + step_growth(rate, lattice.time(n), lattice.dt()).growth);
    }
    return B;
}

}  // namespace

MeasureSpec MeasureSpec::repo(const AccountSet& accounts, const EquityModel& equity, std::size_t asset) {
    return {martingale_drift(accounts, equity, asset), "P~: drift r1-kappa"};
}

MeasureSpec MeasureSpec::discounting(const RateSpec& gamma, const EquityModel& equity,
                                     const std::string& name) {
    return {gamma - equity.dividend_yield, "drift " + name + "-kappa"};
}

MartingaleCheck check_martingale(const Lattice& lattice, const Surface<double>& values,
                                 const MeasureSpec& measure) {
    if (values.steps() != lattice.steps()) {
        throw DomainError(kModule, "process surface and lattice have different step counts");
    }
    return check_martingale(
        lattice, [&values](std::size_t n, std::size_t j) { return values.at(n, j); }, measure);
}

MartingaleCheck check_martingale(const Lattice& lattice,
                                 const std::function<double(std::size_t n, std::size_t j)>& values,
                                 const MeasureSpec& measure) {
    return check_martingale_increments(
        lattice,
        [&values](std::size_t n, std::size_t j, bool up) {
            return values(n + 1, up ? j + 1 : j) - values(n, j);
        },
        measure);
}

MartingaleCheck check_martingale_increments(
    const Lattice& lattice,
    const std::function<double(std::size_t n, std::size_t j, bool up)>& increment,
    const MeasureSpec& measure) {
    const std::vector<double> q = lattice.weights(measure.drift);
    MartingaleCheck out;
    for (std::size_t n = 0; n < lattice.steps(); ++n) {
        for (std::size_t j = 0; j <= n; ++j) {
            const double d = std::abs(q[n] * increment(n, j, true) + (1.0 - q[n]) * increment(n, j, false));
            if (d > out.max_defect) out = {d, n, j};
        }
    }
    return out;
}

double cum_dividend_increment(const Lattice& lattice, const RateSpec& repo, std::size_t n,
                              std::size_t j, bool up) {
    const double t = lattice.time(n);
    const double next = lattice.spot(n + 1, up ? j + 1 : j) * lattice.dividend_factor(n);
    return next - lattice.spot(n, j) * std::exp(repo.on_step(t, lattice.dt()) * lattice.dt());
}

MartingaleCheck check_cum_dividend_martingale(const Lattice& lattice, const RateSpec& repo,
                                              const MeasureSpec& measure) {
    return check_martingale_increments(
        lattice,
        [&](std::size_t n, std::size_t j, bool up) { return cum_dividend_increment(lattice, repo, n, j, up); },
        measure);
}

GammaPrice gamma_measure_price(const RateSpec& gamma, const BsdeSolution& replication,
                               const AccountSet& accounts, const Lattice& lattice,
                               SourceConvention convention) {
    require_replication(replication, lattice);
    const RateSpec r0 = cash_rate(accounts, lattice);
    const std::size_t N = lattice.steps();

    const BsdeSolution* surfaces = &replication;
    const double s0 = lattice.equity().spot;
    const double log_step = std::log(lattice.up());
    SolverOptions options;
    options.terminal_wealth = [surfaces, s0, log_step, N](double S) {
        const double j = std::round(0.5 * (std::log(S / s0) / log_step + static_cast<double>(N)));
        return surfaces->value.at(N, static_cast<std::size_t>(std::clamp(j, 0.0, static_cast<double>(N))));
    };
    // psi^0 B^0 = V - xi S read off the replication, independent of the recursion's value.
    const auto cash_position = [surfaces](const DriverContext& ctx, double) {
        return surfaces->value.at(ctx.step, ctx.node) - surfaces->hedge.at(ctx.step, ctx.node) * ctx.spot;
    };

    const auto solve = [&](const RateSpec& target, const std::string& label) {
        const Driver driver = discount_switch_driver(target, r0, cash_position, 0.0, convention, label);
        return solve_bsde(lattice, driver, CashFlowStream::none(), target, options);
    };

    GammaPrice out;
    out.gamma_solution = solve(gamma, "gamma-measure");
    out.value_gamma = out.gamma_solution.price;
    out.value_riskneutral = solve(r0, "cash-measure").price;
    out.gap = out.value_gamma - out.value_riskneutral;
    out.relative_gap = std::abs(out.gap) / std::max(std::abs(out.value_riskneutral), 1e-300);
    return out;
}

GammaMartingaleReport check_gamma_martingale(const RateSpec& gamma, const BsdeSolution& replication,
                                             const AccountSet& accounts, const Lattice& lattice,
                                             SourceConvention convention) {
    require_replication(replication, lattice);
    const RateSpec r0 = cash_rate(accounts, lattice);
    const std::size_t N = lattice.steps();
    const double dt = lattice.dt();
    const std::vector<double> q = lattice.weights(gamma);
    const std::vector<double> Bg = account_values(gamma, lattice);

    GammaMartingaleReport out;
    for (std::size_t n = 0; n < N; ++n) {
        const double t = lattice.time(n);
        double source_factor = 0.0;
        if (convention == SourceConvention::LeftEndpoint) {
            source_factor = (gamma.on_step(t, dt) - r0.on_step(t, dt)) * dt / Bg[n];
        } else {
            source_factor = (step_growth(gamma, t, dt).growth - step_growth(r0, t, dt).growth) / Bg[n + 1];
        }
        double step_max = 0.0;
        for (std::size_t j = 0; j <= n; ++j) {
            const double V = replication.value.at(n, j);
            const double cash = V - replication.hedge.at(n, j) * lattice.spot(n, j);
            const double base = -V / Bg[n] + source_factor * cash;
            const double up = replication.value.at(n + 1, j + 1) / Bg[n + 1] + base;
            const double down = replication.value.at(n + 1, j) / Bg[n + 1] + base;
            const double d = std::abs(q[n] * up + (1.0 - q[n]) * down);
            step_max = std::max(step_max, d);
            if (d > out.max_defect) {
                out.max_defect = d;
                out.step = n;
                out.node = j;
            }
        }
        out.cumulative_defect += step_max;
    }
    out.defect_rate = out.max_defect / dt;
    return out;
}

}  // namespace fundhedge
