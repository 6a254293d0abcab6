#include "fundhedge/bsde.hpp"

#include "fundhedge/errors.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

namespace fundhedge {

namespace {
constexpr const char* kModule = "bsde-pricer";
}

Driver Driver::linear(const RateSpec& discount, std::string label) {
    Driver d;
    d.discount = discount;
    d.label = std::move(label);
    return d;
}

BsdeSolution solve_bsde(const Lattice& lattice, const Driver& driver, const CashFlowStream& stream,
                        const RateSpec& drift, const SolverOptions& options) {
    const std::size_t N = lattice.steps();
    const double T = lattice.maturity();
    const double dt = lattice.dt();

    driver.discount.check_covers(T, "discount rate");
    driver.discount.check_aligned(T, N, "discount rate");
    const std::vector<double> q = lattice.weights(drift);

    if (driver.generator && driver.lipschitz * dt >= 1.0) {
        const auto required = static_cast<std::size_t>(std::floor(driver.lipschitz * T)) + 1;
        std::ostringstream os;
        os << "driver '" << driver.label << "' has L*dt = " << driver.lipschitz * dt
           << " >= 1; the fixed point needs N >= " << required;
        throw ContractionError(kModule, os.str(), required);
    }

    const auto schedule = stream.schedule(T, N);

    BsdeSolution sol;
    sol.steps = N;
    sol.maturity = T;
    sol.discount = driver.discount;
    sol.drift = drift;
    sol.label = driver.label;
    if (options.keep_surfaces) {
        sol.value = Surface<double>(N);
        sol.hedge = Surface<double>(N);
        sol.source = Surface<double>(N);
        sol.iterations = Surface<std::uint8_t>(N);
    }

    // next[j] holds the cum-flow value W(n+1, j) needed just before flows at t_{n+1}.
    std::vector<double> next(N + 1);
    std::vector<double> cur(N + 1);
    for (std::size_t j = 0; j <= N; ++j) {
        const double S = lattice.spot(N, j);
        double w = options.terminal_wealth ? options.terminal_wealth(S) : 0.0;
        w -= stream.terminal_at(S);
        for (const LumpFlow* lump : schedule[N]) w -= lump->amount(T, S);
        next[j] = w;
        if (options.keep_surfaces) sol.value.at(N, j) = w;
    }

    const double tol = options.tolerance;
    for (std::size_t nn = N; nn-- > 0;) {
        const std::size_t n = nn;
        const double t = lattice.time(n);
        const double growth = std::exp(driver.discount.on_step(t, dt) * dt);
        const double ef = lattice.dividend_factor(n);
        const double qn = q[n];
        for (std::size_t j = 0; j <= n; ++j) {
            const double S = lattice.spot(n, j);
            const double Su = lattice.spot(n + 1, j + 1);
            const double Sd = lattice.spot(n + 1, j);
            const double wu = next[j + 1];
            const double wd = next[j];
            const double xi = (wu - wd) / ((Su - Sd) * ef);
            const double base = qn * wu + (1.0 - qn) * wd - stream.rate_at(t, S) * dt;

            double z = base / growth;
            double f_dt = 0.0;
            int iters = 0;
            if (driver.generator) {
                const DriverContext ctx{n, j, t, dt, S};
                bool converged = false;
                for (int k = 0; k < options.max_iterations; ++k) {
                    f_dt = driver.generator(ctx, z, xi) * dt;
                    const double z_new = (base - f_dt) / growth;
                    const double step = std::abs(z_new - z);
                    z = z_new;
                    iters = k + 1;
                    if (step <= tol * std::max(1.0, std::abs(z))) {
                        converged = true;
                        break;
                    }
                }
                if (!converged) {
                    std::ostringstream os;
                    os << "fixed point did not reach tolerance " << tol << " within "
                       << options.max_iterations << " iterations at node (" << n << ", " << j
                       << "), S=" << S;
                    throw ConvergenceError(kModule, os.str());
                }
                f_dt = driver.generator(ctx, z, xi) * dt;
                if (options.verify_uniqueness) {
                    double z0 = 0.0;
                    for (int k = 0; k < options.max_iterations; ++k) {
                        const double z_new = (base - driver.generator(ctx, z0, xi) * dt) / growth;
                        const double step = std::abs(z_new - z0);
                        z0 = z_new;
                        if (step <= tol * std::max(1.0, std::abs(z0))) break;
                    }
                    sol.max_restart_gap = std::max(sol.max_restart_gap, std::abs(z0 - z));
                }
            }
            sol.max_iterations_used = std::max(sol.max_iterations_used, iters);

            if (options.keep_surfaces) {
                sol.value.at(n, j) = z;
                sol.hedge.at(n, j) = xi;
                sol.source.at(n, j) = f_dt;
                sol.iterations.at(n, j) = static_cast<std::uint8_t>(iters);
            }
            if (n == 0) {
                sol.price = z;
                sol.root_hedge = xi;
            }
            double w = z;
            for (const LumpFlow* lump : schedule[n]) w -= lump->amount(t, S);
            cur[j] = w;
        }
        std::swap(next, cur);
    }
    return sol;
}

Driver make_convention_driver(const Lattice& lattice, const ReplicationSetup& setup,
                              const RateSpec& drift, const RateSpec& discount) {
    setup.convention.validate(setup.accounts);
    if (setup.accounts.assets.empty()) {
        throw ConventionError(kModule, "the account set has no funding rate for the risky asset");
    }
    const std::size_t N = lattice.steps();
    const double T = lattice.maturity();
    const double dt = lattice.dt();
    setup.accounts.check_covers(T);
    setup.accounts.check_aligned(T, N);

    struct StepData {
        StepRates rates;
        double beta = 0.0;
        double gamma_cap = 0.0;
        double gain = 0.0;      // E_q[S_{n+1}] e^{kappa dt} / S_n - 1
        double discount = 0.0;  // e^{rho dt} - 1
    };
    auto steps = std::make_shared<std::vector<StepData>>(N);
    const std::vector<double> q = lattice.weights(drift);
    double lipschitz = 0.0;
    const double cs = setup.collateral.wealth_sensitivity();
    for (std::size_t n = 0; n < N; ++n) {
        const double t = lattice.time(n);
        StepData& s = (*steps)[n];
        s.rates = step_rates(setup.accounts, t, dt);
        s.rates.asset_lend.resize(1);
        s.rates.asset_borrow.resize(1);
        s.beta = setup.convention.margin.usable_received(t, dt);
        s.gamma_cap = setup.convention.margin.usable_posted(t, dt);
        s.gain = (q[n] * lattice.up() + (1.0 - q[n]) * lattice.down()) * lattice.dividend_factor(n) - 1.0;
        s.discount = std::expm1(discount.on_step(t, dt) * dt);

        const auto& r = s.rates;
        const double cash = std::max(std::abs(r.cash_lend.growth), std::abs(r.cash_borrow.growth));
        const double coll = std::abs(r.collateral_received.growth) + std::abs(r.collateral_posted.growth) +
                            std::abs(r.collateral_reinvest.growth) + std::abs(r.collateral_borrow.growth);
        const double bound = cash * (1.0 + cs) + std::abs(s.discount) + cs * coll;
        lipschitz = std::max(lipschitz, bound / dt);
    }

    Driver d;
    d.discount = discount;
    d.lipschitz = lipschitz;
    d.label = setup.convention.name() + "/" + setup.collateral.name() + "/" + setup.convention.margin.name();
    d.generator = [steps, setup, dt](const DriverContext& ctx, double V, double xi) {
        thread_local FundingState fs;
        const StepData& s = (*steps)[ctx.step];
        const double spot = ctx.spot;
        const double units = xi;
        const std::span<const double> spots(&spot, 1);
        const std::span<const double> unit_span(&units, 1);
        const CollateralAmount C = collateral_amount(setup.collateral, ctx.t, spot, V);
        double phi = 1.0;
        RepoFractions fractions;
        if (setup.repo_fraction) {
            phi = setup.repo_fraction(PolicyState{ctx.step, ctx.t, spots}, 0);
            fractions = RepoFractions(&phi, 1);
        }
        funding_step(setup.convention, s.rates, s.beta, s.gamma_cap, V, spots, unit_span, C,
                     fractions, fs);
        const double increment = xi * spot * s.gain + fs.funding + fs.margin - V * s.discount;
        return increment / dt;
    };
    return d;
}

Driver discount_switch_driver(const RateSpec& target, const RateSpec& base,
                              std::function<double(const DriverContext&, double value)> amount,
                              double amount_lipschitz, SourceConvention convention,
                              std::string label) {
    Driver d;
    d.discount = target;
    d.label = std::move(label);
    double spread = 0.0;
    const RateSpec diff = base - target;
    spread = std::max(std::abs(diff.min_value()), std::abs(diff.max_value()));
    d.lipschitz = 1.05 * spread * amount_lipschitz;
    d.generator = [target, base, amount = std::move(amount), convention](const DriverContext& ctx,
                                                                         double V, double) {
        const double rb = base.on_step(ctx.t, ctx.dt);
        const double rt = target.on_step(ctx.t, ctx.dt);
        double s = 0.0;
        if (convention == SourceConvention::LeftEndpoint) {
            s = rb - rt;
        } else {
            s = (std::expm1(rb * ctx.dt) - std::expm1(rt * ctx.dt)) / ctx.dt;
        }
        return s * amount(ctx, V);
    };
    return d;
}

}  // namespace fundhedge
