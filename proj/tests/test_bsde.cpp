#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fixtures.hpp"
#include "fundhedge/errors.hpp"
#include "oracles.hpp"

#include <cmath>

using namespace fundhedge;

namespace {

double relative_to(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

double max_gap(const BsdeSolution& a, const BsdeSolution& b) {
    double worst = 0.0;
    for (std::size_t n = 0; n <= a.steps; ++n) {
        for (std::size_t j = 0; j <= n; ++j) worst = std::max(worst, std::abs(a.value.at(n, j) - b.value.at(n, j)));
    }
    return worst;
}

}  // namespace

// A sold call has X = -(S-K)^+ and its replication wealth Z is +BS.
TEST_CASE("linear pricing reproduces Black-Scholes") {
    const Lattice lattice(fixture::ci_flat_equity(), 1.0, 1000);
    const RateSpec r = RateSpec::flat(0.03);
    const BsdeSolution sold = price_linear(fixture::sold_call(), lattice, r, r, fixture::quick());
    const double bs = oracle::bs_call(100.0, 100.0, 0.03, 0.0, 0.2, 1.0);
    CHECK(oracle::relative(sold.price, bs) <= 5e-4);
    CHECK(oracle::relative(sold.root_hedge, oracle::bs_delta(100.0, 100.0, 0.03, 0.0, 0.2, 1.0)) <= 1e-2);

    const BsdeSolution bought = price_linear(fixture::bought_call(), lattice, r, r, fixture::quick());
    CHECK(oracle::relative(bought.price, -bs) <= 5e-4);

    const BsdeSolution all = price_full_collateral(fixture::sold_call(), fixture::ci_flat(), lattice, fixture::quick());
    CHECK(oracle::relative(all.price, bs) <= 5e-4);
}

TEST_CASE("zero payoff gives a null solution") {
    const Lattice lattice(fixture::ci_spread_equity(), 1.0, 100);
    const ExogenousCollateralPrice p =
        price_exogenous_collateral(CashFlowStream::none(), [](double, double) { return 0.0; }, fixture::ci_spread(),
                                   lattice, fixture::quick());
    for (std::size_t n = 0; n <= 100; ++n) {
        for (std::size_t j = 0; j <= n; ++j) {
            CHECK(p.k3.value.at(n, j) == 0.0);
            if (n < 100) CHECK(p.k3.hedge.at(n, j) == 0.0);
        }
    }
}

TEST_CASE("exogenous collateral limits") {
    const Lattice lattice(fixture::ci_spread_equity(), 1.0, 400);
    const AccountSet acc = fixture::ci_spread();
    const RateSpec drift = RateSpec::flat(0.05) - RateSpec::flat(0.02);

    // K3 is built from the wealth-engine step and the plain price from a
    // linear discount: equal in exact arithmetic, so compared at 1e-12 relative.
    SUBCASE("no collateral: both equal the cash-discounted price") {
        const auto p = price_exogenous_collateral(fixture::sold_call(), [](double, double) { return 0.0; }, acc,
                                                  lattice, fixture::quick());
        const double plain = price_linear(fixture::sold_call(), lattice, drift, acc.cash_lend, fixture::quick()).price;
        CHECK(relative_to(p.value_k3, plain) <= 1e-12);
        // K3T discounts at rC and carries (r0 - rC) V as a left-endpoint
        // source, which matches exponential discounting only to O(dt).
        const double gap = std::abs(p.value_k3t - plain);
        CHECK(gap / plain <= 2e-6);
        const Lattice fine = lattice.with_steps(800);
        const auto q = price_exogenous_collateral(fixture::sold_call(), [](double, double) { return 0.0; }, acc,
                                                  fine, fixture::quick());
        const double fine_gap =
            std::abs(q.value_k3t - price_linear(fixture::sold_call(), fine, drift, acc.cash_lend, fixture::quick()).price);
        CHECK(gap / fine_gap >= 1.6);
        CHECK(gap / fine_gap <= 2.4);
    }
    SUBCASE("collateral rate equal to cash rate") {
        AccountSet same = fixture::three_accounts(0.03, 0.05, 0.03);
        const auto p = price_exogenous_collateral(fixture::sold_call(), fixture::half_spot_posted(), same, lattice,
                                                  fixture::quick());
        const double plain = price_linear(fixture::sold_call(), lattice, drift, same.cash_lend, fixture::quick()).price;
        CHECK(relative_to(p.value_k3, plain) <= 1e-12);
        CHECK(relative_to(p.value_k3t, plain) <= 1e-12);
    }
}

TEST_CASE("full collateral against the Black formula") {
    const Lattice lattice(fixture::ci_spread_equity(), 1.0, 1000);
    const BsdeSolution p = price_full_collateral(fixture::sold_call(), fixture::ci_spread(), lattice, fixture::quick());
    const double oracle_price = oracle::drift_discount_call(100.0, 100.0, 0.03, 0.01, 0.2, 1.0);
    CHECK(oracle::relative(p.price, oracle_price) <= 5e-4);

    const double c = 3.0;
    const CashFlowStream fixed = CashFlowStream::european([c](double) { return c; });
    const BsdeSolution d = price_full_collateral(fixed, fixture::ci_spread(), lattice, fixture::quick());
    CHECK(d.price == doctest::Approx(-c * std::exp(-0.01)).epsilon(1e-12));
}

TEST_CASE("hedger collateral") {
    const Lattice lattice(fixture::ci_spread_equity(), 1.0, 300);
    const AccountSet acc = fixture::ci_spread();
    const BsdeSolution full = price_full_collateral(fixture::sold_call(), acc, lattice, fixture::quick());
    const BsdeSolution zero =
        price_hedger_collateral(fixture::sold_call(), RateSpec::flat(0.0), RateSpec::flat(0.0), acc, lattice,
                                fixture::quick());
    CHECK(std::abs(zero.price - full.price) <= 1e-10);

    // With delta = 0.1 the collateral is -1.1 V: the price sits between the
    // delta = 0 price and the linear price with the spread scaled by 1.1.
    const BsdeSolution tenth = price_hedger_collateral(fixture::sold_call(), RateSpec::flat(0.1),
                                                       RateSpec::flat(0.1), acc, lattice, fixture::quick());
    const RateSpec drift = martingale_drift(acc, lattice.equity());
    const double amplified =
        price_linear(fixture::sold_call(), lattice, drift, RateSpec::flat(0.03 - 1.1 * 0.02), fixture::quick()).price;
    const double lo = std::min(full.price, amplified), hi = std::max(full.price, amplified);
    CHECK(tenth.price >= lo - 1e-6);
    CHECK(tenth.price <= hi + 1e-6);
    CHECK(tenth.price != full.price);

    AccountSet equal = fixture::three_accounts(0.03, 0.05, 0.03);
    const BsdeSolution h = price_hedger_collateral(fixture::sold_call(), RateSpec::flat(0.1), RateSpec::flat(0.1),
                                                   equal, lattice, fixture::quick());
    const double plain = price_linear(fixture::sold_call(), lattice, drift, equal.cash_lend, fixture::quick()).price;
    CHECK(std::abs(h.price - plain) <= 1e-10);
}

TEST_CASE("asymmetric rates") {
    const Lattice lattice(fixture::ci_asym_equity(), 1.0, 500);
    const AccountSet acc = fixture::ci_asym();
    const auto conv = ConventionSpec::partial_netting_shorts();
    const BsdeSolution shortc = price_asymmetric_rates(fixture::sold_call(), conv, acc, lattice, fixture::quick());
    const BsdeSolution longc = price_asymmetric_rates(fixture::bought_call(), conv, acc, lattice, fixture::quick());

    const auto linear = [&](double r) {
        return price_linear(fixture::sold_call(), lattice, RateSpec::flat(r), RateSpec::flat(r), fixture::quick()).price;
    };
    const double lo = std::min(linear(0.02), linear(0.05)), hi = std::max(linear(0.02), linear(0.05));
    CHECK(shortc.price > lo);
    CHECK(shortc.price < hi);
    CHECK(std::abs(shortc.price + longc.price) > 1e-3);

    const AccountSet flat = AccountSet::flat(0.03);
    const BsdeSolution collapsed = price_asymmetric_rates(fixture::sold_call(), conv, flat, lattice, fixture::quick());
    const double plain = price_linear(fixture::sold_call(), lattice, RateSpec::flat(0.03), RateSpec::flat(0.03),
                                      fixture::quick()).price;
    CHECK(std::abs(collapsed.price - plain) <= 1e-10);
}

TEST_CASE("comparison: a larger terminal flow never raises the replication wealth") {
    const Lattice lattice(fixture::ci_asym_equity(), 1.0, 200);
    const auto conv = ConventionSpec::partial_netting_shorts();
    const BsdeSolution high = price_asymmetric_rates(fixture::sold_call(100.0), conv, fixture::ci_asym(), lattice,
                                                     fixture::quick());
    const BsdeSolution low = price_asymmetric_rates(fixture::sold_call(90.0), conv, fixture::ci_asym(), lattice,
                                                    fixture::quick());
    for (std::size_t n = 0; n <= 200; ++n) {
        for (std::size_t j = 0; j <= n; ++j) CHECK(high.value.at(n, j) <= low.value.at(n, j) + 1e-12);
    }
}

TEST_CASE("repo-fraction extension") {
    const Lattice lattice(fixture::ci_ext_equity(), 1.0, 300);
    const AccountSet acc = fixture::ci_ext();
    const auto p = price_exogenous_collateral(fixture::sold_call(), fixture::half_spot_posted(), acc, lattice,
                                              fixture::quick());
    const BsdeSolution repo = price_piterbarg_extension(fixture::sold_call(), fixture::half_spot_posted(),
                                                        fixture::fraction(1.0), acc, lattice, fixture::quick());
    CHECK(max_gap(repo, p.k3) <= 1e-12);

    const BsdeSolution cash = price_piterbarg_extension(fixture::sold_call(), fixture::half_spot_posted(),
                                                        fixture::fraction(0.0), acc, lattice, fixture::quick());
    const BsdeSolution over = price_piterbarg_extension(fixture::sold_call(), fixture::half_spot_posted(),
                                                        fixture::fraction(2.0), acc, lattice, fixture::quick());
    CHECK(cash.price != repo.price);
    CHECK(over.price != repo.price);
    CHECK((cash.price - repo.price) * (over.price - repo.price) < 0.0);
}

TEST_CASE("hedge ratios") {
    const Lattice lattice(fixture::ci_flat_equity(), 1.0, 1000);
    const RateSpec r = RateSpec::flat(0.03);
    const BsdeSolution s = price_linear(fixture::sold_call(), lattice, r, r);
    const double d1 = oracle::bs_delta(100.0, 100.0, 0.03, 0.0, 0.2, 1.0);
    CHECK(std::abs(s.hedge.at(0, 0) - d1) <= 0.01 * d1);
    CHECK(s.hedge.at(999, 999) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::abs(s.hedge.at(999, 0)) <= 1e-12);

    const Surface<double> xi = hedge_ratio(s);
    CHECK(xi.at(500, 250) == s.hedge.at(500, 250));
}

TEST_CASE("contraction guard") {
    const Lattice lattice(fixture::ci_flat_equity(), 1.0, 4);
    Driver d = Driver::linear(RateSpec::flat(0.03));
    d.generator = [](const DriverContext&, double v, double) { return 10.0 * v; };
    d.lipschitz = 10.0;
    try {
        solve_bsde(lattice, d, fixture::sold_call(), RateSpec::flat(0.03));
        FAIL("expected a contraction error");
    } catch (const ContractionError& e) {
        CHECK(e.required_steps() == 11);
    }
    // N = 11 passes the guard; the fixed point then contracts at 10/11 per
    // iteration, so the default iteration budget needs a finer grid.
    CHECK_THROWS_AS(solve_bsde(lattice.with_steps(11), d, fixture::sold_call(), RateSpec::flat(0.03)),
                    ConvergenceError);
    CHECK_NOTHROW(solve_bsde(lattice.with_steps(40), d, fixture::sold_call(), RateSpec::flat(0.03)));
}

TEST_CASE("first-order convergence of the cash and collateral discounted values") {
    const Lattice lattice(fixture::ci_spread_equity(), 1.0, 250);
    const auto gap = [&](const Lattice& l) {
        const auto p = price_exogenous_collateral(fixture::sold_call(), fixture::half_spot_posted(),
                                                  fixture::ci_spread(), l, fixture::quick());
        return p.value_k3 - p.value_k3t;
    };
    const double ratio = gap(lattice) / gap(lattice.with_steps(500));
    CHECK(ratio >= 1.6);
    CHECK(ratio <= 2.4);
}
