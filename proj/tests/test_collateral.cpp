#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fixtures.hpp"
#include "fundhedge/errors.hpp"
#include "fundhedge/expression.hpp"

#include <cmath>

using namespace fundhedge;

TEST_CASE("collateral amounts") {
    const CollateralAmount full = collateral_amount(CollateralSpec::full(), 0.0, 100.0, 7.0);
    CHECK(full.value == -7.0);
    CHECK(full.received == 0.0);
    CHECK(full.posted == 7.0);

    const auto haircut = CollateralSpec::haircut(RateSpec::flat(0.1), RateSpec::flat(0.05));
    CHECK(collateral_amount(haircut, 0.0, 100.0, -10.0).value == doctest::Approx(11.0).epsilon(1e-15));
    CHECK(collateral_amount(haircut, 0.0, 100.0, 10.0).value == doctest::Approx(-10.5).epsilon(1e-15));

    CHECK(collateral_amount(CollateralSpec::proportional(RateSpec::flat(-0.5)), 0.0, 100.0, 8.0).value == -4.0);
    CHECK(collateral_amount(CollateralSpec::none(), 0.3, 90.0, 5.0).value == 0.0);

    const auto exo = CollateralSpec::exogenous_amount(fixture::half_spot_posted());
    const CollateralAmount e = collateral_amount(exo, 0.2, 80.0, 123.0);
    CHECK(e.value == -40.0);
    CHECK(e.posted == 40.0);
}

TEST_CASE("segregated margin increment") {
    AccountSet acc = AccountSet::flat(0.03);
    acc.collateral_received = RateSpec::flat(0.01);
    acc.collateral_posted = RateSpec::flat(0.01);
    const double inc = margin_cost_increment(MarginConvention::segregated(), 100.0, 0.0, acc, 0.0, 0.01);
    CHECK(inc == doctest::Approx(100.0 * (std::exp(0.03 * 0.01) - std::exp(0.01 * 0.01))).epsilon(1e-13));
    CHECK(inc == doctest::Approx(0.02).epsilon(1e-3));
}

TEST_CASE("partial rehypothecation degenerates to the pure conventions") {
    AccountSet acc = fixture::three_accounts(0.03, 0.05, 0.01);
    acc.collateral_reinvest = RateSpec::flat(0.025);
    acc.collateral_borrow = RateSpec::flat(0.04);
    const auto p11 = MarginConvention::partial_rehypothecation(RateSpec::flat(1.0), RateSpec::flat(1.0));
    const auto p00 = MarginConvention::partial_rehypothecation(RateSpec::flat(0.0), RateSpec::flat(0.0));
    for (double rec : {0.0, 3.0, 250.0}) {
        for (double post : {0.0, 1.5, 80.0}) {
            for (double t : {0.0, 0.37}) {
                CHECK(margin_cost_increment(p11, rec, post, acc, t, 0.004) ==
                      margin_cost_increment(MarginConvention::full_rehypothecation(), rec, post, acc, t, 0.004));
                CHECK(margin_cost_increment(p00, rec, post, acc, t, 0.004) ==
                      margin_cost_increment(MarginConvention::segregated(), rec, post, acc, t, 0.004));
            }
        }
    }
    CHECK_THROWS_AS(MarginConvention::partial_rehypothecation(RateSpec::flat(1.2), RateSpec::flat(0.0)).validate(),
                    DomainError);
}

TEST_CASE("adjusted stream") {
    const CashFlowStream a = fixture::sold_call();
    const CashFlowStream same = adjusted_stream(a, nullptr, 0.01);
    CHECK(same.terminal_at(130.0) == a.terminal_at(130.0));
    CHECK(same.rate_at(0.5, 100.0) == 0.0);

    const double c = 0.7, dt = 0.01;
    const CashFlowStream acc = adjusted_stream(CashFlowStream::none(), [=](double, double) { return c * dt; }, dt);
    double total = 0.0;
    for (int n = 0; n < 100; ++n) total += acc.rate_at(n * dt, 100.0) * dt;
    CHECK(total == doctest::Approx(c * 1.0).epsilon(1e-13));
}

TEST_CASE("exogenous collateral reduces to an adjusted stream without collateral") {
    const Lattice lattice(fixture::ci_spread_equity(), 1.0, 200);
    const AccountSet acc = fixture::ci_spread();
    const StateFunction C = fixture::half_spot_posted();
    const CashFlowStream A = fixture::sold_call();

    ReplicationSetup with;
    with.convention = ConventionSpec::common_unsecured_with_repo(0);
    with.collateral = CollateralSpec::exogenous_amount(C);
    with.accounts = acc;
    ReplicationSetup without = with;
    without.collateral = CollateralSpec::none();

    const double dt = lattice.dt();
    const CashFlowStream AC = adjusted_stream(
        A,
        [&](double t, double S) {
            const double x = C(t, S);
            return margin_cost_increment(MarginConvention::segregated(), std::max(x, 0.0), std::max(-x, 0.0), acc, t,
                                         dt);
        },
        dt);

    const RateSpec drift = martingale_drift(acc, lattice.equity());
    const BsdeSolution a = price_with_setup(A, with, lattice, drift, acc.cash_lend, fixture::quick());
    const BsdeSolution b = price_with_setup(AC, without, lattice, drift, acc.cash_lend, fixture::quick());
    // Both routes sum the same terms in a different order; at the outer nodes
    // |Z| reaches several hundred, so the gap is measured against max(1, |Z|).
    double worst = 0.0;
    for (std::size_t n = 0; n < lattice.steps(); ++n) {
        for (std::size_t j = 0; j <= n; ++j) {
            const double scale = std::max(1.0, std::abs(a.value.at(n, j)));
            worst = std::max(worst, std::abs(a.value.at(n, j) - b.value.at(n, j)) / scale);
        }
    }
    CHECK(worst <= 1e-12);
    CHECK(std::abs(a.price - b.price) <= 1e-12);
}

TEST_CASE("remuneration monotonicity") {
    AccountSet acc = AccountSet::flat(0.03);
    CHECK(remuneration_monotonicity(acc, 1.0).pass);

    acc.collateral_received = RateSpec::flat(0.02);
    acc.collateral_reinvest = RateSpec::flat(0.01);
    acc.collateral_borrow = RateSpec::flat(0.03);
    acc.collateral_posted = RateSpec::flat(0.01);
    CHECK(remuneration_monotonicity(acc, 1.0).pass);

    acc.collateral_received = RateSpec({0.0, 0.5, 1.0}, {0.02, 0.01});
    acc.collateral_reinvest = RateSpec::flat(0.02 - 1e-9);
    const RemunerationReport r = remuneration_monotonicity(acc, 1.0);
    CHECK_FALSE(r.pass);
    CHECK(r.first_failure.find("0.5") != std::string::npos);
}

TEST_CASE("expression grammar") {
    CHECK(Expression::parse("-call(100)")(1.0, 130.0) == -30.0);
    CHECK(Expression::parse("put(100)")(1.0, 90.0) == 10.0);
    CHECK(Expression::parse("max(S - 100, 0) * 2 + t")(0.5, 101.0) == 2.5);
    CHECK(Expression::parse("min(S, 50) / 5")(0.0, 80.0) == 10.0);
    CHECK(Expression::parse("-0.5*S")(0.0, 80.0) == -40.0);
    CHECK(Expression::parse("1e-2 * (S - -3)")(0.0, 7.0) == doctest::Approx(0.1));
    CHECK_THROWS_AS(Expression::parse("max(S, )"), DomainError);
    CHECK_THROWS_AS(Expression::parse("S +"), DomainError);
    CHECK_THROWS_AS(Expression::parse("foo(3)"), DomainError);
    CHECK_THROWS_AS(Expression::parse("(S"), DomainError);
    CHECK_FALSE(Expression::parse("3 * t").uses_spot());
}
