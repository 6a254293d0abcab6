#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fixtures.hpp"
#include "fundhedge/errors.hpp"

#include <cmath>

using namespace fundhedge;

namespace {

BsdeSolution cash_replication(const CashFlowStream& stream, const Lattice& lattice, double r0) {
    ReplicationSetup setup;
    setup.convention = ConventionSpec::single_curve();
    setup.accounts = AccountSet::flat(r0);
    const RateSpec r = RateSpec::flat(r0);
    return price_with_setup(stream, setup, lattice, r, r, fixture::quick());
}

}  // namespace

TEST_CASE("martingale checks on spot processes") {
    const Lattice lattice(fixture::equity(), 1.0, 100);
    const double r = 0.03;
    const MeasureSpec m{RateSpec::flat(r), "drift r"};

    const MartingaleCheck disc = check_martingale(
        lattice, [&](std::size_t n, std::size_t j) { return lattice.spot(n, j) * std::exp(-r * lattice.time(n)); }, m);
    CHECK(disc.max_defect <= 1e-12);

    const MartingaleCheck raw =
        check_martingale(lattice, [&](std::size_t n, std::size_t j) { return lattice.spot(n, j); }, m);
    const double oracle = lattice.spot(raw.step, raw.node) * std::expm1(r * lattice.dt());
    CHECK(raw.max_defect == doctest::Approx(oracle).epsilon(1e-9));
    CHECK(raw.step == 99);
    CHECK(raw.node == 99);
}

TEST_CASE("cum-dividend process under the repo measure") {
    const Lattice lattice(fixture::ci_spread_equity(), 1.0, 100);
    const AccountSet acc = fixture::ci_spread();
    const MartingaleCheck k = check_cum_dividend_martingale(lattice, acc.assets[0].borrow, MeasureSpec::repo(acc, lattice.equity()));
    CHECK(k.max_defect <= 1e-12);

    // The same process is not a martingale under the cash-rate measure.
    const MartingaleCheck wrong =
        check_cum_dividend_martingale(lattice, acc.assets[0].borrow,
                                      MeasureSpec::discounting(acc.cash_lend, lattice.equity(), "r0"));
    CHECK(wrong.max_defect > 1e-4);
}

TEST_CASE("gamma-measure valuation") {
    const Lattice lattice(fixture::ci_flat_equity(), 1.0, 250);
    const AccountSet acc = AccountSet::flat(0.03);
    const BsdeSolution rep = cash_replication(fixture::sold_call(), lattice, 0.03);

    const GammaPrice same = gamma_measure_price(RateSpec::flat(0.03), rep, acc, lattice);
    CHECK(same.gap == 0.0);
    CHECK(same.value_gamma == doctest::Approx(rep.price).epsilon(1e-12));

    const GammaPrice g = gamma_measure_price(RateSpec::flat(0.07), rep, acc, lattice);
    CHECK(g.relative_gap <= 1e-3);
    const Lattice fine = lattice.with_steps(500);
    const GammaPrice g2 = gamma_measure_price(RateSpec::flat(0.07), cash_replication(fixture::sold_call(), fine, 0.03),
                                              acc, fine);
    const double ratio = g.gap / g2.gap;
    CHECK(ratio >= 1.6);
    CHECK(ratio <= 2.4);

    const double c = 5.0;
    const CashFlowStream fixed = CashFlowStream::european([c](double) { return c; });
    const BsdeSolution rc = cash_replication(fixed, lattice, 0.03);
    const GammaPrice gc = gamma_measure_price(RateSpec::flat(0.07), rc, acc, lattice);
    CHECK(gc.value_riskneutral == doctest::Approx(-c * std::exp(-0.03)).epsilon(1e-12));
    CHECK(std::abs(gc.value_gamma + c * std::exp(-0.03)) <= 1e-3 * c);
}

TEST_CASE("gamma martingale defect") {
    const Lattice lattice(fixture::ci_flat_equity(), 1.0, 250);
    const AccountSet acc = AccountSet::flat(0.03);
    const BsdeSolution rep = cash_replication(fixture::sold_call(), lattice, 0.03);

    CHECK(check_gamma_martingale(RateSpec::flat(0.03), rep, acc, lattice).max_defect <= 1e-12);

    const GammaMartingaleReport a = check_gamma_martingale(RateSpec::flat(0.07), rep, acc, lattice);
    const Lattice fine = lattice.with_steps(500);
    const GammaMartingaleReport b = check_gamma_martingale(
        RateSpec::flat(0.07), cash_replication(fixture::sold_call(), fine, 0.03), acc, fine);
    const double ratio = a.defect_rate / b.defect_rate;
    CHECK(ratio >= 1.6);
    CHECK(ratio <= 2.4);

    const BsdeSolution cash = cash_replication(CashFlowStream::european([](double) { return 1.0; }), lattice, 0.03);
    for (std::size_t n = 0; n < lattice.steps(); ++n) CHECK(cash.hedge.at(n, 0) == doctest::Approx(0.0).scale(1e-12));
    CHECK(check_gamma_martingale(RateSpec::flat(0.07), cash, acc, lattice, SourceConvention::ExponentialAccrual)
              .max_defect <= 1e-12);
}

TEST_CASE("arbitrage gate") {
    const Lattice lattice(fixture::ci_asym_equity(), 1.0, 10);
    const auto conv = ConventionSpec::partial_netting_shorts();

    const StrategyAudit cash = audit_strategy(StrategySpec::constant({0.0}), 1.0, conv, fixture::ci_asym(),
                                              CashFlowStream::none(), lattice);
    CHECK(cash.min_terminal_excess == 0.0);
    CHECK(cash.max_terminal_excess == 0.0);

    ArbitrageOptions opts;
    opts.strategies = 100;
    const ArbitrageReport ok = arbitrage_gate(conv, fixture::ci_asym(), CashFlowStream::none(), lattice, opts);
    CHECK(ok.certificate.holds);
    CHECK(ok.verdict == "pass");
    CHECK(ok.max_drift <= 1e-12);
    CHECK(ok.dominating == 0);
    CHECK(ok.audits.size() == 101);

    AccountSet bad = fixture::ci_asym();
    bad.cash_lend = RateSpec::flat(0.045);
    const ArbitrageReport flagged = arbitrage_gate(conv, bad, CashFlowStream::none(), lattice, opts);
    CHECK_FALSE(flagged.certificate.holds);
    CHECK(flagged.verdict == "not_applicable");
    CHECK(flagged.violation_exhibited);
    REQUIRE(flagged.counterexamples.size() == 3);
    CHECK(flagged.counterexamples[0].max_drift > 1e-3);

    CHECK_THROWS_AS(arbitrage_gate(ConventionSpec::split_cash(0), fixture::ci_asym_repo(), CashFlowStream::none(),
                                   lattice, opts),
                    ConventionError);
}

TEST_CASE("strategy sample is seeded") {
    const auto a = sample_strategies(5, 9), b = sample_strategies(5, 9), c = sample_strategies(5, 10);
    REQUIRE(a.size() == 6);
    CHECK(a[0].label == "cash-only");
    CHECK(a[3].level == b[3].level);
    CHECK(a[3].level != c[3].level);
    for (const auto& s : a) {
        CHECK(s.capital >= 0.0);
        CHECK(s.capital <= 100.0);
    }
}

TEST_CASE("hedger price set") {
    const Lattice lattice(fixture::ci_asym_equity(), 1.0, 200);

    const AccountSet flat = AccountSet::flat(0.03);
    const auto single = ConventionSpec::single_curve();
    const HedgerPriceSet at0 = hedger_price_set(fixture::sold_call(), single, flat, lattice, 0.0);
    const HedgerPriceSet at5 = hedger_price_set(fixture::sold_call(), single, flat, lattice, 5.0);
    CHECK(std::abs(at0.price - at5.price) <= 1e-12);
    REQUIRE(at5.price_at_zero_capital.has_value());
    CHECK(std::abs(*at5.price_at_zero_capital - at0.price) <= 1e-12);
    CHECK(std::abs(at0.high - at0.low) <= 1e-12);
    CHECK(std::abs(at0.price - at0.low) <= 1e-12);

    const HedgerPriceSet asym = hedger_price_set(fixture::sold_call(), ConventionSpec::partial_netting_shorts(),
                                                 fixture::ci_asym(), lattice, 0.0);
    CHECK(asym.low < asym.price);
    CHECK(asym.price < asym.high);
    CHECK(asym.in_bracket);
}
