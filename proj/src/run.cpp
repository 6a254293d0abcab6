#include "fundhedge/run.hpp"

#include "fundhedge/arbitrage.hpp"
#include "fundhedge/errors.hpp"
#include "fundhedge/verify.hpp"
#include "parallel.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <random>

namespace fundhedge {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr const char* kModule = "cli";

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

void write_text(const fs::path& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DomainError(kModule, "cannot write '" + path.string() + "'");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw DomainError(kModule, "write failed for '" + path.string() + "'");
}

void write_json(const fs::path& path, const json& doc, RunOutcome& outcome) {
    write_text(path, doc.dump(2) + "\n");
    outcome.files.push_back(path);
}

/// Appends values as 17-significant-digit CSV fields.
class CsvRow {
public:
    explicit CsvRow(fmt::memory_buffer& buf) : buf_(buf) {}
    CsvRow& operator<<(double v) {
        sep();
        fmt::format_to(std::back_inserter(buf_), "{:.17g}", v);
        return *this;
    }
    CsvRow& operator<<(std::size_t v) {
        sep();
        fmt::format_to(std::back_inserter(buf_), "{}", v);
        return *this;
    }
    ~CsvRow() { buf_.push_back('\n'); }

private:
    void sep() {
        if (!first_) buf_.push_back(',');
        first_ = false;
    }
    fmt::memory_buffer& buf_;
    bool first_ = true;
};

void flush(fmt::memory_buffer& buf, std::ofstream& out) {
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    buf.clear();
}

double scale_of(const RunConfig& c) { return std::max({1.0, c.equity.spot}); }

bool cash_funded(const ConventionSpec& conv) {
    using K = ConventionSpec::Kind;
    return conv.kind == K::SingleCurve ||
           ((conv.kind == K::CommonUnsecuredWithRepo || conv.kind == K::SplitCash) && conv.unsecured_assets >= 1);
}

FractionPolicy fraction_policy(const Expression& phi) {
    return [phi](const PolicyState& s, std::size_t) { return phi(s.t, s.spots[0]); };
}

json setup_json(const BsdeSolution& s) {
    if (!s.setup) return nullptr;
    return {{"convention", s.setup->convention.name()},
            {"collateral", s.setup->collateral.name()},
            {"repo_fraction", static_cast<bool>(s.setup->repo_fraction)}};
}

json certificate_json(const OrderingCertificate& cert) {
    json intervals = json::array();
    for (const auto& i : cert.intervals) {
        intervals.push_back({{"start", i.start},
                             {"end", i.end},
                             {"cash_lend", i.cash_lend},
                             {"cash_borrow", i.cash_borrow},
                             {"asset_borrow", i.asset_borrow},
                             {"cash_ordered", i.cash_ordered},
                             {"assets_ordered", i.assets_ordered}});
    }
    return {{"holds", cert.holds}, {"intervals", intervals}};
}

json audit_json(const StrategyAudit& a) {
    return {{"label", a.label},
            {"capital", a.capital},
            {"max_drift", finite_or_null(a.max_drift)},
            {"min_terminal_excess", finite_or_null(a.min_terminal_excess)},
            {"max_terminal_excess", finite_or_null(a.max_terminal_excess)},
            {"dominates", a.dominates}};
}

json martingale_json(const MartingaleCheck& m, const std::string& measure, double tolerance) {
    return {{"max_defect", m.max_defect},
            {"step", m.step},
            {"node", m.node},
            {"measure", measure},
            {"tolerance", tolerance},
            {"pass", m.max_defect <= tolerance}};
}

/// Convergence of a gap between two first-order schemes on N and 2N steps.
json ratio_json(double gap_n, double gap_2n, double resolution, bool& pass) {
    json out = {{"gap_n", gap_n}, {"gap_2n", gap_2n}, {"band", {1.6, 2.4}}};
    if (std::abs(gap_n) <= resolution || std::abs(gap_2n) <= resolution) {
        out["ratio"] = nullptr;
        out["tested"] = false;
        out["note"] = "gap below numerical resolution";
        return out;
    }
    const double ratio = gap_n / gap_2n;
    const bool ok = ratio >= 1.6 && ratio <= 2.4;
    out["ratio"] = ratio;
    out["tested"] = true;
    out["pass"] = ok;
    pass = pass && ok;
    return out;
}

// price ----------------------------------------------------------------------

RunOutcome run_price(const RunConfig& c, const fs::path& dir) {
    const Lattice lattice(c.equity, c.maturity, c.numerics.steps);
    PricingOptions opts = pricing_options(c);
    opts.solver.keep_surfaces = c.output.surface_csv;
    const PricedRun priced = price_config(c, lattice, opts);
    const BsdeSolution& s = priced.solution;

    RunOutcome out;
    json& r = out.report;
    r["command"] = "price";
    r["method"] = c.method;
    r["label"] = s.label;
    r["value"] = s.price;
    r["root_hedge"] = s.root_hedge;
    r["steps"] = s.steps;
    r["value_half_steps"] = optional_number(s.price_half_steps);
    r["bs_oracle"] = nullptr;
    r["value_k3t"] = optional_number(priced.value_k3t);
    r["diagnostics"] = {{"half_step_gap", s.price_half_steps ? json(s.price - *s.price_half_steps) : json(nullptr)},
                        {"max_iterations_used", s.max_iterations_used},
                        {"max_restart_gap", s.max_restart_gap},
                        {"discount", rate_to_json(s.discount)},
                        {"drift", rate_to_json(s.drift)},
                        {"setup", setup_json(s)}};
    r["warnings"] = s.warnings;
    r["config"] = c.resolved;
    write_json(dir / "result.json", r, out);

    if (c.output.surface_csv && s.has_surfaces()) {
        const fs::path path = dir / "hedge_surface.csv";
        std::ofstream csv(path, std::ios::binary | std::ios::trunc);
        if (!csv) throw DomainError(kModule, "cannot write '" + path.string() + "'");
        fmt::memory_buffer buf;
        fmt::format_to(std::back_inserter(buf), "n,j,t,S,Z,xi,iterations\n");
        for (std::size_t n = 0; n <= s.steps; ++n) {
            for (std::size_t j = 0; j <= n; ++j) {
                CsvRow(buf) << n << j << lattice.time(n) << lattice.spot(n, j) << s.value.at(n, j)
                            << s.hedge.at(n, j) << static_cast<std::size_t>(s.iterations.at(n, j));
            }
            if (buf.size() > (1u << 20)) flush(buf, csv);
        }
        flush(buf, csv);
        out.files.push_back(path);
    }
    out.summary = fmt::format("price {} = {:.10g} (N={}, method {})", s.label, s.price, s.steps, c.method);
    return out;
}

// simulate -------------------------------------------------------------------

void ledger_rows(fmt::memory_buffer& buf, std::size_t path, const WealthLedger& L) {
    for (std::size_t n = 0; n <= L.steps; ++n) {
        CsvRow(buf) << path << n << L.t[n] << L.spots[n] << L.wealth[n] << L.gains[n] << L.funding[n]
                    << L.margin[n] << L.flows[n] << L.netted[n] << L.cash[n] << L.collateral[n] << L.units[n]
                    << L.cash_lend_units[n] << L.cash_borrow_units[n] << L.asset_lend_units[n]
                    << L.asset_borrow_units[n];
    }
}

RunOutcome run_simulate(const RunConfig& c, const fs::path& dir) {
    const Lattice lattice(c.equity, c.maturity, c.numerics.steps);
    PricingOptions opts = pricing_options(c);
    opts.half_step_diagnostic = false;
    const PricedRun priced = price_config(c, lattice, opts);
    const BsdeSolution& s = priced.solution;
    if (!s.setup) {
        throw DomainError(kModule, "method '" + c.method + "' has no replication setup to simulate");
    }
    const ReplicationSetup& setup = *s.setup;
    const StrategySpec strategy = hedge_strategy(s, lattice);
    const RateSpec mu = RateSpec::flat(c.equity.drift);
    const std::size_t M = c.numerics.paths;
    const std::size_t N = c.numerics.steps;
    const std::size_t keep = std::min(c.output.ledger_paths, M);

    std::vector<double> terminal(M), sf_residual(M), cash_residual(M);
    std::vector<WealthLedger> kept(keep);
    for (std::size_t first = 0; first < M; first += kPathBlock) {
        const std::size_t count = std::min(kPathBlock, M - first);
        const PathEnsemble ens =
            simulate_path_range(c.equity, mu, c.maturity, N, first, count, c.numerics.seed, "P", c.numerics.threads);
        detail::parallel_for(count, c.numerics.threads, [&](std::size_t i) {
            const Scenario sc = Scenario::from_paths({&ens}, i, {c.equity.dividend_yield});
            WealthLedger L = evolve_wealth(strategy, c.contract, setup.collateral, setup.convention, setup.accounts,
                                           sc, s.price);
            const std::size_t m = first + i;
            terminal[m] = L.terminal_wealth();
            sf_residual[m] = self_financing_residual(L);
            cash_residual[m] = cash_identity_residual(L);
            if (m < keep) kept[m] = std::move(L);
        });
    }

    RunOutcome out;
    if (keep > 0) {
        const fs::path path = dir / "ledgers.csv";
        std::ofstream csv(path, std::ios::binary | std::ios::trunc);
        if (!csv) throw DomainError(kModule, "cannot write '" + path.string() + "'");
        fmt::memory_buffer buf;
        fmt::format_to(std::back_inserter(buf),
                       "path,n,t,S,V,G,F,FC,A,V_cld,gamma,C,xi,psi_cash_lend,psi_cash_borrow,psi_asset_lend,"
                       "psi_asset_borrow\n");
        for (std::size_t m = 0; m < keep; ++m) {
            ledger_rows(buf, m, kept[m]);
            flush(buf, csv);
        }
        out.files.push_back(path);
    }

    double sum = 0.0, sum_sq = 0.0;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (double v : terminal) {
        sum += v;
        sum_sq += v * v;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double n = static_cast<double>(M);
    const double mean = sum / n;
    const double var = M > 1 ? std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0)) : 0.0;

    json& r = out.report;
    r["command"] = "simulate";
    r["method"] = c.method;
    r["label"] = s.label;
    r["price"] = s.price;
    r["steps"] = N;
    r["paths"] = M;
    r["seed"] = c.numerics.seed;
    r["measure"] = "real-world drift mu";
    r["ledger_paths"] = keep;
    r["terminal_wealth"] = {{"mean", mean},
                            {"std", std::sqrt(var)},
                            {"stderr", std::sqrt(var / n)},
                            {"rms", std::sqrt(sum_sq / n)},
                            {"min", lo},
                            {"max", hi}};
    r["max_self_financing_residual"] = *std::max_element(sf_residual.begin(), sf_residual.end());
    r["max_cash_identity_residual"] = *std::max_element(cash_residual.begin(), cash_residual.end());
    r["setup"] = setup_json(s);
    r["config"] = c.resolved;
    write_json(dir / "summary.json", r, out);
    out.summary = fmt::format("simulate {} paths: hedging error mean {:.6g}, std {:.6g}", M, mean, std::sqrt(var));
    return out;
}

// verify ---------------------------------------------------------------------

bool gate_convention(const ConventionSpec& conv) {
    return conv.kind == ConventionSpec::Kind::PartialNettingShorts || conv.kind == ConventionSpec::Kind::SingleCurve;
}

RunOutcome run_verify(const RunConfig& c, const fs::path& dir) {
    const Lattice lattice(c.equity, c.maturity, c.numerics.steps);
    const Lattice gate_lattice = lattice.with_steps(c.numerics.gate_steps);
    bool pass = true;
    RunOutcome out;

    // Arbitrage gate.
    json gate;
    if (gate_convention(c.convention)) {
        ArbitrageOptions ao;
        ao.strategies = c.numerics.strategies;
        ao.seed = c.numerics.seed;
        ao.threads = c.numerics.threads;
        const ArbitrageReport rep = arbitrage_gate(c.convention, c.accounts, c.contract, gate_lattice, ao);
        json audits = json::array(), counter = json::array();
        for (const auto& a : rep.audits) audits.push_back(audit_json(a));
        for (const auto& a : rep.counterexamples) counter.push_back(audit_json(a));
        gate = {{"verdict", rep.verdict},
                {"convention", rep.convention},
                {"measure", rep.measure},
                {"discounting", rep.discounting},
                {"lattice_steps", rep.lattice_steps},
                {"paths", rep.paths},
                {"drift_tolerance", ao.drift_tolerance},
                {"max_drift", finite_or_null(rep.audits.empty() ? 0.0 : rep.max_drift)},
                {"worst_strategy", rep.audits.empty() ? json(nullptr) : json(rep.audits[rep.worst_strategy].label)},
                {"dominating", rep.dominating},
                {"cash_only_gap", rep.cash_only_gap},
                {"violation_exhibited", rep.violation_exhibited},
                {"certificate", certificate_json(rep.certificate)},
                {"counterexamples", counter},
                {"notes", rep.notes},
                {"audits", audits}};
        if (rep.verdict == "fail" || rep.violation_exhibited) pass = false;
    } else {
        gate = {{"verdict", "not_applicable"},
                {"convention", c.convention.name()},
                {"notes", {"the gate covers partial_netting_shorts and single_curve only"}}};
    }
    gate["command"] = "verify";
    gate["config"] = c.resolved;
    write_json(dir / "arbitrage_report.json", gate, out);

    // Martingale checks and replication closure.
    const double tol = 1e-10 * scale_of(c);
    json checks;
    const MeasureSpec repo = MeasureSpec::repo(c.accounts, c.equity);
    const MartingaleCheck k = check_cum_dividend_martingale(lattice, c.accounts.assets[0].borrow, repo);
    checks["cum_dividend_repo"] = martingale_json(k, repo.label, tol);
    pass = pass && k.max_defect <= tol;

    PricingOptions opts = pricing_options(c);
    opts.half_step_diagnostic = false;
    const PricedRun priced = price_config(c, lattice, opts);
    const BsdeSolution& s = priced.solution;
    checks["price"] = {{"method", c.method}, {"label", s.label}, {"value", s.price}};
    if (s.setup) {
        // All-up, all-down and seeded random lattice paths; the bound is a few
        // ulps of the largest spot the lattice reaches.
        const std::size_t N = lattice.steps();
        const double closure_tol = 1e-12 * std::max(1.0, lattice.spot(N, N));
        std::mt19937_64 rng(c.numerics.seed);
        double worst = 0.0;
        const std::size_t count = 64;
        std::vector<std::uint8_t> moves(N);
        for (std::size_t p = 0; p < count; ++p) {
            for (std::size_t n = 0; n < N; ++n) {
                moves[n] = p == 0 ? 1 : p == 1 ? 0 : static_cast<std::uint8_t>(rng() >> 63);
            }
            worst = std::max(worst, std::abs(replicate(s, lattice, c.contract, moves).terminal_wealth()));
        }
        checks["replication_closure"] = {
            {"paths", count}, {"max_abs_terminal_wealth", worst}, {"tolerance", closure_tol}, {"pass", worst <= closure_tol}};
        pass = pass && worst <= closure_tol;
    } else {
        checks["replication_closure"] = {{"tested", false}, {"note", "method carries no replication setup"}};
    }

    if (gate_convention(c.convention)) {
        const HedgerPriceSet hp = hedger_price_set(c.contract, c.convention, c.accounts, lattice, c.capital, opts);
        checks["hedger_price_set"] = {{"convention", c.convention.name()},
                                      {"capital", hp.capital},
                                      {"price", hp.price},
                                      {"low", hp.low},
                                      {"high", hp.high},
                                      {"in_bracket", hp.in_bracket},
                                      {"price_at_zero_capital", optional_number(hp.price_at_zero_capital)}};
        pass = pass && hp.in_bracket;
    } else {
        checks["hedger_price_set"] = {{"tested", false},
                                      {"note", "the cash-rate bracket applies to cash-funded conventions only"}};
    }

    checks["command"] = "verify";
    checks["pass"] = pass;
    checks["config"] = c.resolved;
    write_json(dir / "martingale_checks.json", checks, out);

    out.report = {{"command", "verify"},
                  {"pass", pass},
                  {"gate_verdict", gate["verdict"]},
                  {"arbitrage_report", "arbitrage_report.json"},
                  {"martingale_checks", "martingale_checks.json"},
                  {"config", c.resolved}};
    write_json(dir / "verify.json", out.report, out);
    out.exit_code = pass ? kExitSuccess : kExitVerification;
    out.summary = fmt::format("verify: gate {}, checks {}", gate["verdict"].get<std::string>(), pass ? "pass" : "FAIL");
    return out;
}

// compare --------------------------------------------------------------------

json compare_k3(const RunConfig& c, bool& pass) {
    if (c.collateral.kind != CollateralSpec::Kind::Exogenous) {
        return {{"tested", false}, {"note", "needs collateral.type 'exogenous'"}};
    }
    PricingOptions opts = pricing_options(c);
    opts.half_step_diagnostic = false;
    const Lattice lattice(c.equity, c.maturity, c.numerics.steps);
    const auto at = [&](const Lattice& l) {
        return price_exogenous_collateral(c.contract, c.collateral.exogenous, c.accounts, l, opts);
    };
    const ExogenousCollateralPrice a = at(lattice);
    const ExogenousCollateralPrice b = at(lattice.with_steps(2 * c.numerics.steps));
    json out = {{"tested", true},
                {"steps", c.numerics.steps},
                {"value_k3", a.value_k3},
                {"value_k3t", a.value_k3t},
                {"value_k3_2n", b.value_k3},
                {"value_k3t_2n", b.value_k3t},
                {"relative_gap", std::abs(a.value_k3 - a.value_k3t) / std::max(std::abs(a.value_k3), 1e-300)},
                {"relative_gap_2n", std::abs(b.value_k3 - b.value_k3t) / std::max(std::abs(b.value_k3), 1e-300)}};
    out["convergence"] = ratio_json(a.value_k3 - a.value_k3t, b.value_k3 - b.value_k3t,
                                    1e-12 * std::max(1.0, std::abs(a.value_k3)), pass);
    return out;
}

json compare_gamma(const RunConfig& c, bool& pass) {
    std::vector<std::string> reasons;
    const RateSpec& kappa = c.equity.dividend_yield;
    if (kappa.min_value() != 0.0 || kappa.max_value() != 0.0) reasons.push_back("needs a zero dividend yield");
    if (!c.accounts.symmetric_cash()) reasons.push_back("needs one cash rate");
    if (!c.contract.lumps.empty() || c.contract.rate) reasons.push_back("needs a terminal-only contract");
    if (!reasons.empty()) return {{"tested", false}, {"note", reasons}};

    PricingOptions opts = pricing_options(c);
    opts.half_step_diagnostic = false;
    ReplicationSetup setup;
    setup.convention = ConventionSpec::single_curve();
    setup.collateral = CollateralSpec::none();
    setup.accounts = c.accounts;
    const RateSpec& r0 = c.accounts.cash_lend;
    const auto lab = [&](const Lattice& l, const RateSpec& gamma) {
        const BsdeSolution rep = price_with_setup(c.contract, setup, l, r0, r0, opts);
        return gamma_measure_price(gamma, rep, c.accounts, l);
    };
    const Lattice lattice(c.equity, c.maturity, c.numerics.steps);
    const GammaPrice a = lab(lattice, c.gamma);
    const GammaPrice b = lab(lattice.with_steps(2 * c.numerics.steps), c.gamma);
    const GammaPrice same = lab(lattice, r0);
    const bool zero_ok = same.gap == 0.0;
    pass = pass && zero_ok;

    const BsdeSolution rep = price_with_setup(c.contract, setup, lattice, r0, r0, opts);
    const GammaMartingaleReport mart =
        check_gamma_martingale(c.gamma, rep, c.accounts, lattice, SourceConvention::ExponentialAccrual);

    json out = {{"tested", true},
                {"gamma", rate_to_json(c.gamma)},
                {"value_gamma", a.value_gamma},
                {"value_riskneutral", a.value_riskneutral},
                {"relative_gap", a.relative_gap},
                {"relative_gap_2n", b.relative_gap},
                {"gap_at_gamma_equal_r0", same.gap},
                {"gap_at_gamma_equal_r0_pass", zero_ok},
                {"martingale_defect_exponential_accrual", mart.max_defect}};
    out["convergence"] = ratio_json(a.gap, b.gap, 1e-12 * std::max(1.0, std::abs(a.value_riskneutral)), pass);
    return out;
}

json compare_margin(const RunConfig& c, bool& pass) {
    const Lattice lattice(c.equity, c.maturity, c.numerics.steps);
    const double amounts[] = {-50.0, -1.0, 0.0, 1.0, 50.0};
    using K = MarginConvention::Kind;
    bool seg_ok = true, full_ok = true;
    for (std::size_t n = 0; n < lattice.steps(); ++n) {
        const StepRates rates = step_rates(c.accounts, lattice.time(n), lattice.dt());
        for (double C : amounts) {
            const double rec = std::max(C, 0.0), post = std::max(-C, 0.0);
            seg_ok = seg_ok && margin_cost_step(K::PartialRehypo, 0.0, 0.0, rec, post, rates) ==
                                   margin_cost_step(K::Segregated, 0.0, 0.0, rec, post, rates);
            full_ok = full_ok && margin_cost_step(K::PartialRehypo, 1.0, 1.0, rec, post, rates) ==
                                     margin_cost_step(K::FullRehypo, 0.0, 0.0, rec, post, rates);
        }
    }
    pass = pass && seg_ok && full_ok;
    return {{"partial_0_0_equals_segregated", seg_ok}, {"partial_1_1_equals_full_rehypothecation", full_ok}};
}

json compare_netting(const RunConfig& c, bool& pass) {
    AccountSet acc = c.accounts;
    acc.assets[0].borrow = acc.assets[0].lend;
    const Lattice lattice(c.equity, c.maturity, c.numerics.gate_steps);
    const std::size_t N = lattice.steps();
    const std::size_t paths = std::size_t{1} << N;
    const std::vector<SampledStrategy> sample = sample_strategies(8, c.numerics.seed);
    const ConventionSpec npa = ConventionSpec::netting_per_asset();
    const ConventionSpec split = ConventionSpec::split_cash(0);
    std::vector<double> gap(sample.size()), size(sample.size());
    detail::parallel_for(sample.size(), c.numerics.threads, [&](std::size_t i) {
        const StrategySpec st = sample[i].policy(c.equity.spot, c.maturity);
        std::vector<std::uint8_t> moves(N);
        for (std::size_t p = 0; p < paths; ++p) {
            for (std::size_t n = 0; n < N; ++n) moves[n] = static_cast<std::uint8_t>((p >> (N - 1 - n)) & 1u);
            const Scenario sc = Scenario::from_lattice(lattice, moves);
            const WealthLedger a = evolve_wealth(st, c.contract, CollateralSpec::none(), npa, acc, sc, sample[i].capital);
            const WealthLedger b = evolve_wealth(st, c.contract, CollateralSpec::none(), split, acc, sc, sample[i].capital);
            for (std::size_t n = 0; n <= N; ++n) {
                gap[i] = std::max(gap[i], std::abs(a.wealth[n] - b.wealth[n]));
                size[i] = std::max(size[i], std::abs(a.wealth[n]));
            }
        }
    });
    const double worst = *std::max_element(gap.begin(), gap.end());
    const double tol = 1e-12 * std::max(1.0, *std::max_element(size.begin(), size.end()));
    pass = pass && worst <= tol;
    return {{"strategies", sample.size()},
            {"lattice_steps", N},
            {"paths", paths},
            {"repo_rate", rate_to_json(acc.assets[0].lend)},
            {"max_wealth_gap", worst},
            {"tolerance", tol},
            {"pass", worst <= tol}};
}

RunOutcome run_compare(const RunConfig& c, const fs::path& dir) {
    bool pass = true;
    RunOutcome out;
    json& r = out.report;
    r["command"] = "compare";
    r["k3_k3t"] = compare_k3(c, pass);
    r["gamma_measure"] = compare_gamma(c, pass);
    r["convention_collapses"] = {{"margin", compare_margin(c, pass)},
                                 {"netting_per_asset_vs_split_cash", compare_netting(c, pass)}};
    r["pass"] = pass;
    r["config"] = c.resolved;
    write_json(dir / "compare.json", r, out);
    out.exit_code = pass ? kExitSuccess : kExitVerification;
    std::string k3 = "K3/K3T skipped";
    if (r["k3_k3t"]["tested"].get<bool>()) {
        k3 = fmt::format("K3/K3T relative gap {:.3g}", r["k3_k3t"]["relative_gap"].get<double>());
    }
    out.summary = fmt::format("compare: {}; {}", k3, pass ? "all assertions pass" : "FAIL");
    return out;
}

}  // namespace

Command parse_command(const std::string& name) {
    if (name == "price") return Command::Price;
    if (name == "simulate") return Command::Simulate;
    if (name == "verify") return Command::Verify;
    if (name == "compare") return Command::Compare;
    throw ConfigError(kModule, "unknown command '" + name + "'");
}

const char* command_name(Command command) {
    switch (command) {
        case Command::Price: return "price";
        case Command::Simulate: return "simulate";
        case Command::Verify: return "verify";
        case Command::Compare: return "compare";
    }
    return "";
}

PricingOptions pricing_options(const RunConfig& config) {
    PricingOptions o;
    o.solver.tolerance = config.numerics.tolerance;
    o.solver.max_iterations = config.numerics.max_iterations;
    return o;
}

RateSpec funding_drift(const RunConfig& config) {
    if (cash_funded(config.convention)) return config.accounts.cash_lend - config.equity.dividend_yield;
    return martingale_drift(config.accounts, config.equity);
}

PricedRun price_config(const RunConfig& c, const Lattice& lattice, const PricingOptions& opts) {
    const AccountSet& acc = c.accounts;
    PricedRun out;
    if (c.method == "linear") {
        out.solution = price_linear(c.contract, lattice, funding_drift(c), acc.cash_lend, opts);
    } else if (c.method == "convention") {
        ReplicationSetup setup;
        setup.convention = c.convention;
        setup.collateral = c.collateral;
        setup.accounts = acc;
        if (c.repo_fraction) setup.repo_fraction = fraction_policy(*c.repo_fraction);
        out.solution = price_with_setup(c.contract, setup, lattice, funding_drift(c), acc.cash_lend, opts);
    } else if (c.method == "full_collateral") {
        out.solution = price_full_collateral(c.contract, acc, lattice, opts);
    } else if (c.method == "exogenous_collateral") {
        ExogenousCollateralPrice e = price_exogenous_collateral(c.contract, c.collateral.exogenous, acc, lattice, opts);
        out.value_k3t = e.value_k3t;
        out.solution = std::move(e.k3);
    } else if (c.method == "hedger_collateral") {
        out.solution = price_hedger_collateral(c.contract, c.collateral.haircut_negative, c.collateral.haircut_positive,
                                               acc, lattice, opts);
    } else if (c.method == "asymmetric_rates") {
        out.solution = price_asymmetric_rates(c.contract, c.convention, acc, lattice, opts);
    } else if (c.method == "extension") {
        out.solution = price_piterbarg_extension(c.contract, c.collateral.exogenous, fraction_policy(*c.repo_fraction),
                                                 acc, lattice, opts);
    } else {
        throw ConfigError(kModule, "unknown pricing method '" + c.method + "'");
    }
    return out;
}

RunOutcome run(const RunConfig& config, Command command, const fs::path& out_dir) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw DomainError(kModule, "cannot create output directory '" + out_dir.string() + "': " + ec.message());
    switch (command) {
        case Command::Price: return run_price(config, out_dir);
        case Command::Simulate: return run_simulate(config, out_dir);
        case Command::Verify: return run_verify(config, out_dir);
        case Command::Compare: return run_compare(config, out_dir);
    }
    throw ConfigError(kModule, "unknown command");
}

}  // namespace fundhedge
