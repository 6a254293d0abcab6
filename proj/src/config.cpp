#include "fundhedge/config.hpp"

#include "fundhedge/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace fundhedge {

namespace {

using nlohmann::json;

constexpr const char* kModule = "cli";

[[noreturn]] void fail(const std::string& message) { throw ConfigError(kModule, message); }

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

/// Read-only view of one JSON object in the config with its dotted path.
class Section {
public:
    Section(const json* node, std::string path) : node_(node), path_(std::move(path)) {
        if (node_ && !node_->is_object()) fail(path_ + " must be an object");
    }

    bool present() const { return node_ != nullptr; }
    bool has(const std::string& key) const { return node_ && node_->contains(key); }
    std::string key_path(const std::string& key) const { return join(path_, key); }

    void allow(std::initializer_list<const char*> keys) const {
        if (!node_) return;
        const std::set<std::string> allowed(keys.begin(), keys.end());
        for (const auto& item : node_->items()) {
            if (!allowed.count(item.key())) fail("unknown key '" + key_path(item.key()) + "'");
        }
    }

    const json* get(const std::string& key) const {
        if (!node_) return nullptr;
        const auto it = node_->find(key);
        return it == node_->end() ? nullptr : &*it;
    }

    Section section(const std::string& key) const { return Section(get(key), key_path(key)); }

    double number(const std::string& key, std::optional<double> fallback = std::nullopt) const {
        const json* v = get(key);
        if (!v) {
            if (fallback) return *fallback;
            fail("missing required key '" + key_path(key) + "'");
        }
        if (!v->is_number()) fail(key_path(key) + " must be a number");
        const double x = v->get<double>();
        if (!std::isfinite(x)) fail(key_path(key) + " must be finite");
        return x;
    }

    std::uint64_t count(const std::string& key, std::uint64_t fallback, std::uint64_t minimum) const {
        const json* v = get(key);
        if (!v) return fallback;
        if (!v->is_number_unsigned() || v->get<std::uint64_t>() < minimum) {
            fail(key_path(key) + " must be an integer >= " + std::to_string(minimum));
        }
        return v->get<std::uint64_t>();
    }

    bool flag(const std::string& key, bool fallback) const {
        const json* v = get(key);
        if (!v) return fallback;
        if (!v->is_boolean()) fail(key_path(key) + " must be true or false");
        return v->get<bool>();
    }

    std::string text(const std::string& key, std::optional<std::string> fallback = std::nullopt) const {
        const json* v = get(key);
        if (!v) {
            if (fallback) return *fallback;
            fail("missing required key '" + key_path(key) + "'");
        }
        if (!v->is_string()) fail(key_path(key) + " must be a string");
        return v->get<std::string>();
    }

    std::string choice(const std::string& key, std::initializer_list<const char*> options,
                       std::optional<std::string> fallback = std::nullopt) const {
        const std::string value = text(key, fallback);
        for (const char* o : options) {
            if (value == o) return value;
        }
        std::string list;
        for (const char* o : options) list += std::string(list.empty() ? "" : ", ") + o;
        fail(key_path(key) + " must be one of: " + list + " (got '" + value + "')");
    }

    Expression expression(const std::string& key, std::optional<std::string> fallback = std::nullopt) const {
        const json* v = get(key);
        if (v && v->is_number()) return Expression::constant(v->get<double>());
        const std::string source = text(key, fallback);
        try {
            return Expression::parse(source);
        } catch (const Error& e) {
            fail(key_path(key) + ": " + e.what());
        }
    }

    RateSpec rate(const std::string& key) const {
        const json* v = get(key);
        if (!v) fail("missing required key '" + key_path(key) + "'");
        return parse_rate(*v, key_path(key));
    }

    std::optional<RateSpec> optional_rate(const std::string& key) const {
        const json* v = get(key);
        if (!v) return std::nullopt;
        return parse_rate(*v, key_path(key));
    }

    static RateSpec parse_rate(const json& v, const std::string& path) {
        if (v.is_number()) return RateSpec::flat(v.get<double>());
        if (!v.is_object()) fail(path + " must be a number or an object with breakpoints and values");
        Section s(&v, path);
        s.allow({"breakpoints", "values"});
        const json* b = s.get("breakpoints");
        const json* x = s.get("values");
        if (!b || !x) fail(path + " needs both 'breakpoints' and 'values'");
        try {
            return RateSpec(b->get<std::vector<double>>(), x->get<std::vector<double>>());
        } catch (const json::exception&) {
            fail(path + ": breakpoints and values must be arrays of numbers");
        } catch (const Error& e) {
            fail(path + ": " + e.what());
        }
    }

private:
    const json* node_;
    std::string path_;
};

}  // namespace

nlohmann::json rate_to_json(const RateSpec& r) {
    if (r.is_flat() && std::isinf(r.horizon())) return r.values().front();
    return json{{"breakpoints", r.breakpoints()}, {"values", r.values()}};
}

namespace {

/// A pair of lend/borrow rates given either as one number or as {lend, borrow}.
AssetFunding rate_pair(const Section& parent, const std::string& key) {
    const json* v = parent.get(key);
    if (!v) fail("missing required key '" + parent.key_path(key) + "'");
    if (v->is_object() && (v->contains("lend") || v->contains("borrow"))) {
        const Section s(v, parent.key_path(key));
        s.allow({"lend", "borrow"});
        return {s.rate("lend"), s.rate("borrow")};
    }
    const RateSpec r = Section::parse_rate(*v, parent.key_path(key));
    return {r, r};
}

json pair_json(const RateSpec& lend, const RateSpec& borrow) {
    if (lend == borrow) return rate_to_json(lend);
    return json{{"lend", rate_to_json(lend)}, {"borrow", rate_to_json(borrow)}};
}

ConventionSpec make_convention(const std::string& variant, std::size_t k) {
    if (variant == "single_curve") return ConventionSpec::single_curve();
    if (variant == "common_unsecured_with_repo") return ConventionSpec::common_unsecured_with_repo(k);
    if (variant == "split_cash") return ConventionSpec::split_cash(k);
    if (variant == "netting_per_asset") return ConventionSpec::netting_per_asset();
    return ConventionSpec::partial_netting_shorts();
}

void check_grid(const RateSpec& r, const std::string& name, double T, std::size_t N) {
    try {
        r.check_covers(T, name);
        r.check_aligned(T, N, name);
    } catch (const StepSizeError& e) {
        fail(std::string("misaligned breakpoints: ") + e.what());
    } catch (const Error& e) {
        fail(e.what());
    }
}

std::string resolve_method(const std::string& requested, const RunConfig& c) {
    if (requested != "auto") return requested;
    switch (c.collateral.kind) {
        case CollateralSpec::Kind::Full:
            return "full_collateral";
        case CollateralSpec::Kind::Haircut:
            return "hedger_collateral";
        case CollateralSpec::Kind::Exogenous:
            return c.repo_fraction ? "extension" : "exogenous_collateral";
        default:
            break;
    }
    const bool split = c.convention.kind == ConventionSpec::Kind::SplitCash ||
                       c.convention.kind == ConventionSpec::Kind::PartialNettingShorts;
    if (split && !c.accounts.symmetric_cash()) return "asymmetric_rates";
    return "convention";
}

}  // namespace

RunConfig parse_config(const std::string& text, const ConfigOverrides& overrides) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        const std::size_t offset = e.byte == 0 ? 0 : std::min<std::size_t>(e.byte - 1, text.size());
        std::size_t line = 1, column = 1;
        for (std::size_t i = 0; i < offset; ++i) {
            if (text[i] == '\n') {
                ++line;
                column = 1;
            } else {
                ++column;
            }
        }
        std::string what = e.what();
        // Keep only the reason; the location is recomputed above.
        const auto at = what.find("column");
        const auto colon = at == std::string::npos ? at : what.find(": ", at);
        if (colon != std::string::npos) what = what.substr(colon + 2);
        fail("parse error at line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what);
    }

    const Section root(&doc, "");
    root.allow({"model", "rates", "contract", "convention", "collateral", "pricing", "numerics", "output"});
    RunConfig c;
    json& out = c.resolved;

    // numerics first: the grid is needed for alignment checks.
    const Section num = root.section("numerics");
    num.allow({"steps", "paths", "seed", "tolerance", "max_iterations", "threads", "gate_steps", "strategies"});
    c.numerics.steps = num.count("steps", 1000, 1);
    c.numerics.paths = num.count("paths", 100000, 1);
    c.numerics.seed = num.count("seed", 42, 0);
    c.numerics.tolerance = num.number("tolerance", 1e-13);
    c.numerics.max_iterations = static_cast<int>(num.count("max_iterations", 50, 1));
    c.numerics.threads = static_cast<unsigned>(num.count("threads", 0, 0));
    c.numerics.gate_steps = num.count("gate_steps", 12, 1);
    c.numerics.strategies = num.count("strategies", 100, 1);
    if (overrides.steps) c.numerics.steps = *overrides.steps;
    if (overrides.paths) c.numerics.paths = *overrides.paths;
    if (overrides.seed) c.numerics.seed = *overrides.seed;
    if (c.numerics.steps == 0) fail("numerics.steps must be >= 1");
    if (c.numerics.paths == 0) fail("numerics.paths must be >= 1");
    if (!(c.numerics.tolerance > 0.0)) fail("numerics.tolerance must be positive");
    if (c.numerics.gate_steps > 20) fail("numerics.gate_steps must be <= 20");
    out["numerics"] = {{"steps", c.numerics.steps},         {"paths", c.numerics.paths},
                       {"seed", c.numerics.seed},           {"tolerance", c.numerics.tolerance},
                       {"max_iterations", c.numerics.max_iterations}, {"threads", c.numerics.threads},
                       {"gate_steps", c.numerics.gate_steps}, {"strategies", c.numerics.strategies}};
    const std::size_t N = c.numerics.steps;

    const Section model = root.section("model");
    if (!model.present()) fail("missing required key 'model'");
    model.allow({"spot", "volatility", "drift", "dividend_yield", "maturity"});
    c.equity.spot = model.number("spot");
    c.equity.volatility = model.number("volatility");
    c.equity.drift = model.number("drift", 0.0);
    c.equity.dividend_yield = model.optional_rate("dividend_yield").value_or(RateSpec::flat(0.0));
    c.maturity = model.number("maturity");
    if (!(c.equity.spot > 0.0)) fail("model.spot must be positive");
    if (!(c.equity.volatility > 0.0)) fail("model.volatility must be positive");
    if (!(c.maturity > 0.0)) fail("model.maturity must be positive");
    const double T = c.maturity;
    check_grid(c.equity.dividend_yield, "model.dividend_yield", T, N);
    out["model"] = {{"spot", c.equity.spot},
                    {"volatility", c.equity.volatility},
                    {"drift", c.equity.drift},
                    {"dividend_yield", rate_to_json(c.equity.dividend_yield)},
                    {"maturity", T}};

    const Section rates = root.section("rates");
    if (!rates.present()) fail("missing required key 'rates'");
    rates.allow({"cash", "repo"});
    const AssetFunding cash = rate_pair(rates, "cash");
    c.accounts.cash_lend = cash.lend;
    c.accounts.cash_borrow = cash.borrow;
    c.accounts.assets = {rates.has("repo") ? rate_pair(rates, "repo") : cash};
    out["rates"] = {{"cash", pair_json(cash.lend, cash.borrow)},
                    {"repo", pair_json(c.accounts.assets[0].lend, c.accounts.assets[0].borrow)}};

    const Section contract = root.section("contract");
    if (!contract.present()) fail("missing required key 'contract'");
    contract.allow({"payoff", "lumps", "rate"});
    const Expression payoff = contract.expression("payoff");
    c.contract.terminal = [payoff, T](double S) { return payoff(T, S); };
    json lumps = json::array();
    if (const json* l = contract.get("lumps")) {
        if (!l->is_array()) fail("contract.lumps must be an array");
        for (std::size_t i = 0; i < l->size(); ++i) {
            const Section s(&(*l)[i], "contract.lumps[" + std::to_string(i) + "]");
            s.allow({"time", "amount"});
            const double t = s.number("time");
            const Expression amount = s.expression("amount");
            c.contract.lumps.push_back({t, [amount](double tt, double S) { return amount(tt, S); }});
            lumps.push_back({{"time", t}, {"amount", amount.source()}});
        }
    }
    std::string rate_source = "0";
    if (contract.has("rate")) {
        const Expression rate = contract.expression("rate");
        rate_source = rate.source();
        c.contract.rate = [rate](double t, double S) { return rate(t, S); };
    }
    try {
        (void)c.contract.schedule(T, N);
    } catch (const Error& e) {
        fail(std::string("contract.lumps: ") + e.what());
    }
    out["contract"] = {{"payoff", payoff.source()}, {"lumps", lumps}, {"rate", rate_source}};

    const Section conv = root.section("convention");
    conv.allow({"variant", "unsecured_assets"});
    const std::string variant = conv.choice("variant",
                                            {"single_curve", "common_unsecured_with_repo", "split_cash",
                                             "netting_per_asset", "partial_netting_shorts"},
                                            std::string("common_unsecured_with_repo"));
    const std::size_t k = conv.count("unsecured_assets", 0, 0);
    c.convention = make_convention(variant, k);

    const Section coll = root.section("collateral");
    coll.allow({"type", "amount", "alpha", "haircut_negative", "haircut_positive", "margin", "beta", "gamma",
                "remuneration_received", "remuneration_posted", "reinvest", "borrow"});
    const std::string type =
        coll.choice("type", {"none", "exogenous", "proportional", "haircut", "full"}, std::string("none"));
    const std::string margin = coll.choice(
        "margin", {"segregated", "full_rehypothecation", "partial_rehypothecation"}, std::string("segregated"));
    json coll_out = {{"type", type}, {"margin", margin}};
    if (type == "exogenous") {
        const Expression amount = coll.expression("amount");
        c.collateral = CollateralSpec::exogenous_amount([amount](double t, double S) { return amount(t, S); });
        coll_out["amount"] = amount.source();
    } else if (type == "proportional") {
        c.collateral = CollateralSpec::proportional(coll.rate("alpha"));
        coll_out["alpha"] = rate_to_json(c.collateral.alpha);
    } else if (type == "haircut") {
        const RateSpec d1 = coll.optional_rate("haircut_negative").value_or(RateSpec::flat(0.0));
        const RateSpec d2 = coll.optional_rate("haircut_positive").value_or(RateSpec::flat(0.0));
        c.collateral = CollateralSpec::haircut(d1, d2);
        coll_out["haircut_negative"] = rate_to_json(d1);
        coll_out["haircut_positive"] = rate_to_json(d2);
    } else if (type == "full") {
        c.collateral = CollateralSpec::full();
    }
    if (margin == "full_rehypothecation") {
        c.convention.margin = MarginConvention::full_rehypothecation();
    } else if (margin == "partial_rehypothecation") {
        const RateSpec beta = coll.rate("beta");
        const RateSpec gamma = coll.rate("gamma");
        c.convention.margin = MarginConvention::partial_rehypothecation(beta, gamma);
        coll_out["beta"] = rate_to_json(beta);
        coll_out["gamma"] = rate_to_json(gamma);
    }
    if (type == "none") {
        c.accounts.collateral_received = c.accounts.cash_lend;
        c.accounts.collateral_posted = c.accounts.cash_borrow;
    } else {
        c.accounts.collateral_received = coll.rate("remuneration_received");
        c.accounts.collateral_posted = coll.rate("remuneration_posted");
    }
    c.accounts.collateral_reinvest = coll.optional_rate("reinvest").value_or(c.accounts.cash_lend);
    c.accounts.collateral_borrow = coll.optional_rate("borrow").value_or(c.accounts.cash_borrow);
    coll_out["remuneration_received"] = rate_to_json(c.accounts.collateral_received);
    coll_out["remuneration_posted"] = rate_to_json(c.accounts.collateral_posted);
    coll_out["reinvest"] = rate_to_json(c.accounts.collateral_reinvest);
    coll_out["borrow"] = rate_to_json(c.accounts.collateral_borrow);
    out["collateral"] = coll_out;
    out["convention"] = {{"variant", variant}, {"unsecured_assets", k}};

    check_grid(c.accounts.cash_lend, "rates.cash", T, N);
    check_grid(c.accounts.cash_borrow, "rates.cash", T, N);
    check_grid(c.accounts.assets[0].lend, "rates.repo", T, N);
    check_grid(c.accounts.assets[0].borrow, "rates.repo", T, N);
    check_grid(c.accounts.collateral_received, "collateral.remuneration_received", T, N);
    check_grid(c.accounts.collateral_posted, "collateral.remuneration_posted", T, N);
    check_grid(c.accounts.collateral_reinvest, "collateral.reinvest", T, N);
    check_grid(c.accounts.collateral_borrow, "collateral.borrow", T, N);
    try {
        c.convention.margin.validate();
        c.convention.validate(c.accounts);
    } catch (const Error& e) {
        fail(std::string("convention: ") + e.what());
    }

    const Section pricing = root.section("pricing");
    pricing.allow({"method", "repo_fraction", "gamma", "capital"});
    const std::string requested =
        pricing.choice("method",
                       {"auto", "linear", "convention", "full_collateral", "exogenous_collateral", "hedger_collateral",
                        "asymmetric_rates", "extension"},
                       std::string("auto"));
    if (pricing.has("repo_fraction")) c.repo_fraction = pricing.expression("repo_fraction");
    c.gamma = pricing.optional_rate("gamma").value_or(RateSpec::flat(0.07));
    check_grid(c.gamma, "pricing.gamma", T, N);
    c.capital = pricing.number("capital", 0.0);
    c.method = resolve_method(requested, c);
    if (c.method == "extension" && !c.repo_fraction) fail("pricing.method 'extension' needs pricing.repo_fraction");
    if ((c.method == "extension" || c.method == "exogenous_collateral") &&
        c.collateral.kind != CollateralSpec::Kind::Exogenous) {
        fail("pricing.method '" + c.method + "' needs collateral.type 'exogenous'");
    }
    out["pricing"] = {{"method", c.method},
                      {"requested_method", requested},
                      {"repo_fraction", c.repo_fraction ? json(c.repo_fraction->source()) : json(nullptr)},
                      {"gamma", rate_to_json(c.gamma)},
                      {"capital", c.capital}};

    const Section output = root.section("output");
    output.allow({"directory", "ledger_paths", "surface_csv"});
    c.output.directory = output.text("directory", std::string());
    c.output.ledger_paths = output.count("ledger_paths", std::min<std::uint64_t>(c.numerics.paths, 100), 0);
    c.output.ledger_paths = std::min(c.output.ledger_paths, c.numerics.paths);
    c.output.surface_csv = output.flag("surface_csv", true);
    out["output"] = {{"directory", c.output.directory},
                     {"ledger_paths", c.output.ledger_paths},
                     {"surface_csv", c.output.surface_csv}};
    return c;
}

RunConfig load_config(const std::string& path, const ConfigOverrides& overrides) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), overrides);
}

}  // namespace fundhedge
