#pragma once

#include "fundhedge/bsde.hpp"
#include "fundhedge/expression.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>

namespace fundhedge {

struct Numerics {
    std::size_t steps = 1000;
    std::size_t paths = 100000;
    std::uint64_t seed = 42;
    double tolerance = 1e-13;
    int max_iterations = 50;
    unsigned threads = 0;
    std::size_t gate_steps = 12;
    std::size_t strategies = 100;
};

struct OutputOptions {
    std::string directory;      // empty: taken from FUNDHEDGE_OUT or the --out flag
    std::size_t ledger_paths = 100;
    bool surface_csv = true;
};

/// Validated run configuration. `resolved` echoes every setting, defaults
/// included, and is embedded in each report.
struct RunConfig {
    EquityModel equity;
    double maturity = 1.0;
    AccountSet accounts;
    CashFlowStream contract;
    ConventionSpec convention;
    CollateralSpec collateral;
    std::string method;  // resolved pricing method
    std::optional<Expression> repo_fraction;
    RateSpec gamma = RateSpec::flat(0.07);
    double capital = 0.0;
    Numerics numerics;
    OutputOptions output;
    nlohmann::json resolved;
};

struct ConfigOverrides {
    std::optional<std::size_t> steps;
    std::optional<std::size_t> paths;
    std::optional<std::uint64_t> seed;
};

/// Throws ConfigError: parse errors carry line and column, schema errors name
/// the offending key, and rate breakpoints off the time grid are rejected.
RunConfig parse_config(const std::string& text, const ConfigOverrides& overrides = {});
RunConfig load_config(const std::string& path, const ConfigOverrides& overrides = {});

/// A flat curve as a bare number, otherwise {breakpoints, values}.
nlohmann::json rate_to_json(const RateSpec& rate);

}  // namespace fundhedge
