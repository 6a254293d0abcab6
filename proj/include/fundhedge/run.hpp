#pragma once

#include "fundhedge/config.hpp"
#include "fundhedge/pricing.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace fundhedge {

enum class Command { Price, Simulate, Verify, Compare };

/// Throws ConfigError for an unknown name.
Command parse_command(const std::string& name);
const char* command_name(Command command);

inline constexpr int kExitSuccess = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumeric = 3;
inline constexpr int kExitVerification = 4;

PricingOptions pricing_options(const RunConfig& config);

/// Drift of S used by the convention and linear methods: r^{0,+} - kappa when
/// the asset is cash-funded, otherwise the repo martingale drift.
RateSpec funding_drift(const RunConfig& config);

struct PricedRun {
    BsdeSolution solution;
    std::optional<double> value_k3t;  // exogenous collateral only
};

/// Prices the configured contract with the configured method on `lattice`.
PricedRun price_config(const RunConfig& config, const Lattice& lattice, const PricingOptions& options);

struct RunOutcome {
    int exit_code = kExitSuccess;
    nlohmann::json report;                    // main report, also written to disk
    std::vector<std::filesystem::path> files; // artifacts in write order
    std::string summary;                      // one line for the terminal
};

/// Executes one subcommand and writes its artifacts to `out_dir`. Library
/// errors propagate; a failed assertion in verify or compare sets exit 4.
RunOutcome run(const RunConfig& config, Command command, const std::filesystem::path& out_dir);

}  // namespace fundhedge
