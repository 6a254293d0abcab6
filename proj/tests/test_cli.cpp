#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fundhedge/errors.hpp"
#include "fundhedge/run.hpp"
#include "oracles.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>

using namespace fundhedge;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = FUNDHEDGE_CONFIG_DIR;

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("fundhedge-test-" + std::to_string(::getpid())) / name;
    fs::remove_all(p);
    return p;
}

nlohmann::json read_json(const fs::path& p) {
    std::ifstream in(p);
    return nlohmann::json::parse(in);
}

std::string error_of(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

const char* kMinimal = R"j({
  "model": {"spot": 100, "volatility": 0.2, "maturity": 1},
  "rates": {"cash": 0.03},
  "contract": {"payoff": "-call(100)"}
})j";

int exit_status(const std::string& command) {
    const int raw = std::system((command + " >/dev/null 2>&1").c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

}  // namespace

TEST_CASE("minimal config loads with defaults echoed") {
    const RunConfig c = parse_config(kMinimal);
    CHECK(c.numerics.steps == 1000);
    CHECK(c.numerics.paths == 100000);
    CHECK(c.numerics.seed == 42);
    CHECK(c.numerics.tolerance == 1e-13);
    CHECK(c.method == "convention");
    const auto& r = c.resolved;
    CHECK(r["numerics"]["steps"] == 1000);
    CHECK(r["numerics"]["paths"] == 100000);
    CHECK(r["numerics"]["seed"] == 42);
    CHECK(r["numerics"]["tolerance"] == 1e-13);
    CHECK(r["rates"]["repo"] == 0.03);
    CHECK(r["model"]["dividend_yield"] == 0.0);
    CHECK(r["convention"]["variant"] == "common_unsecured_with_repo");
    CHECK(r["collateral"]["type"] == "none");
    CHECK(c.contract.terminal_at(120.0) == -20.0);
}

TEST_CASE("overrides take precedence") {
    const RunConfig c = parse_config(kMinimal, {std::size_t{64}, std::size_t{10}, std::uint64_t{7}});
    CHECK(c.numerics.steps == 64);
    CHECK(c.resolved["numerics"]["paths"] == 10);
    CHECK(c.resolved["numerics"]["seed"] == 7);
}

TEST_CASE("config errors name the offending key") {
    const std::string missing = error_of(R"j({
      "model": {"spot": 100, "volatility": 0.2, "maturity": 1},
      "rates": {"cash": 0.03},
      "contract": {"payoff": "-call(100)"},
      "collateral": {"type": "exogenous", "amount": "-0.5*S", "margin": "segregated", "remuneration_posted": 0.01}
    })j");
    CHECK(missing.find("collateral.remuneration_received") != std::string::npos);

    const std::string misaligned = error_of(R"j({
      "model": {"spot": 100, "volatility": 0.2, "maturity": 1},
      "rates": {"cash": {"breakpoints": [0, 0.3, 1], "values": [0.03, 0.04]}},
      "contract": {"payoff": "-call(100)"},
      "numerics": {"steps": 4}
    })j");
    CHECK(misaligned.find("misaligned") != std::string::npos);
    CHECK(misaligned.find("0.3") != std::string::npos);

    CHECK(error_of(R"j({"model": {"spot": 100, "volatility": 0.2, "maturity": 1, "vol": 2},
                       "rates": {"cash": 0.03}, "contract": {"payoff": "S"}})j")
              .find("'model.vol'") != std::string::npos);
    CHECK(error_of(R"j({"model": {"spot": 100, "volatility": 0.2, "maturity": 1},
                       "rates": {"cash": 0.03}, "contract": {"payoff": "call(100"}})j")
              .find("contract.payoff") != std::string::npos);
    CHECK(error_of(R"j({"model": {"spot": 100, "volatility": 0.2, "maturity": 1},
                       "rates": {"cash": 0.03}, "contract": {"payoff": "S"},
                       "convention": {"variant": "single_curve"}, "pricing": {"method": "magic"}})j")
              .find("pricing.method") != std::string::npos);
    CHECK(error_of(R"j({"model": {"spot": 100, "volatility": 0.2, "maturity": 1},
                       "rates": {"cash": {"lend": 0.02, "borrow": 0.05}}, "contract": {"payoff": "S"},
                       "convention": {"variant": "single_curve"}})j")
              .find("convention") != std::string::npos);
}

TEST_CASE("parse errors report line and column") {
    const std::string e = error_of("{\n  \"model\": {\"spot\": 100,,}\n}\n");
    CHECK(e.find("line 2, column 25") != std::string::npos);
}

TEST_CASE("price on the flat full-collateral config") {
    const RunConfig c = load_config((kConfigs / "ci_flat.json").string(), {std::size_t{200}, {}, {}});
    const fs::path dir = scratch("price");
    const RunOutcome out = run(c, Command::Price, dir);
    CHECK(out.exit_code == 0);
    const auto r = read_json(dir / "result.json");
    CHECK(r["steps"] == 200);
    CHECK(r["value_half_steps"].is_number());
    CHECK(r["bs_oracle"].is_null());
    CHECK(r["method"] == "full_collateral");
    CHECK(r["config"] == c.resolved);
    CHECK(oracle::relative(r["value"].get<double>(), oracle::bs_call(100, 100, 0.03, 0.0, 0.2, 1.0)) <= 5e-3);

    std::ifstream csv(dir / "hedge_surface.csv");
    std::string header, first;
    std::getline(csv, header);
    std::getline(csv, first);
    CHECK(header == "n,j,t,S,Z,xi,iterations");
    CHECK(first.rfind("0,0,0,100,", 0) == 0);
}

TEST_CASE("verify on the asymmetric-rate config passes") {
    const RunConfig c = load_config((kConfigs / "ci_asym.json").string(), {std::size_t{200}, {}, {}});
    const fs::path dir = scratch("verify");
    const RunOutcome out = run(c, Command::Verify, dir);
    CHECK(out.exit_code == 0);
    CHECK(read_json(dir / "arbitrage_report.json")["verdict"] == "pass");
    CHECK(read_json(dir / "martingale_checks.json")["pass"] == true);
}

TEST_CASE("compare on the spread config emits the K3/K3T gap and ratio") {
    const RunConfig c = load_config((kConfigs / "ci_spread.json").string(), {std::size_t{200}, {}, {}});
    const fs::path dir = scratch("compare");
    const RunOutcome out = run(c, Command::Compare, dir);
    CHECK(out.exit_code == 0);
    const auto r = read_json(dir / "compare.json");
    CHECK(r["k3_k3t"]["relative_gap"].get<double>() < 1e-4);
    const double ratio = r["k3_k3t"]["convergence"]["ratio"].get<double>();
    CHECK(ratio >= 1.6);
    CHECK(ratio <= 2.4);
}

TEST_CASE("simulate output is identical across thread counts") {
    RunConfig c = load_config((kConfigs / "ci_spread.json").string(), {std::size_t{50}, std::size_t{1500}, {}});
    c.output.ledger_paths = 3;
    c.numerics.threads = 1;
    const fs::path a = scratch("sim1"), b = scratch("sim4");
    run(c, Command::Simulate, a);
    c.numerics.threads = 4;
    run(c, Command::Simulate, b);
    const auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream s;
        s << in.rdbuf();
        return s.str();
    };
    CHECK(slurp(a / "ledgers.csv") == slurp(b / "ledgers.csv"));
    auto sa = read_json(a / "summary.json"), sb = read_json(b / "summary.json");
    sa.erase("config");
    sb.erase("config");
    CHECK(sa == sb);
    CHECK(sa["max_self_financing_residual"].get<double>() <= 1e-12);
}

TEST_CASE("command-line exit codes") {
    const std::string bin = FUNDHEDGE_CLI_PATH;
    const fs::path dir = scratch("cli");
    fs::create_directories(dir);
    const fs::path broken = dir / "broken.json";
    std::ofstream(broken) << "{\"model\": }";
    CHECK(exit_status(bin + " price --config " + broken.string() + " --out " + dir.string()) == kExitConfig);
    CHECK(exit_status(bin + " price") == kExitConfig);
    CHECK(exit_status(bin + " price --config " + (kConfigs / "ci_flat.json").string() + " --steps 40 --out " +
                      (dir / "ok").string()) == 0);

    // Weight outside (0,1): a numeric failure.
    const fs::path coarse = dir / "coarse.json";
    std::ofstream(coarse) << R"j({"model": {"spot": 100, "volatility": 0.01, "maturity": 1},
        "rates": {"cash": 0.5}, "contract": {"payoff": "-call(100)"}, "numerics": {"steps": 1}})j";
    CHECK(exit_status(bin + " price --config " + coarse.string() + " --out " + dir.string()) == kExitNumeric);
    fs::remove_all(dir.parent_path());
}
