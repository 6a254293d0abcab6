#include "fundhedge/errors.hpp"
#include "fundhedge/run.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <utility>

namespace {

struct Arguments {
    std::string config;
    std::string out;
    std::optional<std::size_t> steps;
    std::optional<std::size_t> paths;
    std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, Arguments& args) {
    cmd->add_option("--config", args.config, "JSON run configuration")->required();
    cmd->add_option("--out", args.out, "output directory (default: $FUNDHEDGE_OUT, then ./out)");
    cmd->add_option("--steps", args.steps, "lattice steps N")->check(CLI::PositiveNumber);
    cmd->add_option("--paths", args.paths, "simulated paths M")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", args.seed, "random seed");
}

std::string output_directory(const Arguments& args, const fundhedge::RunConfig& config) {
    if (!args.out.empty()) return args.out;
    if (!config.output.directory.empty()) return config.output.directory;
    if (const char* env = std::getenv("FUNDHEDGE_OUT"); env && *env) return env;
    return "out";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Pricing and hedging under funding, netting and collateral conventions"};
    app.require_subcommand(1);
    Arguments args;
    const std::pair<const char*, const char*> commands[] = {
        {"price", "price the contract and write the hedge surface"},
        {"simulate", "hedge along simulated paths and write wealth ledgers"},
        {"verify", "run the martingale, replication and arbitrage checks"},
        {"compare", "compare equivalent pricing routes and convention collapses"},
    };
    for (const auto& [name, help] : commands) add_common(app.add_subcommand(name, help), args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return fundhedge::kExitConfig;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    try {
        const fundhedge::RunConfig config = fundhedge::load_config(args.config, {args.steps, args.paths, args.seed});
        const fundhedge::RunOutcome outcome =
            fundhedge::run(config, fundhedge::parse_command(command), output_directory(args, config));
        std::cout << outcome.summary << "\n";
        for (const auto& f : outcome.files) std::cout << "  wrote " << f.string() << "\n";
        return outcome.exit_code;
    } catch (const fundhedge::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return fundhedge::kExitConfig;
    } catch (const fundhedge::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return fundhedge::kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return fundhedge::kExitNumeric;
    }
}
