#include "fundhedge/arbitrage.hpp"
#include "fundhedge/errors.hpp"
#include "fundhedge/run.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>
#include <string>

namespace py = pybind11;
using namespace fundhedge;

namespace {

py::object to_python(const nlohmann::json& j) {
    return py::module_::import("json").attr("loads")(j.dump());
}

ConfigOverrides overrides(std::optional<std::size_t> steps, std::optional<std::size_t> paths,
                          std::optional<std::uint64_t> seed) {
    return {steps, paths, seed};
}

// A dict is taken as the config itself, anything else as a path.
RunConfig resolve(const py::object& config, const ConfigOverrides& o) {
    if (py::isinstance<py::dict>(config)) {
        const std::string text = py::str(py::module_::import("json").attr("dumps")(config));
        return parse_config(text, o);
    }
    return load_config(py::str(py::module_::import("os").attr("fspath")(config)), o);
}

py::dict price(const py::object& config, std::optional<std::size_t> steps) {
    const RunConfig c = resolve(config, overrides(steps, {}, {}));
    PricedRun p;
    {
        py::gil_scoped_release release;
        const Lattice lattice(c.equity, c.maturity, c.numerics.steps);
        p = price_config(c, lattice, pricing_options(c));
    }
    py::dict out;
    out["method"] = c.method;
    out["label"] = p.solution.label;
    out["steps"] = c.numerics.steps;
    out["value"] = p.solution.price;
    out["root_hedge"] = p.solution.root_hedge;
    out["value_half_steps"] = p.solution.price_half_steps ? py::cast(*p.solution.price_half_steps) : py::none();
    out["value_k3t"] = p.value_k3t ? py::cast(*p.value_k3t) : py::none();
    return out;
}

py::dict run_command(const py::object& config, const std::string& command, const std::filesystem::path& out_dir,
                     std::optional<std::size_t> steps, std::optional<std::size_t> paths,
                     std::optional<std::uint64_t> seed) {
    const RunConfig c = resolve(config, overrides(steps, paths, seed));
    const Command cmd = parse_command(command);
    RunOutcome r;
    {
        py::gil_scoped_release release;
        r = run(c, cmd, out_dir);
    }
    py::list files;
    for (const auto& f : r.files) files.append(f.string());
    py::dict out;
    out["exit_code"] = r.exit_code;
    out["summary"] = r.summary;
    out["files"] = files;
    out["report"] = to_python(r.report);
    return out;
}

py::dict gate(const py::object& config, std::optional<std::size_t> steps, std::optional<std::size_t> strategies) {
    const RunConfig c = resolve(config, {});
    ArbitrageOptions opts;
    opts.strategies = strategies.value_or(c.numerics.strategies);
    opts.seed = c.numerics.seed;
    opts.threads = c.numerics.threads;
    ArbitrageReport r;
    {
        py::gil_scoped_release release;
        const Lattice lattice(c.equity, c.maturity, steps.value_or(c.numerics.gate_steps));
        r = arbitrage_gate(c.convention, c.accounts, c.contract, lattice, opts);
    }
    py::dict out;
    out["verdict"] = r.verdict;
    out["certificate"] = r.certificate.holds;
    out["convention"] = r.convention;
    out["lattice_steps"] = r.lattice_steps;
    out["paths"] = r.paths;
    out["strategies"] = r.audits.size();
    out["max_drift"] = r.max_drift;
    out["dominating"] = r.dominating;
    out["cash_only_gap"] = r.cash_only_gap;
    out["violation_exhibited"] = r.violation_exhibited;
    out["notes"] = r.notes;
    return out;
}

}  // namespace

PYBIND11_MODULE(_fundhedge, m) {
    m.doc() = "Lattice pricing and hedging with funding, repo and collateral accounts.";

    static py::exception<Error> error(m, "Error", PyExc_RuntimeError);
    static py::exception<ConfigError> config_error(m, "ConfigError", error.ptr());
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const ConfigError& e) {
            PyErr_SetString(config_error.ptr(), e.what());
        } catch (const Error& e) {
            PyErr_SetString(error.ptr(), e.what());
        }
    });

    m.def(
        "load_config",
        [](const py::object& path, std::optional<std::size_t> steps, std::optional<std::size_t> paths,
           std::optional<std::uint64_t> seed) { return to_python(resolve(path, overrides(steps, paths, seed)).resolved); },
        py::arg("path"), py::kw_only(), py::arg("steps") = py::none(), py::arg("paths") = py::none(),
        py::arg("seed") = py::none(), "Validate a config file or dict and return it with every default filled in.");
    m.def(
        "parse_config",
        [](const std::string& text) { return to_python(parse_config(text).resolved); }, py::arg("text"),
        "Validate config JSON text and return the resolved config.");
    m.def("price", &price, py::arg("config"), py::kw_only(), py::arg("steps") = py::none(),
          "Price the configured contract. Returns the replication value Z at t=0 and its hedge.");
    m.def("run", &run_command, py::arg("config"), py::arg("command"), py::arg("out_dir"), py::kw_only(),
          py::arg("steps") = py::none(), py::arg("paths") = py::none(), py::arg("seed") = py::none(),
          "Run price, simulate, verify or compare and write the artifacts to out_dir.");
    m.def("arbitrage_gate", &gate, py::arg("config"), py::kw_only(), py::arg("steps") = py::none(),
          py::arg("strategies") = py::none(), "Audit sampled strategies on every path of a small lattice.");
}
