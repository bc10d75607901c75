#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ncalc/cli.hpp"

namespace py = pybind11;

// The python surface mirrors the command line: every operation is a report.
// Structured access is one json.loads away, and the exit-code contract
// (0 pass, 1 fail, 2 usage, 3 untestable) carries over unchanged.
PYBIND11_MODULE(_ncalc, m) {
    m.doc() = "exact neighbor-graph and formal-jet calculus";
    m.attr("__version__") = "0.1.0";
    m.def(
        "run",
        [](const std::vector<std::string>& args) {
            ncalc::CliResult r = ncalc::run_cli(args);
            py::dict d;
            d["exit_code"] = r.exit_code;
            d["out"] = r.out;
            d["err"] = r.err;
            return d;
        },
        py::arg("args"),
        "Run a command (argv without the program name) and return "
        "{exit_code, out, err}.");
}
