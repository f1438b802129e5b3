#ifndef FRACBOUND_CLI_HPP
#define FRACBOUND_CLI_HPP

#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "fracbound/pipeline.hpp"

namespace fracbound::cli {

/// `fracbound <mode> [--config path] [--preset name] [--out path]
///            [--format csv|json] [--p real] [--N int] [--tol real]`
inline int run(int argc, const char* const* argv, std::ostream& os = std::cout,
               std::ostream& err = std::cerr) {
    CLI::App app{"a priori bounds from weakly singular integral inequalities and "
                 "Riemann-Liouville fractional initial value problems"};
    app.require_subcommand(1);

    struct ModeArgs {
        std::string config_path, preset, out, format, p, tol;
        long n = -1;
    };
    const std::vector<std::string> modes = {"bound", "solve", "check", "verify", "example"};
    const std::vector<std::string> descriptions = {
        "compute an a priori bound curve for an integral inequality",
        "solve a Riemann-Liouville fractional IVP via its Volterra form",
        "machine-check existence/uniqueness hypotheses",
        "solve, bound, and assert weighted dominance",
        "list built-in presets or print one",
    };
    std::vector<ModeArgs> args(modes.size());
    for (std::size_t i = 0; i < modes.size(); ++i) {
        auto* sub = app.add_subcommand(modes[i], descriptions[i]);
        sub->add_option("--config", args[i].config_path, "configuration file (INI-like or JSON)");
        sub->add_option("--preset", args[i].preset, "built-in preset name");
        sub->add_option("--out", args[i].out, "output file path");
        sub->add_option("--format", args[i].format, "output format: csv or json");
        sub->add_option("--p", args[i].p, "override the Hoelder exponent p");
        sub->add_option("--N", args[i].n, "override the mesh node count");
        sub->add_option("--tol", args[i].tol, "override the iteration tolerance");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) { // --help
            app.exit(e, os, err);
            return pipeline::exit_ok;
        }
        err << "config error: " << e.what() << "\n";
        return pipeline::exit_config_error;
    }

    for (std::size_t i = 0; i < modes.size(); ++i) {
        if (!app.get_subcommand(modes[i])->parsed()) continue;
        const auto& a = args[i];
        try {
            std::vector<std::pair<std::string, std::string>> overrides;
            if (!a.out.empty()) overrides.emplace_back("out", a.out);
            if (!a.format.empty()) overrides.emplace_back("format", a.format);
            if (!a.p.empty()) overrides.emplace_back("p", a.p);
            if (a.n >= 0) overrides.emplace_back("N", std::to_string(a.n));
            if (!a.tol.empty()) overrides.emplace_back("tol", a.tol);
            Config cfg = pipeline::assemble_config(modes[i], a.preset, a.config_path, overrides);
            return pipeline::dispatch(modes[i], cfg, a.preset, os, err);
        } catch (const Error& e) {
            err << "config error: " << e.what() << "\n";
            return pipeline::exit_config_error;
        }
    }
    err << "config error: no mode selected\n";
    return pipeline::exit_config_error;
}

} // namespace fracbound::cli

#endif
