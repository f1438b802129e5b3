#ifndef FRACBOUND_PRESETS_HPP
#define FRACBOUND_PRESETS_HPP

#include <map>
#include <string>
#include <vector>

#include "fracbound/config.hpp"
#include "fracbound/error.hpp"

namespace fracbound::presets {

/// Built-in problem presets; the regression suite's backbone.
inline const std::map<std::string, std::string>& registry() {
    static const std::map<std::string, std::string> presets = {
        {"example-2.8",
         "mode = bound\n"
         "theorem = 2.4\n"
         "a = 1\n"
         "b = 1\n"
         "alpha = 1/2\n"
         "delta = 1/3\n"
         "beta = 2/3\n"
         "p = 2\n"
         "l = t^(-1/3)\n"
         "omega = u^(1/2)\n"
         "T = 2\n"
         "N = 2048\n"},
        {"example-2.9",
         "mode = bound\n"
         "theorem = 2.6\n"
         "a = 1\n"
         "b = 1\n"
         "beta = 2/3\n"
         "gamma = 1/2\n"
         "p = 2\n"
         "l = t^(-1/2)\n"
         "T = 2\n"
         "N = 2048\n"},
        {"example-3.12",
         "mode = check\n"
         "route = 3.7\n"
         "f = t^(-3/4)*x^(1/2)+t^(-1/2)*x\n"
         "x0 = 1\n"
         "beta = 2/3\n"
         "l = t^(-11/12)+t^(-5/6)\n"
         "omega = u^(1/2)+u\n"
         "p = 1.6\n"
         "T = 1\n"
         "N = 2048\n"
         "tol = 1e-7\n"},
        {"example-3.13",
         "mode = check\n"
         "route = 3.8\n"
         "f = t^(-2/3)*ln(1+x^(1/2))\n"
         "x0 = 1\n"
         "beta = 2/3\n"
         "l = t^(-2/3)\n"
         "k = 0\n"
         "gamma = 1/2\n"
         "p = 1.7\n"
         "T = 1\n"
         "N = 2048\n"
         "tol = 1e-7\n"},
        {"example-3.14",
         "mode = check\n"
         "route = 3.10\n"
         "f = t^(-1/2)*x^2/(1+x)+t^(-3/4)\n"
         "x0 = 1\n"
         "beta = 2/3\n"
         "l = t^(-1/2)\n"
         "k = t^(-3/4)\n"
         "gamma = 1\n"
         "p = 1.8\n"
         "T = 1\n"
         "N = 2048\n"
         "tol = 1e-7\n"},
        {"linear-ml",
         "mode = solve\n"
         "f = x\n"
         "x0 = 1\n"
         "beta = 2/3\n"
         "T = 1\n"
         "N = 4096\n"
         "tol = 1e-7\n"},
    };
    return presets;
}

inline std::vector<std::string> names() {
    std::vector<std::string> out;
    for (const auto& [name, text] : registry()) out.push_back(name);
    return out;
}

inline std::string text(const std::string& name) {
    auto it = registry().find(name);
    if (it == registry().end()) throw ConfigError("unknown preset '" + name + "'");
    return it->second;
}

inline Config config(const std::string& name) { return Config::from_text(text(name)); }

} // namespace fracbound::presets

#endif
