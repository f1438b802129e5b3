#ifndef FRACBOUND_PIPELINE_HPP
#define FRACBOUND_PIPELINE_HPP

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fracbound/bounds.hpp"
#include "fracbound/config.hpp"
#include "fracbound/error.hpp"
#include "fracbound/expr.hpp"
#include "fracbound/hypotheses.hpp"
#include "fracbound/mesh.hpp"
#include "fracbound/omega.hpp"
#include "fracbound/presets.hpp"
#include "fracbound/solver.hpp"
#include "fracbound/special.hpp"

namespace fracbound::pipeline {

enum ExitCode : int {
    exit_ok = 0,
    exit_check_failed = 1,
    exit_config_error = 2,
    exit_horizon_collapse = 3,
    exit_numeric_failure = 4,
    exit_non_convergence = 5,
    exit_inconclusive = 6,
    exit_dominance_violation = 7,
};

namespace detail {

inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> columns; // same length each
    std::vector<std::string> trailer;         // '#'-prefixed comment lines
};

inline void write_table(const Table& tab, const std::string& path, const std::string& format) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open output file '" + path + "'");
    if (format == "json") {
        nlohmann::json j;
        for (std::size_t c = 0; c < tab.header.size(); ++c) j[tab.header[c]] = tab.columns[c];
        for (const auto& note : tab.trailer) j["notes"].push_back(note);
        out << j.dump(2) << "\n";
        return;
    }
    if (format != "csv") throw ConfigError("unknown output format '" + format + "'");
    for (std::size_t c = 0; c < tab.header.size(); ++c)
        out << (c ? "," : "") << tab.header[c];
    out << "\n";
    const std::size_t rows = tab.columns.empty() ? 0 : tab.columns[0].size();
    for (std::size_t rix = 0; rix < rows; ++rix) {
        for (std::size_t c = 0; c < tab.columns.size(); ++c)
            out << (c ? "," : "") << fmt17(tab.columns[c][rix]);
        out << "\n";
    }
    for (const auto& note : tab.trailer) out << "# " << note << "\n";
}

inline std::string normalize_theorem(std::string s) {
    if (s.rfind("thm", 0) == 0 || s.rfind("cor", 0) == 0) {
        const auto dash = s.find('-');
        if (dash != std::string::npos) s = s.substr(dash + 1);
    }
    return s;
}

} // namespace detail

// ---------------------------------------------------------------------------
// bound mode
// ---------------------------------------------------------------------------

struct BoundRun {
    bounds::BoundCurve curve;
    std::vector<double> t, bound, u_extremal; // u_extremal empty unless verify
    bool verified_column = false;
};

namespace detail {

inline bounds::InequalityProblem problem_from(const Config& cfg, const std::string& theorem) {
    bounds::InequalityProblem prob;
    prob.a = cfg.expression("a", "t");
    prob.b = cfg.expression("b", "t");
    prob.l = cfg.expression("l", "t");
    prob.p = cfg.number("p");
    prob.T = cfg.number("T");
    const bool needs_beta = theorem != "2.1" && theorem != "2.2";
    if (needs_beta) {
        prob.beta = cfg.number("beta");
        if (!(prob.beta > 0.0 && prob.beta < 1.0))
            throw ConfigError("beta must be in (0,1)");
        if (!(prob.p > 1.0 / prob.beta))
            throw ConfigError("violated condition: p > 1/beta (p = " +
                              std::to_string(prob.p) + ", 1/beta = " +
                              std::to_string(1.0 / prob.beta) + ")");
    }
    if (theorem == "2.2" || theorem == "2.6") {
        prob.gamma = cfg.number("gamma");
    } else {
        prob.omega = cfg.expression("omega", "u");
    }
    if (theorem == "2.4") {
        prob.alpha = cfg.number("alpha");
        prob.delta = cfg.number("delta");
    }
    return prob;
}

inline solver::ExtremalProblem extremal_for(const std::string& theorem,
                                            const bounds::InequalityProblem& prob) {
    solver::ExtremalProblem e;
    e.a = prob.a;
    e.b = prob.b;
    e.l = prob.l;
    e.T = prob.T;
    e.p = prob.p;
    using namespace expr;
    if (theorem == "2.1") {
        e.omega = prob.omega;
    } else if (theorem == "2.2") {
        e.omega = power(variable('u'), prob.p * prob.gamma);
    } else if (theorem == "2.3") {
        e.beta = prob.beta;
        e.omega = prob.omega;
    } else if (theorem == "2.4") {
        e.beta = prob.beta;
        e.sigma = prob.alpha - prob.delta;
        e.weight_exponent = prob.alpha;
        e.omega = prob.omega;
    } else if (theorem == "2.5") {
        e.beta = prob.beta;
        e.sigma = 1.0 - prob.beta;
        e.weight_exponent = 1.0 - prob.beta;
        e.omega = prob.omega;
    } else if (theorem == "2.6") {
        e.beta = prob.beta;
        e.sigma = 1.0 - prob.beta;
        e.weight_exponent = 1.0 - prob.beta;
        e.omega = power(variable('u'), prob.gamma);
        // the raw-variable integrand l u^gamma picks up s^{(beta-1)gamma}
        // when rewritten in the weighted variable
        e.l = mul(power(variable('t'), (prob.beta - 1.0) * prob.gamma), prob.l);
    } else {
        throw ConfigError("unknown theorem '" + theorem + "'");
    }
    return e;
}

} // namespace detail

inline BoundRun run_bound(const Config& cfg, std::ostream& os) {
    const std::string theorem = detail::normalize_theorem(cfg.require("theorem"));
    auto prob = detail::problem_from(cfg, theorem);
    BoundRun run;
    run.curve = bounds::bound_for(theorem, prob);

    const std::size_t n = static_cast<std::size_t>(cfg.integer_or("N", 1024));
    const double default_r =
        std::isnan(prob.beta) ? 2.0 : GradedMesh::default_grading(prob.beta);
    GradedMesh mesh(prob.T, n, cfg.number_or("r", default_r));
    for (std::size_t i = 1; i <= n; ++i) {
        const double t = mesh.node(i);
        if (t > run.curve.T1 * (1.0 + 1e-12)) break;
        run.t.push_back(t);
        run.bound.push_back(run.curve.evaluate(t));
    }

    if (cfg.flag_or("verify", false)) {
        run.verified_column = true;
        auto eprob = detail::extremal_for(theorem, prob);
        auto emesh = solver::extremal_mesh(eprob, n);
        auto u = solver::extremal_solve(eprob, emesh, cfg.number_or("tol", 1e-8),
                                        static_cast<int>(cfg.integer_or("max_iter", 400)));
        // resample the extremal solution at the output nodes (linear in the
        // weighted variable)
        for (std::size_t rix = 0; rix < run.t.size(); ++rix) {
            const double t = run.t[rix];
            run.u_extremal.push_back(u.interpolate_weighted(t) *
                                     std::pow(t, -eprob.weight_exponent));
        }
    }

    os << "theorem: " << run.curve.theorem_tag << "\n";
    os << "T1: " << detail::fmt17(run.curve.T1) << "\n";
    for (const auto& note : run.curve.notes) os << "note: " << note << "\n";

    if (auto out = cfg.get("out")) {
        detail::Table tab;
        tab.header = {"t", "bound"};
        tab.columns = {run.t, run.bound};
        if (run.verified_column) {
            tab.header.push_back("u_extremal");
            tab.columns.push_back(run.u_extremal);
        }
        tab.trailer.push_back("theorem = " + run.curve.theorem_tag);
        tab.trailer.push_back("T1 = " + detail::fmt17(run.curve.T1));
        detail::write_table(tab, *out, cfg.get("format").value_or("csv"));
    }
    return run;
}

// ---------------------------------------------------------------------------
// solve mode
// ---------------------------------------------------------------------------

struct SolveRun {
    solver::SolutionCurve solution;
    std::vector<double> t, v, x;
};

namespace detail {

inline solver::FivpSpec spec_from(const Config& cfg) {
    solver::FivpSpec spec;
    spec.f = cfg.expression("f", "tx");
    spec.beta = cfg.number("beta");
    if (!(spec.beta > 0.0 && spec.beta < 1.0)) throw ConfigError("beta must be in (0,1)");
    spec.x0 = cfg.number("x0");
    spec.T = cfg.number("T");
    spec.p = cfg.number_or("p", 2.0);
    if (cfg.has("omega")) {
        solver::Envelope env;
        env.l = cfg.expression("l", "t");
        env.omega = cfg.expression("omega", "u");
        spec.envelope = env;
    } else if (cfg.has("k") || cfg.has("gamma")) {
        solver::Envelope env;
        env.l = cfg.expression("l", "t");
        env.k = cfg.has("k") ? cfg.expression("k", "t") : expr::constant(0.0);
        env.gamma = cfg.number_or("gamma", 1.0);
        spec.envelope = env;
    }
    if (spec.envelope && !(spec.p > 1.0 / spec.beta))
        throw ConfigError("violated condition: p > 1/beta");
    return spec;
}

} // namespace detail

inline SolveRun run_solve(const Config& cfg, std::ostream& os) {
    auto spec = detail::spec_from(cfg);
    const std::size_t n = static_cast<std::size_t>(cfg.integer_or("N", 2048));
    auto mesh = solver::solver_mesh(spec, n, cfg.number_opt("r"));
    const double tol = cfg.number_or("tol", 1e-8);
    const int max_iter = static_cast<int>(cfg.integer_or("max_iter", 200));

    SolveRun run{solver::solve_volterra(spec, mesh, tol, max_iter), {}, {}, {}};
    const auto& v = run.solution.weighted.values;
    for (std::size_t i = 1; i <= n; ++i) {
        const double t = mesh.node(i);
        run.t.push_back(t);
        run.v.push_back(v[i]);
        run.x.push_back(v[i] * std::pow(t, spec.beta - 1.0));
    }

    os << "mesh: N = " << n << ", r = " << mesh.grading() << "\n";
    os << "iterations: " << run.solution.iterations << "\n";
    os << "residual: " << detail::fmt17(run.solution.residual) << "\n";
    os << "converged: " << (run.solution.converged ? "true" : "false") << "\n";
    if (!run.solution.diagnostic.empty()) os << "diagnostic: " << run.solution.diagnostic << "\n";

    if (auto out = cfg.get("out")) {
        detail::Table tab;
        tab.header = {"t", "v", "x"};
        tab.columns = {run.t, run.v, run.x};
        tab.trailer.push_back(std::string("converged = ") +
                              (run.solution.converged ? "true" : "false"));
        tab.trailer.push_back("iterations = " + std::to_string(run.solution.iterations));
        tab.trailer.push_back("residual = " + detail::fmt17(run.solution.residual));
        detail::write_table(tab, *out, cfg.get("format").value_or("csv"));
    }
    return run;
}

// ---------------------------------------------------------------------------
// check mode
// ---------------------------------------------------------------------------

struct CheckRun {
    hypotheses::HypothesisReport report;
};

namespace detail {

inline std::string infer_route(const Config& cfg) {
    if (auto r = cfg.get("route")) return *r;
    if (cfg.has("omega")) return "3.7";
    if (cfg.has("k") || cfg.has("gamma")) return "3.8";
    return "3.10";
}

inline nlohmann::json report_json(const hypotheses::HypothesisReport& rep) {
    nlohmann::json j;
    j["theorem"] = rep.theorem_tag;
    j["overall"] = hypotheses::to_string(rep.overall());
    j["checks"] = nlohmann::json::array();
    for (const auto& c : rep.checks)
        j["checks"].push_back({{"name", c.name},
                               {"verdict", hypotheses::to_string(c.verdict)},
                               {"evidence", c.evidence}});
    if (rep.admissible_p)
        j["admissible_p"] = {rep.admissible_p->first, rep.admissible_p->second};
    return j;
}

} // namespace detail

inline CheckRun run_check(const Config& cfg, std::ostream& os) {
    const std::string route = detail::infer_route(cfg);
    const double beta = cfg.number("beta");
    if (!(beta > 0.0 && beta < 1.0)) throw ConfigError("beta must be in (0,1)");
    const auto f = cfg.expression("f", "tx");
    const auto l = cfg.expression("l", "t");
    hypotheses::SampleBox box;
    const auto l_exp = cfg.number_opt("l_exponent");

    CheckRun run;
    if (route == "3.7") {
        run.report = hypotheses::thm37_check(f, l, cfg.expression("omega", "u"), beta, box,
                                             l_exp);
    } else if (route == "3.8") {
        const auto k = cfg.has("k") ? cfg.expression("k", "t") : expr::constant(0.0);
        run.report = hypotheses::cor38_check(f, l, k, cfg.number("gamma"), beta, box, l_exp,
                                             cfg.number_opt("k_exponent"))
                         .report;
    } else if (route == "3.10") {
        run.report = hypotheses::thm310_check(f, l, beta, box, l_exp,
                                              cfg.number_opt("f0_exponent"));
    } else {
        throw ConfigError("unknown route '" + route + "' (expected 3.7, 3.8 or 3.10)");
    }

    os << hypotheses::report_to_text(run.report);
    if (auto out = cfg.get("out")) {
        std::ofstream file(*out);
        if (!file) throw ConfigError("cannot open output file '" + *out + "'");
        if (cfg.get("format").value_or("csv") == "json")
            file << detail::report_json(run.report).dump(2) << "\n";
        else
            file << hypotheses::report_to_text(run.report);
    }
    return run;
}

// ---------------------------------------------------------------------------
// verify mode: solve, bound from the declared envelope, weighted dominance
// ---------------------------------------------------------------------------

struct VerifyRun {
    std::optional<solver::SolutionCurve> solution;
    bounds::BoundCurve bound;
    DomainSup domain_sup{DomainSup::Kind::infinite, 0.0};
    double worst_margin = 0.0; // max of v_i / weighted bound
    std::size_t worst_node = 0;
    bool envelope_ok = false;
    bool dominance_ok = false;
};

inline VerifyRun run_verify(const Config& cfg, std::ostream& os) {
    auto spec = detail::spec_from(cfg);
    if (!spec.envelope)
        throw ConfigError("verify mode needs a declared envelope: omega, or k with gamma");

    hypotheses::SampleBox box;
    box.t_hi = spec.T;
    VerifyRun run;

    // 1. the declared envelope must actually dominate f
    expr::Expr l_eff, omega_eff;
    const auto& env = *spec.envelope;
    if (env.omega) {
        const auto chk = hypotheses::envelope_check(spec.f, env.l, *env.omega, spec.beta, box);
        run.envelope_ok = chk.verdict == hypotheses::Verdict::pass;
        os << "envelope: " << hypotheses::to_string(chk.verdict) << " (" << chk.evidence
           << ")\n";
        l_eff = env.l;
        omega_eff = *env.omega;
    } else {
        const auto chk =
            hypotheses::power_envelope_check(spec.f, env.l, *env.k, env.gamma, box);
        run.envelope_ok = chk.verdict == hypotheses::Verdict::pass;
        os << "envelope: " << hypotheses::to_string(chk.verdict) << " (" << chk.evidence
           << ")\n";
        using namespace expr;
        l_eff = add(mul(power(variable('t'), env.gamma * (spec.beta - 1.0)), env.l), *env.k);
        omega_eff = add(power(variable('u'), env.gamma), constant(1.0));
    }
    if (!run.envelope_ok) return run;

    // 2. the Omega engine's view of the envelope nonlinearity
    OmegaTransform tr(omega_eff, spec.p, PowerMode::pth);
    run.domain_sup = tr.domain_sup();
    os << "domain_sup: "
       << (run.domain_sup.kind == DomainSup::Kind::infinite
               ? std::string("+inf")
               : run.domain_sup.kind == DomainSup::Kind::finite
                     ? detail::fmt17(run.domain_sup.value)
                     : std::string("inconclusive"))
       << "\n";

    // 3. solve
    const std::size_t n = static_cast<std::size_t>(cfg.integer_or("N", 2048));
    auto mesh = solver::solver_mesh(spec, n, cfg.number_opt("r"));
    const double tol = cfg.number_or("tol", 1e-8);
    run.solution = solver::solve_volterra(spec, mesh, tol,
                                          static_cast<int>(cfg.integer_or("max_iter", 200)));
    os << "solve: iterations = " << run.solution->iterations
       << ", residual = " << detail::fmt17(run.solution->residual)
       << ", converged = " << (run.solution->converged ? "true" : "false") << "\n";

    // 4. a priori bound from the envelope (the constructive counterpart of
    // the existence argument), with b = 1/Gamma(beta)
    bounds::InequalityProblem prob;
    prob.a = expr::constant(std::fabs(spec.x0));
    prob.b = expr::constant(1.0 / special::gamma(spec.beta));
    prob.l = l_eff;
    prob.omega = omega_eff;
    prob.p = spec.p;
    prob.beta = spec.beta;
    prob.T = spec.T;
    run.bound = bounds::thm25_bound(prob);
    os << "bound: " << run.bound.theorem_tag << ", T1 = " << detail::fmt17(run.bound.T1)
       << "\n";

    // 5. weighted dominance v_i <= t^{1-beta} B(t_i) within factor 1.01
    run.dominance_ok = true;
    for (std::size_t i = 1; i <= n; ++i) {
        const double t = mesh.node(i);
        if (t > run.bound.T1 * (1.0 + 1e-12)) break;
        const double w = std::pow(t, 1.0 - spec.beta) * run.bound.evaluate(t);
        const double margin = std::fabs(run.solution->weighted.values[i]) / w;
        if (margin > run.worst_margin) {
            run.worst_margin = margin;
            run.worst_node = i;
        }
    }
    run.dominance_ok = run.worst_margin <= 1.0 + 1e-2;
    os << "dominance: worst margin " << detail::fmt17(run.worst_margin) << " at node "
       << run.worst_node << " -> " << (run.dominance_ok ? "ok" : "violated") << "\n";
    return run;
}

// ---------------------------------------------------------------------------
// example mode and dispatch
// ---------------------------------------------------------------------------

inline int run_example(const Config& cfg, const std::string& preset_name, std::ostream& os) {
    if (preset_name.empty()) {
        os << "available presets:\n";
        for (const auto& name : presets::names()) os << "  " << name << "\n";
        return exit_ok;
    }
    const std::string text = presets::text(preset_name);
    if (auto out = cfg.get("out")) {
        std::ofstream file(*out);
        if (!file) throw ConfigError("cannot open output file '" + *out + "'");
        file << text;
    } else {
        os << text;
    }
    return exit_ok;
}

inline int dispatch(const std::string& mode, const Config& cfg, const std::string& preset_name,
                    std::ostream& os, std::ostream& err) {
    try {
        if (mode == "bound") {
            run_bound(cfg, os);
            return exit_ok;
        }
        if (mode == "solve") {
            const auto run = run_solve(cfg, os);
            return run.solution.converged ? exit_ok : exit_non_convergence;
        }
        if (mode == "check") {
            const auto run = run_check(cfg, os);
            switch (run.report.overall()) {
            case hypotheses::Verdict::pass: return exit_ok;
            case hypotheses::Verdict::fail: return exit_check_failed;
            default: return exit_inconclusive;
            }
        }
        if (mode == "verify") {
            const auto run = run_verify(cfg, os);
            if (!run.envelope_ok) return exit_check_failed;
            return run.dominance_ok ? exit_ok : exit_dominance_violation;
        }
        if (mode == "example") return run_example(cfg, preset_name, os);
        throw ConfigError("unknown mode '" + mode + "'");
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return exit_config_error;
    } catch (const ParseError& e) {
        err << "config error: " << e.what() << "\n";
        return exit_config_error;
    } catch (const HorizonCollapse& e) {
        err << "horizon collapse: " << e.what() << "\n";
        return exit_horizon_collapse;
    } catch (const Error& e) {
        err << "numeric failure: " << e.what() << "\n";
        return exit_numeric_failure;
    }
}

/// Assemble the effective configuration: preset, then config file, then
/// command-line overrides; mode comes from the subcommand.
inline Config assemble_config(const std::string& mode, const std::string& preset_name,
                              const std::string& config_path,
                              const std::vector<std::pair<std::string, std::string>>& overrides) {
    Config cfg;
    if (!preset_name.empty()) {
        cfg = presets::config(preset_name);
        cfg.set("mode", mode); // presets are usable from any mode
    }
    if (!config_path.empty()) cfg.merge_from(Config::load(config_path));
    for (const auto& [k, v] : overrides) cfg.set(k, v);
    if (auto m = cfg.get("mode"); m && *m != mode && mode != "example")
        throw ConfigError("configuration is for mode '" + *m + "' but '" + mode +
                          "' was requested");
    return cfg;
}

} // namespace fracbound::pipeline

#endif
