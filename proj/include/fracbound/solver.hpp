#ifndef FRACBOUND_SOLVER_HPP
#define FRACBOUND_SOLVER_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "fracbound/error.hpp"
#include "fracbound/expr.hpp"
#include "fracbound/mesh.hpp"
#include "fracbound/product_integration.hpp"
#include "fracbound/quadrature.hpp"
#include "fracbound/special.hpp"

namespace fracbound::solver {

/// Growth envelope of the right side: either |f(t,x)| <= l(t) omega(t^{1-beta}|x|)
/// or |f(t,x)| <= l(t)|x|^gamma + k(t).
struct Envelope {
    expr::Expr l;
    std::optional<expr::Expr> omega; // omega form
    std::optional<expr::Expr> k;     // power form, together with gamma
    double gamma = 1.0;
};

/// Riemann-Liouville initial value problem D^beta x = f(t, x),
/// lim_{t->0+} t^{1-beta} x(t) = x0, in its Volterra form.
struct FivpSpec {
    double beta = 0.5;
    double x0 = 0.0;
    expr::Expr f; // f(t, x)
    std::optional<Envelope> envelope;
    double T = 1.0;
    double p = 2.0;
};

struct SolutionCurve {
    WeightedSample weighted; // v_i ~ t_i^{1-beta} x(t_i), v_0 = x0
    int iterations = 0;
    double residual = std::numeric_limits<double>::infinity();
    bool converged = false;
    std::string diagnostic;
};

namespace detail {

constexpr double kBlowUp = 1e12;

inline double eval_f(const expr::Expr& f, double t, double x, std::size_t node) {
    try {
        return f(t, x);
    } catch (const EvalError& e) {
        throw EvalError(std::string(e.what()) + " [while evaluating f at node " +
                        std::to_string(node) + ", t = " + std::to_string(t) + "]");
    }
}

} // namespace detail

/// Mesh for a solve: the operator default grading 2/beta unless overridden.
inline GradedMesh solver_mesh(const FivpSpec& spec, std::size_t n,
                              std::optional<double> r_override = {}) {
    const double r = std::clamp(r_override.value_or(GradedMesh::default_grading(spec.beta)),
                                1.0, 48.0);
    return GradedMesh(spec.T, n, r);
}

/// Max-node defect of the Volterra equation, with the integral re-evaluated
/// on a mesh twice as fine (nested nodes; v linearly interpolated).
inline double residual(const FivpSpec& spec, const SolutionCurve& sol) {
    const GradedMesh& mesh = sol.weighted.mesh;
    const std::size_t n = mesh.cells();
    GradedMesh fine(mesh.T(), 2 * n, mesh.grading());
    const auto& v = sol.weighted.values;
    const double beta = spec.beta;

    std::vector<double> vf(fine.size());
    for (std::size_t i = 0; i <= n; ++i) vf[2 * i] = v[i];
    for (std::size_t i = 0; i < n; ++i) {
        const double t0 = mesh.node(i), t1 = mesh.node(i + 1);
        const double tm = fine.node(2 * i + 1);
        const double w = (tm - t0) / (t1 - t0);
        vf[2 * i + 1] = v[i] + w * (v[i + 1] - v[i]);
    }
    std::vector<double> Ff(fine.size(), 0.0);
    for (std::size_t j = 1; j < fine.size(); ++j) {
        const double t = fine.node(j);
        Ff[j] = detail::eval_f(spec.f, t, std::pow(t, beta - 1.0) * vf[j], j);
    }
    ProductIntegrator pif(fine, beta, /*precompute=*/false);
    const double invgb = 1.0 / special::gamma(beta);
    double worst = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
        const double t = mesh.node(i);
        const double integral = pif.at_node(2 * i, Ff);
        const double defect =
            std::fabs(v[i] - spec.x0 - std::pow(t, 1.0 - beta) * invgb * integral);
        worst = std::max(worst, defect);
    }
    return worst;
}

/// Picard iteration on the weighted Volterra form
///   v(t) = x0 + (t^{1-beta} / Gamma(beta)) int_0^t (t-s)^{beta-1}
///          f(s, s^{beta-1} v(s)) ds,
/// with product integration for the integral. Stops when the sup-norm sweep
/// change is <= tol; `converged` additionally requires residual <= 10 tol.
/// Under-relaxation 0.5 engages if sweep deltas oscillate in sign.
inline SolutionCurve solve_volterra(const FivpSpec& spec, const GradedMesh& mesh, double tol,
                                    int max_iter, std::optional<double> initial = {}) {
    if (!(spec.beta > 0.0 && spec.beta < 1.0))
        throw DomainError("solve_volterra: beta must be in (0,1)");
    const std::size_t n = mesh.cells();
    const double beta = spec.beta;
    const double invgb = 1.0 / special::gamma(beta);
    ProductIntegrator pi(mesh, beta, /*precompute=*/n <= 6000);

    SolutionCurve out{WeightedSample(mesh, 1.0 - beta), 0,
                      std::numeric_limits<double>::infinity(), false, ""};
    auto& v = out.weighted.values;
    std::fill(v.begin(), v.end(), initial.value_or(spec.x0));
    v[0] = spec.x0;

    std::vector<double> F(n + 1, 0.0), I, d(n + 1, 0.0), d_prev;
    double relax = 1.0;
    for (int it = 1; it <= max_iter; ++it) {
        out.iterations = it;
        for (std::size_t j = 1; j <= n; ++j) {
            const double t = mesh.node(j);
            F[j] = detail::eval_f(spec.f, t, std::pow(t, beta - 1.0) * v[j], j);
        }
        pi.convolve(F, I);
        double max_d = 0.0;
        for (std::size_t i = 1; i <= n; ++i) {
            const double t = mesh.node(i);
            const double vn = spec.x0 + std::pow(t, 1.0 - beta) * invgb * I[i];
            d[i] = vn - v[i];
            max_d = std::max(max_d, std::fabs(d[i]));
        }
        if (relax == 1.0 && !d_prev.empty()) {
            std::size_t flips = 0, active = 0;
            for (std::size_t i = 1; i <= n; ++i) {
                if (std::fabs(d[i]) > tol && std::fabs(d_prev[i]) > tol) {
                    ++active;
                    if ((d[i] > 0) != (d_prev[i] > 0)) ++flips;
                }
            }
            if (active > 0 && flips * 2 > active) relax = 0.5;
        }
        d_prev = d;
        double max_v = 0.0;
        for (std::size_t i = 1; i <= n; ++i) {
            v[i] += relax * d[i];
            max_v = std::max(max_v, std::fabs(v[i]));
        }
        if (max_v > detail::kBlowUp) {
            out.diagnostic = "blow-up: weighted iterate exceeded " +
                             std::to_string(detail::kBlowUp) + " after " +
                             std::to_string(it) + " sweeps";
            return out;
        }
        if (max_d <= tol) {
            out.residual = residual(spec, out);
            out.converged = out.residual <= 10.0 * tol;
            if (!out.converged) {
                char buf[64];
                std::snprintf(buf, sizeof buf, "%.3g", out.residual);
                out.diagnostic = std::string("sweep change converged but residual ") + buf +
                                 " exceeds 10*tol";
            }
            return out;
        }
    }
    out.residual = residual(spec, out);
    out.diagnostic = "iteration budget exhausted; last sweep change " +
                     std::to_string(std::fabs(d.empty() ? 0.0 : *std::max_element(
                                                               d.begin() + 1, d.end(),
                                                               [](double a, double b) {
                                                                   return std::fabs(a) <
                                                                          std::fabs(b);
                                                               })));
    return out;
}

/// The inequality taken with equality, solved by monotone Picard iteration
/// from u0 = a; the minimal solution is the domination oracle for the bound
/// curves. Nonsingular form (no beta): v = a + b t^sigma (int_0^t l omega(v))^{1/p}.
/// Weakly singular form: v = a + b t^sigma int_0^t (t-s)^{beta-1} l omega(v) ds.
struct ExtremalProblem {
    expr::Expr a, b, l, omega;
    double p = 1.0;
    std::optional<double> beta;
    double sigma = 0.0;
    double weight_exponent = 0.0;
    double T = 1.0;
};

inline GradedMesh extremal_mesh(const ExtremalProblem& prob, std::size_t n,
                                std::optional<double> r_override = {}) {
    const double base = prob.beta ? GradedMesh::default_grading(*prob.beta) : 2.0;
    const double r = std::clamp(r_override.value_or(base), 1.0, 48.0);
    return GradedMesh(prob.T, n, r);
}

inline WeightedSample extremal_solve(const ExtremalProblem& prob, const GradedMesh& mesh,
                                     double tol, int max_iter,
                                     std::vector<std::vector<double>>* sweep_trace = nullptr) {
    const std::size_t n = mesh.cells();
    const double kernel_beta = prob.beta.value_or(1.0);
    if (prob.beta && !(kernel_beta > 0.0 && kernel_beta < 1.0))
        throw DomainError("extremal_solve: beta must be in (0,1)");
    const double root = prob.beta ? 1.0 : 1.0 / prob.p;
    ProductIntegrator pi(mesh, kernel_beta, /*precompute=*/n <= 6000);

    WeightedSample out(mesh, prob.weight_exponent);
    auto& v = out.values;
    for (std::size_t i = 1; i <= n; ++i) v[i] = prob.a(mesh.node(i));
    v[0] = prob.a(mesh.node(1));

    std::vector<double> G(n + 1, 0.0), J;
    for (int it = 1; it <= max_iter; ++it) {
        for (std::size_t j = 1; j <= n; ++j) G[j] = prob.l(mesh.node(j)) * prob.omega.at_u(v[j]);
        pi.convolve(G, J);
        double max_d = 0.0, max_v = 0.0;
        for (std::size_t i = 1; i <= n; ++i) {
            const double t = mesh.node(i);
            double integral = J[i];
            if (integral < 0.0) integral = 0.0;
            const double vn =
                prob.a(t) + prob.b(t) * std::pow(t, prob.sigma) * std::pow(integral, root);
            max_d = std::max(max_d, std::fabs(vn - v[i]));
            v[i] = vn;
            max_v = std::max(max_v, std::fabs(vn));
        }
        if (sweep_trace) sweep_trace->push_back(v);
        if (max_v > detail::kBlowUp)
            throw BlowUpError("extremal equation blew up past " +
                              std::to_string(detail::kBlowUp) + " after " +
                              std::to_string(it) +
                              " sweeps (expected only beyond the validity horizon)");
        if (max_d <= tol) {
            v[0] = v[1]; // continuous limit of the weighted iterate
            return out;
        }
    }
    throw NonConvergence("extremal Picard iteration did not reach tol within " +
                         std::to_string(max_iter) + " sweeps");
}

} // namespace fracbound::solver

#endif
