#ifndef FRACBOUND_OPERATORS_HPP
#define FRACBOUND_OPERATORS_HPP

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "fracbound/error.hpp"
#include "fracbound/expr.hpp"
#include "fracbound/mesh.hpp"
#include "fracbound/product_integration.hpp"
#include "fracbound/quadrature.hpp"
#include "fracbound/special.hpp"

namespace fracbound::ops {

namespace detail {

inline std::vector<double> sample_raw(const WeightedSample& f) {
    const auto& mesh = f.mesh;
    if (f.weight_exponent >= 1.0 && f.values[0] != 0.0)
        throw IntegrabilityError(
            "weighted value at 0 does not give an integrable function "
            "(weight exponent >= 1)");
    std::vector<double> F(mesh.size(), 0.0);
    for (std::size_t i = 1; i < mesh.size(); ++i) F[i] = f.raw(i);
    return F;
}

inline std::vector<double> sample_expr(const expr::Expr& f, const GradedMesh& mesh) {
    std::vector<double> F(mesh.size(), 0.0);
    for (std::size_t i = 1; i < mesh.size(); ++i) F[i] = f(mesh.node(i));
    return F;
}

} // namespace detail

/// Riemann-Liouville fractional integral I^beta f at every mesh node,
/// by product integration. Node 0 holds 0.
inline std::vector<double> frac_integral(double beta, const WeightedSample& f) {
    ProductIntegrator pi(f.mesh, beta, /*precompute=*/false);
    std::vector<double> F = detail::sample_raw(f);
    std::vector<double> out;
    pi.convolve(F, out);
    const double scale = 1.0 / special::gamma(beta);
    for (double& v : out) v *= scale;
    return out;
}

inline std::vector<double> frac_integral(double beta, const expr::Expr& f,
                                         const GradedMesh& mesh) {
    ProductIntegrator pi(mesh, beta, /*precompute=*/false);
    std::vector<double> F = detail::sample_expr(f, mesh);
    std::vector<double> out;
    pi.convolve(F, out);
    const double scale = 1.0 / special::gamma(beta);
    for (double& v : out) v *= scale;
    return out;
}

/// I^beta f at a single mesh node.
inline double frac_integral_at(double beta, const WeightedSample& f, std::size_t node) {
    ProductIntegrator pi(f.mesh, beta, /*precompute=*/false);
    std::vector<double> F = detail::sample_raw(f);
    return pi.at_node(node, F) / special::gamma(beta);
}

inline double frac_integral_at(double beta, const expr::Expr& f, const GradedMesh& mesh,
                               std::size_t node) {
    ProductIntegrator pi(mesh, beta, /*precompute=*/false);
    std::vector<double> F = detail::sample_expr(f, mesh);
    return pi.at_node(node, F) / special::gamma(beta);
}

/// Riemann-Liouville fractional derivative D^beta f at interior node i:
/// the centered difference of g(t) = I^{1-beta} f(t) with step h equal to
/// the local mesh spacing. Error O(h^2) for smooth g.
inline double frac_derivative(double beta, const WeightedSample& f, std::size_t node) {
    const auto& mesh = f.mesh;
    if (node == 0 || node >= mesh.cells())
        throw DomainError("frac_derivative: derivative defined at interior nodes only");
    ProductIntegrator pi(mesh, 1.0 - beta, /*precompute=*/false);
    std::vector<double> F = detail::sample_raw(f);
    const double t = mesh.node(node);
    const double h = std::min(t - mesh.node(node - 1), mesh.node(node + 1) - t);
    const double gp = pi.at(t + h, F) / special::gamma(1.0 - beta);
    const double gm = pi.at(t - h, F) / special::gamma(1.0 - beta);
    return (gp - gm) / (2.0 * h);
}

inline double frac_derivative(double beta, const expr::Expr& f, const GradedMesh& mesh,
                              std::size_t node) {
    if (node == 0 || node >= mesh.cells())
        throw DomainError("frac_derivative: derivative defined at interior nodes only");
    ProductIntegrator pi(mesh, 1.0 - beta, /*precompute=*/false);
    std::vector<double> F = detail::sample_expr(f, mesh);
    const double t = mesh.node(node);
    const double h = std::min(t - mesh.node(node - 1), mesh.node(node + 1) - t);
    const double gp = pi.at(t + h, F) / special::gamma(1.0 - beta);
    const double gm = pi.at(t - h, F) / special::gamma(1.0 - beta);
    return (gp - gm) / (2.0 * h);
}

/// phi(t) = (t^mu - 1) / (t - 1)^mu for t > 1, 0 < mu < 1. Nondecreasing on
/// (1, inf) with limit 0 at 1+. Evaluated through expm1/log1p so the 0/0
/// form near t = 1 stays accurate.
inline double phi(double mu, double t) {
    if (!(mu > 0.0 && mu < 1.0)) throw DomainError("phi: mu must be in (0,1)");
    if (!(t > 1.0)) throw DomainError("phi: t must be > 1");
    const double dt = t - 1.0;
    return std::expm1(mu * std::log1p(dt)) / std::pow(dt, mu);
}

struct BoundPair {
    double lhs;
    double rhs;
};

namespace detail {

// int_0^t (t-s)^{beta-1} rho(s) ds with rho possibly power-singular at 0.
// Split at t/2; graded substitution at each singular endpoint.
inline double kernel_convolution(double beta, const expr::Expr& rho, double t,
                                 double rho_lambda, double tol) {
    const double mid = 0.5 * t;
    const double left = quad::integrate_from_zero(
        [&](double s) { return std::pow(t - s, beta - 1.0) * rho(s); }, mid, rho_lambda, tol);
    // s = t - u on [mid, t]: u^{beta-1} singular at u = 0
    const double right = quad::integrate_from_zero(
        [&](double u) { return std::pow(u, beta - 1.0) * rho(t - u); }, mid, beta - 1.0, tol);
    return left + right;
}

inline double lp_weight_integral(double beta, double p, const expr::Expr& rho, double a,
                                 double b, double rho_lambda, double tol) {
    // int_a^b s^{p(1-beta)} |rho(s)|^p ds
    const double lam = p * (1.0 - beta) + p * rho_lambda;
    if (!(lam > -1.0))
        throw IntegrabilityError("s^{1-beta} rho(s) is not in L^p near 0 "
                                 "(exponent " + std::to_string(lam) + ")");
    auto g = [&](double s) {
        const double rs = std::fabs(rho(s));
        if (rs == 0.0) return 0.0;
        return std::exp(p * (1.0 - beta) * std::log(s) + p * std::log(rs));
    };
    if (a == 0.0) return quad::integrate_from_zero(g, b, lam, tol);
    return quad::integrate(g, a, b, tol);
}

inline double rho_exponent(const expr::Expr& rho) {
    double lam = 0.0;
    if (!quad::estimate_power_exponent([&](double s) { return rho(s); }, lam)) lam = 0.0;
    if (lam > 0.0) lam = 0.0;
    return lam;
}

} // namespace detail

/// Both sides of the kernel estimate
///   |int_0^t (t/(t-s))^{1-beta} rho(s) ds|
///     <= 2^{1/q} t^{beta-1+1/q} / (q beta - q + 1)^{1/q}
///        * (int_0^t s^{p(1-beta)} |rho|^p ds)^{1/p}
/// for t in (0,1], p > 1/beta, q = p/(p-1).
inline BoundPair kernel_bound(double beta, double p, const expr::Expr& rho, double t,
                              double tol = 1e-10) {
    if (!(beta > 0.0 && beta < 1.0)) throw DomainError("kernel_bound: beta must be in (0,1)");
    if (!(p > 1.0 / beta)) throw DomainError("kernel_bound: requires p > 1/beta");
    if (!(t > 0.0 && t <= 1.0)) throw DomainError("kernel_bound: t must be in (0,1]");
    const double q = p / (p - 1.0);
    const double lam = detail::rho_exponent(rho);

    const double conv = detail::kernel_convolution(beta, rho, t, lam, tol);
    const double lhs = std::fabs(std::pow(t, 1.0 - beta) * conv);

    const double c = q * beta - q + 1.0;
    const double pref = std::pow(2.0, 1.0 / q) * std::pow(t, beta - 1.0 + 1.0 / q) /
                        std::pow(c, 1.0 / q);
    const double lp = detail::lp_weight_integral(beta, p, rho, 0.0, t, lam, tol);
    return {lhs, pref * std::pow(lp, 1.0 / p)};
}

/// Both sides of the two-point kernel difference estimate (the modulus of
/// continuity used for equicontinuity), 0 < t1 <= t2 <= 1.
inline BoundPair kernel_diff_bound(double beta, double p, const expr::Expr& rho, double t1,
                                   double t2, double tol = 1e-10) {
    if (!(beta > 0.0 && beta < 1.0)) throw DomainError("kernel_diff_bound: beta in (0,1)");
    if (!(p > 1.0 / beta)) throw DomainError("kernel_diff_bound: requires p > 1/beta");
    if (!(0.0 < t1 && t1 <= t2 && t2 <= 1.0))
        throw DomainError("kernel_diff_bound: need 0 < t1 <= t2 <= 1");
    if (t1 == t2) return {0.0, 0.0};
    const double q = p / (p - 1.0);
    const double c = q * beta - q + 1.0; // = 1 + q(beta-1) > 0
    const double lam = detail::rho_exponent(rho);

    const double i2 = std::pow(t2, 1.0 - beta) * detail::kernel_convolution(beta, rho, t2, lam, tol);
    const double i1 = std::pow(t1, 1.0 - beta) * detail::kernel_convolution(beta, rho, t1, lam, tol);
    const double lhs = std::fabs(i2 - i1);

    const double lp_tail = detail::lp_weight_integral(beta, p, rho, t1, t2, lam, tol);
    const double lp_head = detail::lp_weight_integral(beta, p, rho, 0.0, t1, lam, tol);
    const double term1 = std::pow(2.0, 1.0 / q) * std::pow(t2 - t1, beta - 1.0 + 1.0 / q) /
                         std::pow(c, 1.0 / q) * std::pow(lp_tail, 1.0 / p);
    // (t2-t1)^c + t1^c - t2^c >= 0 by subadditivity; compute the t-part safely
    const double bracket = std::pow(t2 - t1, c) +
                           -std::pow(t1, c) * std::expm1(c * std::log(t2 / t1));
    const double term2 = std::pow(std::max(bracket, 0.0) / c, 1.0 / q) * std::pow(lp_head, 1.0 / p);
    return {lhs, term1 + term2};
}

} // namespace fracbound::ops

#endif
