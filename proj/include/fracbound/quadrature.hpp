#ifndef FRACBOUND_QUADRATURE_HPP
#define FRACBOUND_QUADRATURE_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <vector>

#include "fracbound/error.hpp"

namespace fracbound::quad {

namespace detail {

// Gauss-Legendre nodes on [-1,1] by Newton iteration on P_n, started from the
// Chebyshev estimate. Nodes/weights converge to machine precision.
template <int N>
struct GaussRule {
    std::array<double, N> x{};
    std::array<double, N> w{};

    GaussRule() {
        constexpr double pi = 3.14159265358979323846264338327950288;
        for (int i = 0; i < N; ++i) {
            double xi = std::cos(pi * (i + 0.75) / (N + 0.5));
            double p1 = 0.0;
            for (int it = 0; it < 100; ++it) {
                // evaluate P_N and P_{N-1} by recurrence
                double p0 = 1.0, pm = 0.0;
                for (int k = 0; k < N; ++k) {
                    const double tmp = p0;
                    p0 = ((2.0 * k + 1.0) * xi * p0 - k * pm) / (k + 1.0);
                    pm = tmp;
                }
                p1 = N * (xi * p0 - pm) / (xi * xi - 1.0); // P_N'
                const double dx = p0 / p1;
                xi -= dx;
                if (std::fabs(dx) < 1e-16) break;
            }
            x[i] = xi;
            w[i] = 2.0 / ((1.0 - xi * xi) * p1 * p1);
        }
    }
};

inline const GaussRule<12>& rule12() {
    static const GaussRule<12> r;
    return r;
}

template <class F>
double gauss12(const F& f, double a, double b) {
    const auto& r = rule12();
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double s = 0.0;
    for (int i = 0; i < 12; ++i) s += r.w[i] * f(mid + half * r.x[i]);
    return s * half;
}

template <class F>
double adaptive(const F& f, double a, double b, double tol, int depth, double whole) {
    const double mid = 0.5 * (a + b);
    const double left = gauss12(f, a, mid);
    const double right = gauss12(f, mid, b);
    const double err = std::fabs(left + right - whole);
    // the relative floor keeps roundoff-limited panels from subdividing
    if (err <= tol || err <= 1e-14 * std::fabs(left + right) || depth >= 48 ||
        b - a < 1e-300)
        return left + right;
    return adaptive(f, a, mid, 0.5 * tol, depth + 1, left) +
           adaptive(f, mid, b, 0.5 * tol, depth + 1, right);
}

} // namespace detail

/// Adaptive quadrature of f over [a,b] to absolute tolerance tol.
/// The integrand must be finite on the open interval; endpoint values are
/// never sampled exactly at a or b (Gauss nodes are interior).
template <class F>
double integrate(const F& f, double a, double b, double tol = 1e-10) {
    if (a == b) return 0.0;
    const double sign = a < b ? 1.0 : -1.0;
    if (a > b) std::swap(a, b);
    const double whole = detail::gauss12(f, a, b);
    return sign * detail::adaptive(f, a, b, tol, 0, whole);
}

/// Power-law exponent of g near 0: the limiting slope of ln g vs ln t.
/// Starts on the window [lo, hi] and shifts it toward 0 until the slope
/// stabilizes, so the dominant exponent of a sum of powers is recovered.
/// Returns false when g vanishes identically on the windows.
template <class F>
bool estimate_power_exponent(const F& g, double& exponent, double hi = 1e-3, double lo = 1e-8) {
    constexpr int kSamples = 33;
    double prev = 0.0;
    bool have_prev = false;
    for (int window = 0; window < 12; ++window) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int n = 0;
        bool all_zero = true;
        const double step = std::log(hi / lo) / (kSamples - 1);
        for (int i = 0; i < kSamples; ++i) {
            const double t = lo * std::exp(step * i);
            const double v = g(t);
            if (!std::isfinite(v)) return have_prev ? (exponent = prev, true) : false;
            if (v == 0.0) continue;
            all_zero = false;
            const double X = std::log(t);
            const double Y = std::log(std::fabs(v));
            sx += X; sy += Y; sxx += X * X; sxy += X * Y;
            ++n;
        }
        if (all_zero || n < 4) {
            if (have_prev) { exponent = prev; return true; }
            return false;
        }
        const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        if (have_prev && std::fabs(slope - prev) < 3e-3) {
            exponent = slope;
            return true;
        }
        prev = slope;
        have_prev = true;
        hi *= 1e-5;
        lo *= 1e-5;
        if (lo < 1e-60) break;
    }
    exponent = prev;
    return have_prev;
}

/// Integral of g over (0, T] where g may have an integrable power singularity
/// at 0 of exponent `lambda` (> -1). Substitutes s = T sigma^r with r chosen
/// so the transformed integrand is smooth at sigma = 0.
template <class F>
double integrate_from_zero(const F& g, double T, double lambda, double tol = 1e-10) {
    if (T == 0.0) return 0.0;
    if (!(lambda > -1.0))
        throw IntegrabilityError("integrand exponent " + std::to_string(lambda) +
                                 " at 0 is not integrable");
    double r = 1.0;
    if (lambda < 1.0) r = std::min(48.0, std::max(1.0, std::ceil(3.0 / (1.0 + lambda))));
    return integrate(
        [&](double sigma) {
            const double s = T * std::pow(sigma, r);
            if (s <= 0.0) return 0.0; // sigma^r underflow: the transformed integrand -> 0
            return g(s) * T * r * std::pow(sigma, r - 1.0);
        },
        0.0, 1.0, tol);
}

/// Convenience: detect the exponent, then integrate from zero.
template <class F>
double integrate_from_zero_auto(const F& g, double T, double tol = 1e-10) {
    double lambda = 0.0;
    if (!estimate_power_exponent(g, lambda)) lambda = 0.0; // g vanishes near 0: no singularity
    if (lambda > 0.0) lambda = 0.0;
    return integrate_from_zero(g, T, lambda, tol);
}

} // namespace fracbound::quad

#endif
