#ifndef FRACBOUND_SPECIAL_HPP
#define FRACBOUND_SPECIAL_HPP

#include <cmath>
#include <cstdint>
#include <limits>

#include <quadmath.h>

#include "fracbound/error.hpp"

namespace fracbound::special {

namespace detail {

inline constexpr double kPi = 3.14159265358979323846264338327950288;

// Lanczos approximation, g = 7, 9 coefficients. Accurate to ~1e-15 relative
// for positive arguments.
inline constexpr double kLanczos[9] = {
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
};

inline double lanczos_sum(double x) {
    double s = kLanczos[0];
    for (int i = 1; i < 9; ++i) s += kLanczos[i] / (x + i);
    return s;
}

} // namespace detail

/// Gamma function for x > 0. Relative error <= 1e-12 on the library's
/// argument range.
inline double gamma(double x) {
    if (!(x > 0.0)) throw DomainError("gamma: argument must be positive");
    if (x < 0.5) {
        // reflection: Gamma(x) = pi / (sin(pi x) * Gamma(1 - x))
        return detail::kPi / (std::sin(detail::kPi * x) * gamma(1.0 - x));
    }
    const double z = x - 1.0;
    const double t = z + 7.5;
    return std::sqrt(2.0 * detail::kPi) * std::pow(t, z + 0.5) * std::exp(-t) * detail::lanczos_sum(z);
}

/// log(Gamma(x)) for x > 0; does not overflow for large x.
inline double log_gamma(double x) {
    if (!(x > 0.0)) throw DomainError("log_gamma: argument must be positive");
    if (x < 0.5)
        return std::log(detail::kPi / std::sin(detail::kPi * x)) - log_gamma(1.0 - x);
    const double z = x - 1.0;
    const double t = z + 7.5;
    return 0.5 * std::log(2.0 * detail::kPi) + (z + 0.5) * std::log(t) - t +
           std::log(detail::lanczos_sum(z));
}

/// 0^e = 0 for e > 0, 0^0 = 1, ordinary power otherwise. base must be >= 0.
inline double pow_safe(double base, double exponent) {
    if (base < 0.0) throw DomainError("pow_safe: negative base");
    if (base == 0.0) {
        if (exponent > 0.0) return 0.0;
        if (exponent == 0.0) return 1.0;
        throw DomainError("pow_safe: zero base with negative exponent");
    }
    return std::pow(base, exponent);
}

/// Two-parameter Mittag-Leffler function E_{rho,sigma}(z) by direct series
/// sum_{k>=0} z^k / Gamma(rho k + sigma), truncated at machine-precision
/// stagnation. Desk scale only: |z| <= 50. The alternating series for z < 0
/// is ill-conditioned in double, so terms and sum are carried in quad
/// precision internally.
inline double mittag_leffler(double rho, double sigma, double z) {
    if (!(rho > 0.0 && rho <= 1.0)) throw DomainError("mittag_leffler: rho must be in (0,1]");
    if (!(sigma > 0.0)) throw DomainError("mittag_leffler: sigma must be positive");
    if (!(std::fabs(z) <= 50.0)) throw DomainError("mittag_leffler: |z| must be <= 50");

    if (z == 0.0) return 1.0 / gamma(sigma);

    const __float128 qz = z;
    const __float128 ln_abs_z = logq(fabsq(qz));
    __float128 sum = 0;
    __float128 prev_mag = 0;
    int stagnant = 0;
    for (int k = 0; k < 10000; ++k) {
        const __float128 arg = rho * static_cast<__float128>(k) + sigma;
        __float128 term = expq(static_cast<__float128>(k) * ln_abs_z - lgammaq(arg));
        if (isinfq(term) || isnanq(term))
            throw NonConvergence("mittag_leffler: series overflowed before converging");
        if (z < 0.0 && (k & 1)) term = -term;
        sum += term;
        const __float128 mag = fabsq(term);
        if (k > 0 && mag <= fabsq(sum) * 1e-36 && mag <= prev_mag) {
            if (++stagnant >= 3) {
                const double out = static_cast<double>(sum);
                if (!std::isfinite(out))
                    throw DomainError("mittag_leffler: result exceeds double range");
                return out;
            }
        } else {
            stagnant = 0;
        }
        prev_mag = mag;
    }
    throw NonConvergence("mittag_leffler: series still contributing after 10000 terms");
}

} // namespace fracbound::special

#endif
