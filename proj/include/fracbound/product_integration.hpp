#ifndef FRACBOUND_PRODUCT_INTEGRATION_HPP
#define FRACBOUND_PRODUCT_INTEGRATION_HPP

#include <cmath>
#include <cstddef>
#include <vector>

#include "fracbound/error.hpp"
#include "fracbound/mesh.hpp"
#include "fracbound/quadrature.hpp"
#include "fracbound/special.hpp"

namespace fracbound {

namespace detail {

// Moments of the kernel (t-s)^{beta-1} over a cell [a,b], b <= t:
//   M0 = int_a^b (t-s)^{beta-1} ds
//   C1 = int_a^b (t-s)^{beta-1} (s-a) ds
// Written in u1 = t-a, delta = (b-a)/u1 so that adjacent-magnitude
// cancellations go through expm1/log1p or a series instead of raw
// subtraction. Cells far from the kernel point have delta ~ 1e-60 on
// strongly graded meshes; the naive forms lose everything there.
struct CellMoments {
    double m0;
    double c1;
};

inline CellMoments kernel_cell_moments(double beta, double t, double a, double b) {
    const double u1 = t - a;
    const double h = b - a;
    const double delta = h / u1;
    const double u1b = std::pow(u1, beta);

    double A; // 1 - (1-delta)^beta
    if (delta >= 1.0) {
        A = 1.0;
    } else {
        A = -std::expm1(beta * std::log1p(-delta));
    }
    const double m0 = u1b * A / beta;

    double D; // A/beta - A2/(beta+1)
    if (delta < 0.25) {
        // D = sum_{k>=2} c_k delta^k, c_2 = 1/2,
        // c_{k+1}/c_k = k (k-1-beta) / ((k+1)(k-1))
        double coeff = 0.5;
        double dk = delta * delta;
        D = coeff * dk;
        for (int k = 2; k < 40; ++k) {
            coeff *= k * (k - 1.0 - beta) / ((k + 1.0) * (k - 1.0));
            dk *= delta;
            const double term = coeff * dk;
            D += term;
            if (std::fabs(term) < 1e-18 * std::fabs(D)) break;
        }
    } else {
        const double A2 = delta >= 1.0 ? 1.0 : -std::expm1((beta + 1.0) * std::log1p(-delta));
        D = A / beta - A2 / (beta + 1.0);
    }
    const double c1 = u1b * u1 * D;
    return {m0, c1};
}

// 8-point Gauss panel for the geometric-cell moments. The transformed
// integrands are analytic with mild variation (the kernel argument stays
// away from 0 by construction), so a fixed small panel is enough.
template <class F>
double gl8_panel(const F& f, double a, double b) {
    static const quad::detail::GaussRule<8> r;
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double s = 0.0;
    for (int i = 0; i < 8; ++i) s += r.w[i] * f(mid + half * r.x[i]);
    return s * half;
}

} // namespace detail

/// Product integration of int_0^t (t-s)^{beta-1} F(s) ds on a graded mesh.
///
/// Interpolation of F between node samples is cell-dependent:
///  - On early cells, where graded meshes have node ratios far from 1 and
///    the data behaves like a power of s, F is interpolated geometrically
///    (log-linear: F(s) ~ F_j (s/t_j)^m with m the cell's log-slope). This
///    is exact for pure powers, which is what keeps barely-integrable data
///    (exponents near -1) from destroying the early-cell contributions.
///  - Elsewhere F is interpolated linearly and the kernel moments are
///    integrated exactly in closed form.
///  - The first cell extrapolates the power law fitted through the first
///    two samples (F may blow up at 0); with constant data this reduces to
///    the right-endpoint rectangle rule.
///
/// Geometric cells fall back to linear interpolation when the samples are
/// not both positive. Expected convergence O(N^{-min(2, r(1+lambda))}) for
/// the linear baseline, with the geometric cells removing the early-cell
/// error for power-type data.
///
/// With `precompute` the linear-cell weights are tabulated (<= N(N+1)/2
/// doubles); geometric cells are streamed per convolution since their rule
/// is not linear in the samples.
class ProductIntegrator {
public:
    ProductIntegrator(GradedMesh mesh, double beta, bool precompute = true)
        : mesh_(std::move(mesh)), beta_(beta) {
        if (!(beta > 0.0 && beta <= 1.0))
            throw DomainError("ProductIntegrator: beta must be in (0,1]");
        classify();
        if (precompute) build_table();
    }

    const GradedMesh& mesh() const { return mesh_; }
    double beta() const { return beta_; }

    /// out[m] = int_0^{t_m} (t_m-s)^{beta-1} F(s) ds for every node;
    /// F[0] is ignored (the first cell extrapolates from F[1], F[2]).
    void convolve(const std::vector<double>& F, std::vector<double>& out) const {
        const std::size_t n = mesh_.cells();
        out.assign(n + 1, 0.0);
        for (std::size_t m = 1; m <= n; ++m) {
            double acc = streamed_part(m, F);
            if (!w_.empty()) {
                const double* row = w_.data() + row_offset(m);
                for (std::size_t k = 1; k <= m; ++k) acc += row[k - 1] * F[k];
            } else {
                acc += linear_part(m, F);
            }
            out[m] = acc;
        }
    }

    /// Single-node value, fully streamed.
    double at_node(std::size_t m, const std::vector<double>& F) const {
        if (m == 0) return 0.0;
        if (!w_.empty()) {
            double acc = streamed_part(m, F);
            const double* row = w_.data() + row_offset(m);
            for (std::size_t k = 1; k <= m; ++k) acc += row[k - 1] * F[k];
            return acc;
        }
        return streamed_part(m, F) + linear_part(m, F);
    }

    /// Value at an arbitrary t in (0, T]; the partial final cell uses the
    /// linear interpolant of its enclosing mesh cell.
    double at(double t, const std::vector<double>& F) const {
        if (!(t > 0.0 && t <= mesh_.T() * (1.0 + 1e-12)))
            throw DomainError("ProductIntegrator::at: t outside (0, T]");
        t = std::min(t, mesh_.T());
        std::size_t c = 0;
        {
            std::size_t lo = 0, hi = mesh_.cells();
            while (hi - lo > 1) {
                const std::size_t mid = (lo + hi) / 2;
                (mesh_.node(mid) < t ? lo : hi) = mid;
            }
            c = lo;
        }
        if (c == 0) return detail::kernel_cell_moments(beta_, t, 0.0, t).m0 * F[1];
        double acc = first_cell(t, F, /*kernel_singular=*/false);
        for (std::size_t j = 1; j < c; ++j) acc += cell_value(t, j, F);
        const double a = mesh_.node(c);
        const double h = mesh_.node(c + 1) - a;
        const auto mom = detail::kernel_cell_moments(beta_, t, a, t);
        const double slope = (F[c + 1] - F[c]) / h;
        acc += F[c] * mom.m0 + slope * mom.c1;
        return acc;
    }

private:
    GradedMesh mesh_;
    double beta_;
    std::vector<double> w_;        // packed rows of linear-cell weights
    std::size_t geo_limit_ = 0;    // cells j <= geo_limit_ are streaming candidates
    double kernel_gap_ = 0.6;      // geometric only while t_{j+1} <= gap * t

    static constexpr double kRatioThreshold = 1.03;

    static std::size_t row_offset(std::size_t m) { return (m - 1) * m / 2; }

    void classify() {
        // node ratio (j+1)/j)^r falls below the threshold past some j
        const std::size_t n = mesh_.cells();
        geo_limit_ = 0;
        for (std::size_t j = 1; j < n; ++j) {
            if (mesh_.node(j + 1) / mesh_.node(j) >= kRatioThreshold)
                geo_limit_ = j;
            else
                break;
        }
    }

    bool is_streamed(std::size_t m, std::size_t j) const {
        return j <= geo_limit_ && mesh_.node(j + 1) <= kernel_gap_ * mesh_.node(m);
    }

    // power-extrapolated first cell [0, t1]
    double first_cell(double t, const std::vector<double>& F, bool kernel_singular) const {
        const double t1 = mesh_.node(1);
        const double f1 = F[1];
        if (f1 == 0.0) return 0.0;
        double m0 = 0.0;
        if (F.size() > 2 && f1 > 0.0 && F[2] > 0.0) {
            m0 = std::log(F[2] / f1) / std::log(mesh_.node(2) / t1);
            if (!std::isfinite(m0)) m0 = 0.0;
            m0 = std::min(std::max(m0, -0.97), 60.0);
        }
        if (kernel_singular) {
            // t == t1: int_0^{t1} (t1-s)^{beta-1} (s/t1)^{m0} ds
            //        = t1^beta B(m0+1, beta)
            const double logB = special::log_gamma(m0 + 1.0) + special::log_gamma(beta_) -
                                special::log_gamma(m0 + 1.0 + beta_);
            return f1 * std::pow(t1, beta_) * std::exp(logB);
        }
        // smooth kernel: substitute sigma = (s/t1)^{m0+1}, which absorbs the
        // power into the measure exactly
        const double c = 1.0 / (m0 + 1.0);
        const double val = detail::gl8_panel(
            [&](double sigma) {
                const double s = sigma > 0.0 ? t1 * std::pow(sigma, c) : 0.0;
                return std::pow(t - s, beta_ - 1.0);
            },
            0.0, 1.0);
        return f1 * t1 * c * val;
    }

    // geometric-or-linear interior cell [t_j, t_{j+1}]
    double cell_value(double t, std::size_t j, const std::vector<double>& F) const {
        const double a = mesh_.node(j);
        const double b = mesh_.node(j + 1);
        const double fa = F[j], fb = F[j + 1];
        if (fa > 0.0 && fb > 0.0 && b <= kernel_gap_ * t) {
            const double lr = std::log(b / a);
            const double m = std::log(fb / fa) / lr;
            const double mp1 = m + 1.0;
            if (std::isfinite(m) && std::fabs(mp1) > 0.02 &&
                std::fabs(mp1 * lr) < 60.0) {
                // w = (s/a)^{m+1}: int = fa a/(m+1) int_1^R (t - a w^{1/(m+1)})^{beta-1} dw
                const double R = std::exp(mp1 * lr);
                const double c = 1.0 / mp1;
                const double val = detail::gl8_panel(
                    [&](double w) { return std::pow(t - a * std::pow(w, c), beta_ - 1.0); },
                    1.0, R);
                return fa * a * c * val;
            }
        }
        const auto mom = detail::kernel_cell_moments(beta_, t, a, b);
        const double slope_w = mom.c1 / (b - a);
        return fa * (mom.m0 - slope_w) + fb * slope_w;
    }

    // cells handled per-convolution (first cell + geometric zone)
    double streamed_part(std::size_t m, const std::vector<double>& F) const {
        const double t = mesh_.node(m);
        double acc = first_cell(t, F, /*kernel_singular=*/m == 1);
        for (std::size_t j = 1; j < m && is_streamed(m, j); ++j) acc += cell_value(t, j, F);
        return acc;
    }

    // linear remainder, streamed (used when no table was built)
    double linear_part(std::size_t m, const std::vector<double>& F) const {
        const double t = mesh_.node(m);
        double acc = 0.0;
        for (std::size_t j = 1; j < m; ++j) {
            if (is_streamed(m, j)) continue;
            const double a = mesh_.node(j);
            const double b = mesh_.node(j + 1);
            const auto mom = detail::kernel_cell_moments(beta_, t, a, b);
            const double slope_w = mom.c1 / (b - a);
            acc += F[j] * (mom.m0 - slope_w) + F[j + 1] * slope_w;
        }
        return acc;
    }

    void build_table() {
        const std::size_t n = mesh_.cells();
        w_.assign(n * (n + 1) / 2, 0.0);
        for (std::size_t m = 1; m <= n; ++m) {
            double* row = w_.data() + row_offset(m);
            const double t = mesh_.node(m);
            for (std::size_t j = 1; j < m; ++j) {
                if (is_streamed(m, j)) continue;
                const double a = mesh_.node(j);
                const double b = mesh_.node(j + 1);
                const auto mom = detail::kernel_cell_moments(beta_, t, a, b);
                const double slope_w = mom.c1 / (b - a);
                row[j - 1] += mom.m0 - slope_w;
                row[j] += slope_w;
            }
        }
    }
};

} // namespace fracbound

#endif
