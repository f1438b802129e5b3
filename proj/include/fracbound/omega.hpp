#ifndef FRACBOUND_OMEGA_HPP
#define FRACBOUND_OMEGA_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <vector>

#include "fracbound/error.hpp"
#include "fracbound/expr.hpp"
#include "fracbound/quadrature.hpp"

namespace fracbound {

/// Which transformed nonlinearity backs Omega:
///   plain: mu(t) = omega(2^{1-1/p} t^{1/p})
///   pth:   mu(t) = omega^p(2^{1-1/p} t^{1/p})
enum class PowerMode { plain, pth };

struct DomainSup {
    enum class Kind { finite, infinite, inconclusive } kind;
    double value; // supremum of Omega's range when finite, +inf when infinite

    bool is_infinite() const { return kind == Kind::infinite; }
};

/// The Omega machinery: Omega(x) = int_1^x dt / mu(t), its inverse, and the
/// supremum of its range. Backed by a monotone (x, Omega) table on a
/// geometric grid, grown on demand; growth is internally synchronized, so a
/// constructed transform is safe for concurrent reads.
class OmegaTransform {
public:
    OmegaTransform(expr::Expr omega_in_u, double p, PowerMode mode)
        : omega_(std::move(omega_in_u)), p_(p), mode_(mode) {
        if (!(p >= 1.0)) throw DomainError("OmegaTransform: p must be >= 1");
        validate_omega();
        build_table();
        classify_tail();
        classify_lower_end();
    }

    double p() const { return p_; }
    PowerMode mode() const { return mode_; }

    /// mu(t) for t > 0.
    double mu(double t) const {
        if (!(t > 0.0)) throw DomainError("mu: t must be positive");
        const double c = std::pow(2.0, 1.0 - 1.0 / p_);
        const double w = omega_.at_u(c * std::pow(t, 1.0 / p_));
        return mode_ == PowerMode::plain ? w : std::pow(w, p_);
    }

    /// Omega(x) for x > 0; -infinity below the lower-divergence threshold.
    double Omega(double x) const {
        if (!(x > 0.0)) throw DomainError("Omega: x must be positive");
        if (x == 1.0) return 0.0;
        std::lock_guard<std::mutex> lock(m_);
        return omega_locked(x);
    }

    /// x with |Omega(x) - y| <= 1e-9 max(1,|y|). Throws OutOfDomainError for
    /// y at or above the supremum of Omega's range.
    double Omega_inv(double y) const {
        std::lock_guard<std::mutex> lock(m_);
        if (std::isnan(y)) throw DomainError("Omega_inv: argument is NaN");
        if (std::isinf(y) && y > 0.0)
            throw OutOfDomainError("Omega_inv: argument is +infinity");
        if (sup_.kind == DomainSup::Kind::finite && y >= sup_.value)
            throw OutOfDomainError("Omega_inv: argument " + std::to_string(y) +
                                   " is not below the domain supremum " +
                                   std::to_string(sup_.value));
        if (std::isinf(y) && y < 0.0) return lower_threshold_;
        if (!lower_divergent_ && y <= lower_limit_) return 0.0;
        return invert_locked(y);
    }

    /// Supremum of Omega's range: +infinity when int^inf 1/mu diverges.
    DomainSup domain_sup() const { return sup_; }

    /// Omega(0+): finite value, or -infinity when int_0 1/mu diverges.
    double lower_limit() const { return lower_limit_; }
    bool lower_divergent() const { return lower_divergent_; }

    // table access (tests)
    std::vector<double> table_x() const {
        std::lock_guard<std::mutex> lock(m_);
        return xs_;
    }
    std::vector<double> table_y() const {
        std::lock_guard<std::mutex> lock(m_);
        return ys_;
    }

private:
    expr::Expr omega_;
    double p_;
    PowerMode mode_;

    mutable std::mutex m_;
    mutable std::vector<double> xs_; // ascending, anchor x = 1 with y = 0
    mutable std::vector<double> ys_;
    std::size_t first_finite_ = 0; // first index with finite y
    bool lower_divergent_ = false;
    double lower_threshold_ = 0.0; // sup{x : Omega(x) = -inf}
    double lower_limit_ = 0.0;     // Omega(0+)
    DomainSup sup_{DomainSup::Kind::infinite, std::numeric_limits<double>::infinity()};

    static constexpr double kXMin = 1e-12;
    static constexpr double kXMax0 = 1e6;
    static constexpr std::size_t kHalfKnots = 1024;
    static constexpr double kDivergedAccum = 1e15;

    double inv_mu(double t) const { return 1.0 / mu(t); }

    void validate_omega() {
        double prev = omega_.at_u(0.0);
        if (prev < -1e-12) throw DomainError("omega must be nonnegative");
        for (int i = 0; i <= 64; ++i) {
            const double u = 1e-9 * std::pow(1e18, i / 64.0);
            const double w = omega_.at_u(u);
            if (w < -1e-12) throw DomainError("omega must be nonnegative");
            if (w < prev - 1e-12 * std::max(1.0, std::fabs(prev)))
                throw DomainError("omega must be nondecreasing");
            prev = std::max(prev, w);
        }
        if (omega_.at_u(1e9) <= 0.0)
            throw DomainError("omega vanishes on the sampled range; Omega is undefined");
        if (!(mu(1.0) > 0.0))
            throw DomainError("omega vanishes at the Omega anchor (mu(1) = 0); "
                              "the transform is undefined there");
    }

    void build_table() {
        const double down_ratio = std::pow(kXMin, 1.0 / static_cast<double>(kHalfKnots));
        const double up_ratio = std::pow(kXMax0, 1.0 / static_cast<double>(kHalfKnots));
        xs_.resize(2 * kHalfKnots + 1);
        ys_.resize(2 * kHalfKnots + 1);
        xs_[kHalfKnots] = 1.0;
        ys_[kHalfKnots] = 0.0;
        // downward section
        bool diverged = false;
        for (std::size_t i = kHalfKnots; i-- > 0;) {
            xs_[i] = xs_[i + 1] * down_ratio;
            if (diverged) {
                ys_[i] = -std::numeric_limits<double>::infinity();
                continue;
            }
            if (mu(xs_[i]) <= 0.0) {
                diverged = true;
                ys_[i] = -std::numeric_limits<double>::infinity();
                continue;
            }
            const double seg = segment_integral(xs_[i], xs_[i + 1]);
            ys_[i] = ys_[i + 1] - seg;
            if (!std::isfinite(ys_[i]) || ys_[i] < -kDivergedAccum) {
                diverged = true;
                ys_[i] = -std::numeric_limits<double>::infinity();
            }
        }
        first_finite_ = 0;
        while (first_finite_ < xs_.size() && !std::isfinite(ys_[first_finite_])) ++first_finite_;
        // upward section
        for (std::size_t i = kHalfKnots; i + 1 < xs_.size(); ++i) {
            xs_[i + 1] = xs_[i] * up_ratio;
            ys_[i + 1] = ys_[i] + segment_integral(xs_[i], xs_[i + 1]);
        }
        xs_[kHalfKnots] = 1.0; // keep the anchor exact
        ys_[kHalfKnots] = 0.0;
    }

    double segment_integral(double a, double b) const {
        const double est = std::fabs((b - a) * inv_mu(0.5 * (a + b)));
        const double tol = std::max(1e-16, 1e-12 * est);
        return quad::integrate([this](double t) { return inv_mu(t); }, a, b, tol);
    }

    // Tail classification of int^inf 1/mu: slope of ln mu vs ln t over
    // [1e3, 1e6]; when the slope sits in the ambiguous band around 1, fall
    // back to the harmonic ratio t/mu(t) (positive limit => divergence).
    void classify_tail() {
        constexpr int n = 16;
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        std::vector<double> ratio(n);
        for (int i = 0; i < n; ++i) {
            const double t = 1e3 * std::pow(1e3, i / static_cast<double>(n - 1));
            const double m = mu(t);
            if (!(m > 0.0)) throw DomainError("mu vanishes on the tail window");
            const double X = std::log(t), Y = std::log(m);
            sx += X; sy += Y; sxx += X * X; sxy += X * Y;
            ratio[i] = t / m;
        }
        const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        if (slope <= 1.0 - 0.05) {
            sup_ = {DomainSup::Kind::infinite, std::numeric_limits<double>::infinity()};
        } else if (slope >= 1.0 + 0.05) {
            const double x_hi = xs_.back();
            const double tail = x_hi / (mu(x_hi) * (slope - 1.0));
            sup_ = {DomainSup::Kind::finite, ys_.back() + tail};
        } else {
            // ambiguous band: a harmonic ratio t/mu with a positive limit
            // means divergence; a consistently falling ratio stays ambiguous
            bool falling = true;
            for (int i = 1; i < n; ++i)
                if (ratio[i] >= ratio[i - 1] * (1.0 - 1e-3)) falling = false;
            if (!falling && ratio.back() >= 0.5 * ratio.front()) {
                sup_ = {DomainSup::Kind::infinite, std::numeric_limits<double>::infinity()};
            } else {
                sup_ = {DomainSup::Kind::inconclusive, std::numeric_limits<double>::quiet_NaN()};
            }
        }
    }

    void classify_lower_end() {
        if (first_finite_ > 0) {
            lower_divergent_ = true;
            lower_threshold_ = xs_[first_finite_ == xs_.size() ? xs_.size() - 1 : first_finite_];
            lower_limit_ = -std::numeric_limits<double>::infinity();
            return;
        }
        double lam = 0.0;
        const bool ok =
            quad::estimate_power_exponent([this](double t) { return mu(t); }, lam, 1e-13, 1e-18);
        if (!ok || lam >= 1.0 - 1e-9) {
            lower_divergent_ = true;
            lower_threshold_ = 0.0;
            lower_limit_ = -std::numeric_limits<double>::infinity();
            return;
        }
        lower_divergent_ = false;
        lower_threshold_ = 0.0;
        lower_limit_ = ys_.front() - quad::integrate_from_zero(
                                         [this](double t) { return inv_mu(t); }, xs_.front(),
                                         -lam, 1e-12);
    }

    double omega_locked(double x) const {
        if (lower_divergent_ && x <= lower_threshold_)
            return -std::numeric_limits<double>::infinity();
        if (x > xs_.back()) grow_to(x);
        if (x < xs_.front())
            return ys_.front() - quad::integrate([this](double t) { return inv_mu(t); }, x,
                                                 xs_.front(), 1e-12);
        const std::size_t i = knot_below(x);
        if (!std::isfinite(ys_[i])) {
            // between the -inf zone and the first finite knot
            const std::size_t f = first_finite_;
            const double v = ys_[f] - quad::integrate([this](double t) { return inv_mu(t); }, x,
                                                      xs_[f], 1e-12);
            return v;
        }
        return ys_[i] + segment_part(xs_[i], x);
    }

    double segment_part(double a, double x) const {
        if (a == x) return 0.0;
        return quad::integrate([this](double t) { return inv_mu(t); }, a, x, 1e-12);
    }

    std::size_t knot_below(double x) const {
        std::size_t lo = 0, hi = xs_.size() - 1;
        while (hi - lo > 1) {
            const std::size_t mid = (lo + hi) / 2;
            (xs_[mid] <= x ? lo : hi) = mid;
        }
        return lo;
    }

    void grow_to(double x) const {
        const double up_ratio = std::pow(kXMax0, 1.0 / static_cast<double>(kHalfKnots));
        while (xs_.back() < x) {
            if (xs_.back() > 1e280)
                throw OutOfDomainError("Omega table growth exceeded representable range");
            const double nx = xs_.back() * up_ratio;
            const double ny = ys_.back() + segment_integral(xs_.back(), nx);
            xs_.push_back(nx);
            ys_.push_back(ny);
        }
    }

    double invert_locked(double y) const {
        // ensure the table covers y from above
        while (ys_.back() < y) {
            if (sup_.kind == DomainSup::Kind::finite && ys_.back() > sup_.value)
                break;
            grow_to(xs_.back() * 4.0);
        }
        // bracket on the finite part of the table
        std::size_t lo = first_finite_, hi = ys_.size() - 1;
        if (y <= ys_[lo]) {
            // below the first finite knot: bracket (threshold side, xs_[lo]]
            double xb = xs_[lo];
            double xa = lower_divergent_ && lower_threshold_ > 0.0 ? lower_threshold_ : xb * 1e-6;
            double ya = omega_unsafe(xa);
            int guard = 0;
            while (ya > y && guard++ < 2000) {
                if (lower_divergent_ && lower_threshold_ > 0.0)
                    xa = lower_threshold_ + (xa - lower_threshold_) * 0.25;
                else
                    xa *= 1e-3;
                if (xa <= 1e-300) return 0.0;
                ya = omega_unsafe(xa);
            }
            return refine(xa, xb, y);
        }
        while (hi - lo > 1) {
            const std::size_t mid = (lo + hi) / 2;
            (ys_[mid] <= y ? lo : hi) = mid;
        }
        return refine(xs_[lo], xs_[hi], y);
    }

    double omega_unsafe(double x) const { return omega_locked(x); }

    double refine(double xa, double xb, double y) const {
        double fa = omega_unsafe(xa) - y;
        double fb = omega_unsafe(xb) - y;
        if (fa > 0.0) return xa;
        if (fb < 0.0) return xb;
        double x = 0.5 * (xa + xb);
        const double tol = 1e-9 * std::max(1.0, std::fabs(y));
        for (int it = 0; it < 200; ++it) {
            const double f = omega_unsafe(x) - y;
            if (std::fabs(f) <= tol) return x;
            if (f < 0.0) xa = x; else xb = x;
            // Newton step (Omega' = 1/mu), clipped to the bracket
            const double m = mu(x);
            double xn = x - f * m;
            if (!(xn > xa && xn < xb)) xn = 0.5 * (xa + xb);
            x = xn;
            if (xb - xa <= 1e-15 * xb) return x;
        }
        return x;
    }
};

} // namespace fracbound

#endif
