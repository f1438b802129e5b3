#ifndef FRACBOUND_BOUNDS_HPP
#define FRACBOUND_BOUNDS_HPP

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "fracbound/error.hpp"
#include "fracbound/expr.hpp"
#include "fracbound/omega.hpp"
#include "fracbound/quadrature.hpp"

namespace fracbound::bounds {

/// Parameter set of one integral inequality.
struct InequalityProblem {
    expr::Expr a;     // nonnegative, nondecreasing (t)
    expr::Expr b;     // nonnegative, nondecreasing (t)
    expr::Expr l;     // nonnegative on (0,T)
    expr::Expr omega; // nondecreasing, nonnegative (u)
    double p = 2.0;
    double beta = std::numeric_limits<double>::quiet_NaN();
    double alpha = 0.0;
    double delta = 0.0;
    double gamma = std::numeric_limits<double>::quiet_NaN();
    double T = 1.0;
};

/// Evaluable upper bound with validity horizon and provenance.
/// weight_exponent w records the weighted space of the derivation: the
/// weighted inner value is t^w B(t).
struct BoundCurve {
    std::function<double(double)> evaluate; // raw bound on (0, T1]
    double T1 = 0.0;
    std::string theorem_tag;
    double weight_exponent = 0.0;
    std::vector<std::string> notes;
};

enum class OmegaPath { automatic, closed, numeric };

namespace detail {

inline double pref(double p) { return std::pow(2.0, 1.0 - 1.0 / p); }

/// Omega/Omega^{-1} behind the bounds: a closed form when omega is a power
/// law (mu(t) = M t^g), the numeric OmegaTransform otherwise.
struct OmegaEngine {
    bool closed = false;
    double M = 1.0, g = 1.0; // mu(t) = M t^g
    std::shared_ptr<OmegaTransform> numeric;

    double sup() const {
        if (!closed) {
            const auto s = numeric->domain_sup();
            if (s.kind == DomainSup::Kind::inconclusive)
                throw DomainError("domain supremum of Omega is inconclusive "
                                  "(tail exponent too close to 1)");
            return s.kind == DomainSup::Kind::finite
                       ? s.value
                       : std::numeric_limits<double>::infinity();
        }
        if (g > 1.0) return 1.0 / (M * (g - 1.0));
        return std::numeric_limits<double>::infinity();
    }

    double lower_limit() const {
        if (!closed) return numeric->lower_limit();
        if (g < 1.0) return -1.0 / (M * (1.0 - g));
        return -std::numeric_limits<double>::infinity();
    }

    bool lower_divergent() const {
        if (!closed) return numeric->lower_divergent();
        return g >= 1.0;
    }

    double Omega(double x) const {
        if (x <= 0.0) return lower_limit();
        if (!closed) return numeric->Omega(x);
        if (g == 1.0) return std::log(x) / M;
        return (std::pow(x, 1.0 - g) - 1.0) / (M * (1.0 - g));
    }

    double Omega_inv(double y) const {
        if (!closed) return numeric->Omega_inv(y);
        if (g == 1.0) return std::exp(M * y);
        const double base = 1.0 + M * (1.0 - g) * y;
        if (g > 1.0 && base <= 0.0)
            throw OutOfDomainError("Omega_inv: argument at or above the domain supremum");
        if (g < 1.0 && base <= 0.0) return 0.0; // continuous extension below the range
        return std::pow(base, 1.0 / (1.0 - g));
    }
};

inline OmegaEngine make_engine(const expr::Expr& omega, double p, PowerMode mode,
                               OmegaPath path, std::vector<std::string>& notes) {
    OmegaEngine e;
    double coeff = 0.0, expo = 0.0;
    const bool power = expr::power_law_form(omega, coeff, expo);
    if (path != OmegaPath::numeric && power && coeff > 0.0 && expo >= 0.0) {
        e.closed = true;
        const double c = std::pow(2.0, 1.0 - 1.0 / p);
        if (mode == PowerMode::plain) {
            e.M = coeff * std::pow(c, expo);
            e.g = expo / p;
        } else {
            e.M = std::pow(coeff, p) * std::pow(c, expo * p);
            e.g = expo;
        }
        notes.push_back("closed-form omega path (mu = M t^g, M = " + std::to_string(e.M) +
                        ", g = " + std::to_string(e.g) + ")");
        return e;
    }
    if (path == OmegaPath::closed)
        throw DomainError("closed-form omega path requested but omega is not a power law");
    e.closed = false;
    e.numeric = std::make_shared<OmegaTransform>(omega, p, mode);
    notes.push_back("numeric omega path");
    return e;
}

inline void check_monotone_nonneg(const expr::Expr& f, double T, const char* name) {
    double prev = -std::numeric_limits<double>::infinity();
    for (int i = 1; i <= 256; ++i) {
        const double t = T * std::pow(i / 256.0, 2.0);
        const double v = f(t);
        if (v < -1e-12 * std::max(1.0, std::fabs(v)))
            throw DomainError(std::string(name) + " must be nonnegative");
        if (v < prev - 1e-12 * std::max(1.0, std::fabs(prev)))
            throw DomainError(std::string(name) + " must be nondecreasing");
        prev = std::max(prev, v);
    }
}

inline void check_nonneg(const expr::Expr& f, double T, const char* name) {
    for (int i = 1; i <= 128; ++i) {
        const double t = T * std::pow(i / 128.0, 3.0);
        if (f(t) < 0.0) throw DomainError(std::string(name) + " must be nonnegative");
    }
}

inline double constant_of(const expr::Expr& e, const char* name) {
    double v;
    if (!expr::constant_value(e, v))
        throw DomainError(std::string(name) + " must be a constant for this theorem");
    return v;
}

/// lambda exponent of l near 0 (0 when l vanishes near 0).
inline double l_exponent(const expr::Expr& l) {
    double lam = 0.0;
    if (!quad::estimate_power_exponent([&](double s) { return l(s); }, lam)) lam = 0.0;
    return std::min(lam, 0.0);
}

struct Inner {
    std::function<double(double)> integrand;
    double lambda; // exponent at 0, must be > -1

    double operator()(double t) const {
        return quad::integrate_from_zero(integrand, t, lambda, 1e-11);
    }
};

inline Inner make_inner(const expr::Expr& l, double power, double extra_weight,
                        const char* what) {
    // integrand s^{extra_weight} l(s)^power
    const double lam_l = l_exponent(l);
    const double lam = extra_weight + power * lam_l;
    if (!(lam > -1.0 + 1e-9))
        throw IntegrabilityError(std::string(what) +
                                 ": inner integrand has non-integrable exponent " +
                                 std::to_string(lam) + " at 0");
    expr::Expr lc = l;
    if (extra_weight == 0.0 && power == 1.0)
        return {[lc](double s) { return lc(s); }, lam};
    // computed through logs: s^{extra_weight} l(s)^{power} can overflow in
    // pieces (l(s)^p alone) long before the product does
    return {[lc, power, extra_weight](double s) {
                const double ls = lc(s);
                if (ls <= 0.0) return 0.0;
                return std::exp(extra_weight * std::log(s) + power * std::log(ls));
            },
            lam};
}

/// Largest T1 <= T with g(T1) < sup, to relative 1e-6. g must be
/// nondecreasing. Throws HorizonCollapse when even g(T * 1e-12) >= sup.
inline double horizon(const std::function<double(double)>& g, double sup, double T) {
    if (std::isinf(sup)) return T;
    if (g(T) < sup) return T;
    double lo = T * 1e-12;
    if (g(lo) >= sup)
        throw HorizonCollapse("the Omega-argument exits Dom(Omega^{-1}) for all t > 0");
    double hi = T;
    while (hi - lo > 1e-6 * hi) {
        const double mid = 0.5 * (lo + hi);
        (g(mid) < sup ? lo : hi) = mid;
    }
    return lo;
}

inline void note_zero_data(const expr::Expr& a, const expr::Expr& omega, const OmegaEngine& e,
                           double T, std::vector<std::string>& notes) {
    double av;
    const bool a_const = expr::constant_value(a, av);
    const bool a_zero = a_const ? av == 0.0 : a(T * 1e-9) == 0.0;
    if (a_zero && omega.at_u(0.0) == 0.0) {
        notes.push_back(e.lower_divergent()
                            ? "lower-divergence convention in use (a = 0, omega(0) = 0)"
                            : "Omega(0) evaluated at its finite lower limit (a = 0)");
    }
}

} // namespace detail

/// Bound of the plain-power inequality u <= a + b (int_0^t l omega(u))^{1/p}:
///   B(t) = 2^{1-1/p} ( Omega^{-1}( Omega(a^p(t)) + b^p(t) int_0^t l ) )^{1/p}
inline BoundCurve thm21_bound(const InequalityProblem& prob,
                              OmegaPath path = OmegaPath::automatic) {
    if (!(prob.p >= 1.0)) throw DomainError("thm21_bound requires p >= 1");
    detail::check_monotone_nonneg(prob.a, prob.T, "a");
    detail::check_monotone_nonneg(prob.b, prob.T, "b");
    detail::check_nonneg(prob.l, prob.T, "l");

    BoundCurve out;
    out.theorem_tag = "thm-2.1";
    out.weight_exponent = 0.0;
    auto engine = detail::make_engine(prob.omega, prob.p, PowerMode::plain, path, out.notes);
    auto inner = detail::make_inner(prob.l, 1.0, 0.0, "thm21_bound");
    const auto a = prob.a;
    const auto b = prob.b;
    const double p = prob.p;

    auto gfun = [engine, inner, a, b, p](double t) {
        return engine.Omega(std::pow(a(t), p)) + std::pow(b(t), p) * inner(t);
    };
    detail::note_zero_data(prob.a, prob.omega, engine, prob.T, out.notes);
    out.T1 = detail::horizon(gfun, engine.sup(), prob.T);
    const double pf = detail::pref(p);
    out.evaluate = [engine, gfun, p, pf](double t) {
        return pf * std::pow(engine.Omega_inv(gfun(t)), 1.0 / p);
    };
    return out;
}

/// Closed forms for omega(u) = u^{p gamma} in the plain-power inequality.
inline BoundCurve cor22_bound(const InequalityProblem& prob) {
    if (!(prob.p >= 1.0)) throw DomainError("cor22_bound requires p >= 1");
    if (!(prob.gamma > 0.0 && prob.gamma <= 1.0))
        throw DomainError("cor22_bound requires gamma in (0,1]");
    detail::check_monotone_nonneg(prob.a, prob.T, "a");
    detail::check_monotone_nonneg(prob.b, prob.T, "b");
    detail::check_nonneg(prob.l, prob.T, "l");

    BoundCurve out;
    out.theorem_tag = "cor-2.2";
    out.weight_exponent = 0.0;
    out.T1 = prob.T;
    auto inner = detail::make_inner(prob.l, 1.0, 0.0, "cor22_bound");
    const auto a = prob.a;
    const auto b = prob.b;
    const double p = prob.p, gam = prob.gamma;
    const double pf = detail::pref(p);
    if (gam == 1.0) {
        out.evaluate = [a, b, inner, p, pf](double t) {
            return pf * a(t) *
                   std::exp(std::pow(2.0, p - 1.0) * std::pow(b(t), p) / p * inner(t));
        };
    } else {
        out.evaluate = [a, b, inner, p, gam, pf](double t) {
            const double body = std::pow(a(t), p * (1.0 - gam)) +
                                (1.0 - gam) * std::pow(2.0, (p - 1.0) * gam) *
                                    std::pow(b(t), p) * inner(t);
            return pf * std::pow(body, 1.0 / (p * (1.0 - gam)));
        };
    }
    return out;
}

/// Bound of the weakly singular inequality
/// u <= a(t) + b(t) int_0^t (t-s)^{beta-1} l(s) omega(u(s)) ds.
inline BoundCurve thm23_bound(const InequalityProblem& prob,
                              OmegaPath path = OmegaPath::automatic) {
    const double beta = prob.beta, p = prob.p;
    if (!(beta > 0.0 && beta < 1.0)) throw DomainError("thm23_bound requires beta in (0,1)");
    if (!(p > 1.0 / beta)) throw DomainError("requires p > 1/beta");
    detail::check_monotone_nonneg(prob.a, prob.T, "a");
    detail::check_monotone_nonneg(prob.b, prob.T, "b");
    detail::check_nonneg(prob.l, prob.T, "l");
    const double q = p / (p - 1.0);

    BoundCurve out;
    out.theorem_tag = "thm-2.3";
    out.weight_exponent = 0.0;
    auto engine = detail::make_engine(prob.omega, p, PowerMode::pth, path, out.notes);
    auto inner = detail::make_inner(prob.l, p, 0.0, "thm23_bound");
    const auto a = prob.a;
    const auto b = prob.b;
    const double cq = std::pow(q * (beta - 1.0) + 1.0, 1.0 / q);
    const double ce = beta - 1.0 + 1.0 / q;

    auto gfun = [engine, inner, a, b, p, cq, ce](double t) {
        const double c = std::pow(t, ce) * b(t) / cq;
        return engine.Omega(std::pow(a(t), p)) + std::pow(c, p) * inner(t);
    };
    detail::note_zero_data(prob.a, prob.omega, engine, prob.T, out.notes);
    out.T1 = detail::horizon(gfun, engine.sup(), prob.T);
    const double pf = detail::pref(p);
    out.evaluate = [engine, gfun, p, pf](double t) {
        return pf * std::pow(engine.Omega_inv(gfun(t)), 1.0 / p);
    };
    return out;
}

/// Bound of u <= a t^{-alpha} + b t^{-delta} int_0^t (t-s)^{beta-1} f(s,u) ds
/// under |f(t,x)| <= l(t) omega(t^alpha |x|); a, b constants.
inline BoundCurve thm24_bound(const InequalityProblem& prob,
                              OmegaPath path = OmegaPath::automatic) {
    const double beta = prob.beta, p = prob.p;
    const double alpha = prob.alpha, delta = prob.delta;
    if (!(beta > 0.0 && beta < 1.0)) throw DomainError("thm24_bound requires beta in (0,1)");
    if (!(p > 1.0 / beta)) throw DomainError("requires p > 1/beta");
    if (!(alpha > delta && delta >= 0.0)) throw DomainError("requires alpha > delta >= 0");
    const double a = detail::constant_of(prob.a, "a");
    const double b = detail::constant_of(prob.b, "b");
    if (a < 0.0 || b < 0.0) throw DomainError("a, b must be nonnegative");
    detail::check_nonneg(prob.l, prob.T, "l");
    const double q = p / (p - 1.0);

    BoundCurve out;
    out.theorem_tag = "thm-2.4";
    out.weight_exponent = alpha;
    auto engine = detail::make_engine(prob.omega, p, PowerMode::pth, path, out.notes);
    auto inner = detail::make_inner(prob.l, p, 0.0, "thm24_bound");
    const double cq = std::pow(q * (beta - 1.0) + 1.0, 1.0 / q);
    const double ce = alpha - delta + beta - 1.0 + 1.0 / q;
    const double omega_a = engine.Omega(std::pow(a, p));

    auto gfun = [engine, inner, b, p, cq, ce, omega_a](double t) {
        const double c = b * std::pow(t, ce) / cq;
        return omega_a + std::pow(c, p) * inner(t);
    };
    detail::note_zero_data(prob.a, prob.omega, engine, prob.T, out.notes);
    out.T1 = detail::horizon(gfun, engine.sup(), prob.T);
    const double pf = detail::pref(p);
    out.evaluate = [engine, gfun, p, pf, alpha](double t) {
        return pf * std::pow(t, -alpha) * std::pow(engine.Omega_inv(gfun(t)), 1.0 / p);
    };
    return out;
}

/// Bound of u <= a t^{beta-1} + b(t) int_0^t (t-s)^{beta-1} f(s,u) ds under
/// |f(t,x)| <= l(t) omega(t^{1-beta} |x|); the weaker membership
/// t^{1-beta} l in L^p near 0 suffices.
inline BoundCurve thm25_bound(const InequalityProblem& prob,
                              OmegaPath path = OmegaPath::automatic) {
    const double beta = prob.beta, p = prob.p;
    if (!(beta > 0.0 && beta < 1.0)) throw DomainError("thm25_bound requires beta in (0,1)");
    if (!(p > 1.0 / beta)) throw DomainError("requires p > 1/beta");
    const double a = detail::constant_of(prob.a, "a");
    if (a < 0.0) throw DomainError("a must be nonnegative");
    detail::check_monotone_nonneg(prob.b, prob.T, "b");
    detail::check_nonneg(prob.l, prob.T, "l");
    const double q = p / (p - 1.0);

    BoundCurve out;
    out.theorem_tag = "thm-2.5";
    out.weight_exponent = 1.0 - beta;
    auto engine = detail::make_engine(prob.omega, p, PowerMode::pth, path, out.notes);
    auto inner = detail::make_inner(prob.l, p, p * (1.0 - beta), "thm25_bound");
    const auto b = prob.b;
    const double cq = std::pow(q * beta - q + 1.0, 1.0 / q);
    const double ce = beta - 1.0 + 1.0 / q;
    const double c2 = std::pow(2.0, 1.0 / q);
    const double omega_a = engine.Omega(std::pow(a, p));

    auto gfun = [engine, inner, b, p, cq, ce, c2, omega_a](double t) {
        const double c = c2 * b(t) * std::pow(t, ce) / cq;
        return omega_a + std::pow(c, p) * inner(t);
    };
    detail::note_zero_data(prob.a, prob.omega, engine, prob.T, out.notes);
    out.T1 = detail::horizon(gfun, engine.sup(), prob.T);
    const double pf = detail::pref(p);
    out.evaluate = [engine, gfun, p, pf, beta](double t) {
        return pf * std::pow(t, beta - 1.0) * std::pow(engine.Omega_inv(gfun(t)), 1.0 / p);
    };
    return out;
}

/// Closed forms for omega(u) = u^gamma in the weakly singular inequality
/// u <= a t^{beta-1} + b(t) int_0^t (t-s)^{beta-1} l(s) u^gamma(s) ds.
inline BoundCurve cor26_bound(const InequalityProblem& prob) {
    const double beta = prob.beta, p = prob.p, gam = prob.gamma;
    if (!(beta > 0.0 && beta < 1.0)) throw DomainError("cor26_bound requires beta in (0,1)");
    if (!(p > 1.0 / beta)) throw DomainError("requires p > 1/beta");
    if (!(gam > 0.0 && gam <= 1.0)) throw DomainError("cor26_bound requires gamma in (0,1]");
    const double a = detail::constant_of(prob.a, "a");
    if (a < 0.0) throw DomainError("a must be nonnegative");
    detail::check_monotone_nonneg(prob.b, prob.T, "b");
    detail::check_nonneg(prob.l, prob.T, "l");
    const double q = p / (p - 1.0);

    BoundCurve out;
    out.theorem_tag = "cor-2.6";
    out.weight_exponent = 1.0 - beta;
    out.T1 = prob.T;
    const auto b = prob.b;
    const double cq = std::pow(q * beta - q + 1.0, 1.0 / q);
    const double ce = beta - 1.0 + 1.0 / q;
    const double c2 = std::pow(2.0, 1.0 / q);
    const double pf = detail::pref(p);
    auto cfun = [b, cq, ce, c2](double t) { return c2 * b(t) * std::pow(t, ce) / cq; };

    if (gam == 1.0) {
        auto inner = detail::make_inner(prob.l, p, 0.0, "cor26_bound");
        out.evaluate = [a, cfun, inner, p, pf, beta](double t) {
            const double cp = std::pow(cfun(t), p);
            return pf * a * std::pow(t, beta - 1.0) *
                   std::exp(std::pow(2.0, p - 1.0) * cp / p * inner(t));
        };
    } else {
        auto inner =
            detail::make_inner(prob.l, p, p * (1.0 - gam) * (1.0 - beta), "cor26_bound");
        out.evaluate = [a, cfun, inner, p, gam, pf, beta](double t) {
            const double cp = std::pow(cfun(t), p);
            const double body = std::pow(a, p * (1.0 - gam)) +
                                (1.0 - gam) * std::pow(2.0, (p - 1.0) * gam) * cp * inner(t);
            return pf * std::pow(t, beta - 1.0) * std::pow(body, 1.0 / (p * (1.0 - gam)));
        };
    }
    return out;
}

/// Dispatch by theorem tag ("2.1", "2.2", "2.3", "2.4", "2.5", "2.6").
inline BoundCurve bound_for(const std::string& theorem, const InequalityProblem& prob,
                            OmegaPath path = OmegaPath::automatic) {
    if (theorem == "2.1") return thm21_bound(prob, path);
    if (theorem == "2.2") return cor22_bound(prob);
    if (theorem == "2.3") return thm23_bound(prob, path);
    if (theorem == "2.4") return thm24_bound(prob, path);
    if (theorem == "2.5") return thm25_bound(prob, path);
    if (theorem == "2.6") return cor26_bound(prob);
    throw ConfigError("unknown theorem '" + theorem + "' (expected 2.1 .. 2.6)");
}

} // namespace fracbound::bounds

#endif
