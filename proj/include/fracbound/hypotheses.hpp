#ifndef FRACBOUND_HYPOTHESES_HPP
#define FRACBOUND_HYPOTHESES_HPP

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "fracbound/error.hpp"
#include "fracbound/expr.hpp"
#include "fracbound/quadrature.hpp"

namespace fracbound::hypotheses {

enum class Verdict { pass, fail, inconclusive };

inline const char* to_string(Verdict v) {
    switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    default: return "inconclusive";
    }
}

struct Check {
    std::string name;
    Verdict verdict;
    std::string evidence;
};

struct HypothesisReport {
    std::string theorem_tag;
    std::vector<Check> checks;
    std::optional<std::pair<double, double>> admissible_p; // open interval (lo, hi)

    Verdict overall() const {
        bool inconclusive = false;
        for (const auto& c : checks) {
            if (c.verdict == Verdict::fail) return Verdict::fail;
            if (c.verdict == Verdict::inconclusive) inconclusive = true;
        }
        return inconclusive ? Verdict::inconclusive : Verdict::pass;
    }
};

struct SampleBox {
    double t_lo = 1e-6;
    double t_hi = 10.0;
    double x_lo = 0.0;
    double x_hi = 100.0;
    int nt = 64;
    int nx = 64;
};

struct LpLocResult {
    Verdict verdict;
    double exponent;             // estimated (or declared) power exponent near 0
    double p_max;                // -1/exponent for exponent < 0, +inf otherwise
    bool identically_zero = false;
};

namespace detail {

inline std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

} // namespace detail

/// L^p_Loc[0, .) membership of g near 0: estimates the power exponent lambda
/// by log-log least squares (window starting at [1e-8, 1e-3], shifted toward
/// 0 until the slope stabilizes), then tests p*lambda > -1 with a 0.02
/// margin band yielding `inconclusive`. A declared exponent overrides the
/// regression.
inline LpLocResult lp_loc_membership(const std::function<double(double)>& g, double p,
                                     std::optional<double> declared_exponent = {}) {
    LpLocResult res{Verdict::pass, 0.0, std::numeric_limits<double>::infinity(), false};
    if (declared_exponent) {
        res.exponent = *declared_exponent;
    } else {
        double lam = 0.0;
        if (!quad::estimate_power_exponent(g, lam)) {
            res.identically_zero = true;
            res.exponent = 0.0;
            return res; // zero function is in every L^p
        }
        res.exponent = lam;
    }
    if (res.exponent < 0.0) res.p_max = -1.0 / res.exponent;
    const double margin = p * res.exponent + 1.0;
    if (margin >= 0.02)
        res.verdict = Verdict::pass;
    else if (margin <= -0.02)
        res.verdict = Verdict::fail;
    else
        res.verdict = Verdict::inconclusive;
    return res;
}

inline LpLocResult lp_loc_membership(const expr::Expr& g, double p,
                                     std::optional<double> declared_exponent = {}) {
    return lp_loc_membership([g](double t) { return g(t); }, p, declared_exponent);
}

/// Limit of t / omega(t) as t -> +inf, from probes at 1e3..1e6:
/// a finite positive value, +inf when the ratio keeps growing, or
/// inconclusive when the drift is non-monotone beyond 20%.
struct RatioK {
    Verdict verdict;
    double value; // +inf allowed
    std::string evidence;
};

inline RatioK asymptotic_ratio_k(const expr::Expr& omega) {
    const double probes[4] = {1e3, 1e4, 1e5, 1e6};
    double r[4];
    for (int i = 0; i < 4; ++i) {
        const double w = omega.at_u(probes[i]);
        if (!(w > 0.0))
            return {Verdict::fail, 0.0, "omega is not positive at t = " + detail::fmt(probes[i])};
        r[i] = probes[i] / w;
    }
    // slope of ln r vs ln t
    const double slope = std::log(r[3] / r[0]) / std::log(probes[3] / probes[0]);
    if (slope > 0.15)
        return {Verdict::pass, std::numeric_limits<double>::infinity(),
                "ratio t/omega grows like t^" + detail::fmt(slope) + "; K = +inf"};
    bool monotone_up = r[0] <= r[1] * 1.001 && r[1] <= r[2] * 1.001 && r[2] <= r[3] * 1.001;
    bool monotone_down = r[0] >= r[1] * 0.999 && r[1] >= r[2] * 0.999 && r[2] >= r[3] * 0.999;
    const double drift = std::fabs(r[3] - r[2]) / std::max(1e-300, std::fabs(r[3]));
    if (!monotone_up && !monotone_down && drift > 0.20)
        return {Verdict::inconclusive, r[3],
                "ratio t/omega drifts non-monotonically; last value " + detail::fmt(r[3])};
    if (!(r[3] > 0.0))
        return {Verdict::fail, 0.0, "t/omega tends to 0 (omega grows superlinearly)"};
    return {Verdict::pass, r[3], "K ~= " + detail::fmt(r[3])};
}

/// Pointwise envelope |f(t,x)| <= l(t) omega(t^{1-beta} |x|) on a sample box.
/// Evaluation failures at sample points are skipped and counted.
inline Check envelope_check(const expr::Expr& f, const expr::Expr& l, const expr::Expr& omega,
                            double beta, const SampleBox& box = {}) {
    Check out{"envelope |f| <= l omega(t^{1-beta}|x|)", Verdict::pass, ""};
    int skipped = 0;
    double worst = 0.0, worst_t = 0.0, worst_x = 0.0;
    for (int i = 0; i < box.nt; ++i) {
        const double t =
            box.t_lo * std::pow(box.t_hi / box.t_lo, i / static_cast<double>(box.nt - 1));
        for (int j = 0; j < box.nx; ++j) {
            const double x =
                box.x_lo + (box.x_hi - box.x_lo) * j / static_cast<double>(box.nx - 1);
            try {
                const double lhs = std::fabs(f(t, x));
                const double rhs =
                    l(t) * omega.at_u(std::pow(t, 1.0 - beta) * std::fabs(x));
                const double excess = lhs - rhs * (1.0 + 1e-9);
                if (excess > worst) {
                    worst = excess;
                    worst_t = t;
                    worst_x = x;
                }
            } catch (const EvalError&) {
                ++skipped;
            }
        }
    }
    if (worst > 0.0) {
        out.verdict = Verdict::fail;
        out.evidence = "violated at (t, x) = (" + detail::fmt(worst_t) + ", " +
                       detail::fmt(worst_x) + ") by " + detail::fmt(worst);
    } else {
        out.evidence = "holds on the sample box";
    }
    if (skipped > 0) out.evidence += " [" + std::to_string(skipped) + " samples skipped]";
    return out;
}

/// Pointwise envelope |f(t,x)| <= l(t)|x|^gamma + k(t) (the power form).
inline Check power_envelope_check(const expr::Expr& f, const expr::Expr& l,
                                  const expr::Expr& k, double gamma,
                                  const SampleBox& box = {}) {
    Check out{"envelope |f| <= l |x|^gamma + k", Verdict::pass, ""};
    int skipped = 0;
    double worst = 0.0, worst_t = 0.0, worst_x = 0.0;
    for (int i = 0; i < box.nt; ++i) {
        const double t =
            box.t_lo * std::pow(box.t_hi / box.t_lo, i / static_cast<double>(box.nt - 1));
        for (int j = 0; j < box.nx; ++j) {
            const double x =
                box.x_lo + (box.x_hi - box.x_lo) * j / static_cast<double>(box.nx - 1);
            try {
                const double lhs = std::fabs(f(t, x));
                const double rhs = l(t) * std::pow(std::fabs(x), gamma) + k(t);
                const double excess = lhs - rhs * (1.0 + 1e-9);
                if (excess > worst) {
                    worst = excess;
                    worst_t = t;
                    worst_x = x;
                }
            } catch (const EvalError&) {
                ++skipped;
            }
        }
    }
    if (worst > 0.0) {
        out.verdict = Verdict::fail;
        out.evidence = "violated at (t, x) = (" + detail::fmt(worst_t) + ", " +
                       detail::fmt(worst_x) + ") by " + detail::fmt(worst);
    } else {
        out.evidence = "holds on the sample box";
    }
    if (skipped > 0) out.evidence += " [" + std::to_string(skipped) + " samples skipped]";
    return out;
}

namespace detail {

struct PConstraint {
    std::string name;
    LpLocResult lp;
};

inline void fill_interval(HypothesisReport& rep, double beta,
                          const std::vector<PConstraint>& constraints) {
    const double lo = 1.0 / beta;
    double hi = lo + 10.0; // search range (1/beta, 1/beta + 10]
    for (const auto& c : constraints) {
        Check chk{c.name, Verdict::pass, ""};
        if (c.lp.identically_zero) {
            chk.evidence = "identically zero near 0: in every L^p";
        } else if (c.lp.p_max == std::numeric_limits<double>::infinity()) {
            chk.evidence = "estimated exponent " + fmt(c.lp.exponent) +
                           "; no upper bound on p";
        } else {
            chk.evidence = "estimated exponent " + fmt(c.lp.exponent) +
                           "; requires p < " + fmt(c.lp.p_max);
            hi = std::min(hi, c.lp.p_max);
            // room above the forced lower endpoint 1/beta, with the margin
            // band mapping to `inconclusive`
            const double room = 1.0 - lo / c.lp.p_max;
            chk.verdict = room >= 0.02    ? Verdict::pass
                          : room <= -0.02 ? Verdict::fail
                                          : Verdict::inconclusive;
        }
        rep.checks.push_back(chk);
    }
    Check interval{"admissible p interval", Verdict::pass, ""};
    if (hi <= lo * (1.0 + 1e-9)) {
        interval.verdict = Verdict::fail;
        interval.evidence = "no p in (1/beta, 1/beta + 10] satisfies every membership "
                            "(upper endpoint " +
                            fmt(hi) + " <= lower endpoint " + fmt(lo) + ")";
        rep.checks.push_back(interval);
        return;
    }
    if (hi <= lo * (1.0 + 0.02)) interval.verdict = Verdict::inconclusive;
    rep.admissible_p = {lo, hi};
    interval.evidence = "p in (" + fmt(lo) + ", " + fmt(hi) + ")";
    rep.checks.push_back(interval);
}

} // namespace detail

/// Theorem 3.7 route: global existence hypotheses for
/// |f(t,x)| <= l(t) omega(t^{1-beta}|x|).
inline HypothesisReport thm37_check(const expr::Expr& f, const expr::Expr& l,
                                    const expr::Expr& omega, double beta,
                                    const SampleBox& box = {},
                                    std::optional<double> l_exponent = {}) {
    HypothesisReport rep;
    rep.theorem_tag = "thm-3.7";

    auto weighted_l = [l, beta](double t) { return std::pow(t, 1.0 - beta) * l(t); };
    const auto lp = lp_loc_membership(weighted_l, 1.0 / beta + 0.1, l_exponent);
    detail::fill_interval(rep, beta, {{"t^{1-beta} l in L^p_Loc", lp}});

    const auto K = asymptotic_ratio_k(omega);
    rep.checks.push_back({"lim t/omega(t) = K in (0, +inf]", K.verdict, K.evidence});
    rep.checks.push_back(envelope_check(f, l, omega, beta, box));
    return rep;
}

/// Corollary 3.8 route: |f(t,x)| <= l(t)|x|^gamma + k(t). Also assembles the
/// combined omega-form envelope l~(t) = t^{gamma(beta-1)} l(t) + k(t),
/// omega~(u) = u^gamma + 1 for downstream bound computations.
struct Cor38Result {
    HypothesisReport report;
    expr::Expr combined_l;
    expr::Expr combined_omega;
};

inline Cor38Result cor38_check(const expr::Expr& f, const expr::Expr& l, const expr::Expr& k,
                               double gamma, double beta, const SampleBox& box = {},
                               std::optional<double> l_exponent = {},
                               std::optional<double> k_exponent = {}) {
    Cor38Result out{{}, {}, {}};
    auto& rep = out.report;
    rep.theorem_tag = "cor-3.8";
    if (!(gamma > 0.0 && gamma <= 1.0)) {
        rep.checks.push_back({"gamma in (0,1]", Verdict::fail, "gamma = " + detail::fmt(gamma)});
        return out;
    }
    rep.checks.push_back({"gamma in (0,1]", Verdict::pass, "gamma = " + detail::fmt(gamma)});

    const double probe_p = 1.0 / beta + 0.1;
    auto wl = [l, gamma, beta](double t) {
        return std::pow(t, (1.0 - gamma) * (1.0 - beta)) * l(t);
    };
    auto wk = [k, beta](double t) { return std::pow(t, 1.0 - beta) * k(t); };
    const auto lp_l = lp_loc_membership(wl, probe_p, l_exponent);
    const auto lp_k = lp_loc_membership(wk, probe_p, k_exponent);
    detail::fill_interval(rep, beta,
                          {{"t^{(1-gamma)(1-beta)} l in L^p_Loc", lp_l},
                           {"t^{1-beta} k in L^p_Loc", lp_k}});

    rep.checks.push_back(power_envelope_check(f, l, k, gamma, box));

    // combined envelope per the omega form
    using namespace expr;
    out.combined_l = add(mul(power(variable('t'), gamma * (beta - 1.0)), l), k);
    out.combined_omega = add(power(variable('u'), gamma), constant(1.0));
    return out;
}

/// Theorem 3.10 route: Lipschitz condition |f(t,x)-f(t,y)| <= l(t)|x-y|
/// sampled over (t,x,y) triples, plus the weighted memberships of l and
/// |f(t,0)|.
inline HypothesisReport thm310_check(const expr::Expr& f, const expr::Expr& l, double beta,
                                     const SampleBox& box = {},
                                     std::optional<double> l_exponent = {},
                                     std::optional<double> f0_exponent = {}) {
    HypothesisReport rep;
    rep.theorem_tag = "thm-3.10";

    const double probe_p = 1.0 / beta + 0.1;
    auto wl = [l, beta](double t) { return std::pow(t, 1.0 - beta) * l(t); };
    auto wf0 = [f, beta](double t) { return std::pow(t, 1.0 - beta) * std::fabs(f(t, 0.0)); };
    const auto lp_l = lp_loc_membership(wl, probe_p, l_exponent);
    const auto lp_f0 = lp_loc_membership(wf0, probe_p, f0_exponent);
    detail::fill_interval(rep, beta,
                          {{"t^{1-beta} l in L^p_Loc", lp_l},
                           {"t^{1-beta} |f(t,0)| in L^p_Loc", lp_f0}});

    // Lipschitz quotient sampling over >= 64^3 triples
    Check lip{"|f(t,x)-f(t,y)| <= l(t) |x-y|", Verdict::pass, ""};
    int skipped = 0;
    double worst = 0.0, wt = 0, wx = 0, wy = 0;
    const int nt = box.nt, nx = box.nx;
    for (int i = 0; i < nt; ++i) {
        const double t =
            box.t_lo * std::pow(box.t_hi / box.t_lo, i / static_cast<double>(nt - 1));
        double lt;
        try {
            lt = l(t);
        } catch (const EvalError&) {
            ++skipped;
            continue;
        }
        for (int j = 0; j < nx; ++j) {
            const double x =
                box.x_lo + (box.x_hi - box.x_lo) * j / static_cast<double>(nx - 1);
            for (int m = 0; m < nx; ++m) {
                if (m == j) continue;
                const double y =
                    box.x_lo + (box.x_hi - box.x_lo) * m / static_cast<double>(nx - 1);
                try {
                    const double q = std::fabs(f(t, x) - f(t, y)) / std::fabs(x - y);
                    const double excess = q - lt * (1.0 + 1e-9);
                    if (excess > worst) {
                        worst = excess;
                        wt = t;
                        wx = x;
                        wy = y;
                    }
                } catch (const EvalError&) {
                    ++skipped;
                }
            }
        }
    }
    if (worst > 0.0) {
        lip.verdict = Verdict::fail;
        lip.evidence = "quotient exceeds l at (t, x, y) = (" + detail::fmt(wt) + ", " +
                       detail::fmt(wx) + ", " + detail::fmt(wy) + ") by " + detail::fmt(worst);
    } else {
        lip.evidence = "holds on the sample box";
    }
    if (skipped > 0) lip.evidence += " [" + std::to_string(skipped) + " samples skipped]";
    rep.checks.push_back(lip);
    return rep;
}

inline std::string report_to_text(const HypothesisReport& rep) {
    std::ostringstream os;
    os << "theorem: " << rep.theorem_tag << "\n";
    for (const auto& c : rep.checks)
        os << "  [" << to_string(c.verdict) << "] " << c.name << ": " << c.evidence << "\n";
    if (rep.admissible_p)
        os << "  admissible p: (" << detail::fmt(rep.admissible_p->first) << ", "
           << detail::fmt(rep.admissible_p->second) << ")\n";
    os << "overall: " << to_string(rep.overall()) << "\n";
    return os.str();
}

} // namespace fracbound::hypotheses

#endif
