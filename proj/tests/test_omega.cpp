#include <catch2/catch.hpp>

#include <cmath>
#include <limits>
#include <thread>

#include "fracbound/expr.hpp"
#include "fracbound/omega.hpp"

using namespace fracbound;

namespace {

OmegaTransform example28_transform() {
    return OmegaTransform(expr::parse("u^(1/2)", "u"), 2.0, PowerMode::pth);
}

} // namespace

TEST_CASE("mu in both power modes", "[omega]") {
    // Example 2.8: omega = u^{1/2}, p = 2, p-th mode: mu(t) = 2^{1/2} t^{1/2}
    auto tr = example28_transform();
    CHECK(tr.mu(4.0) == Approx(2.0 * std::sqrt(2.0)).epsilon(1e-13));

    OmegaTransform id(expr::parse("u", "u"), 1.0, PowerMode::plain);
    CHECK(id.mu(3.0) == Approx(3.0).epsilon(1e-13));

    OmegaTransform sq(expr::parse("u", "u"), 2.0, PowerMode::pth);
    CHECK(sq.mu(1.0) == Approx(2.0).epsilon(1e-13));

    CHECK_THROWS_AS(id.mu(0.0), DomainError);
}

TEST_CASE("Omega values", "[omega]") {
    OmegaTransform lntr(expr::parse("u", "u"), 1.0, PowerMode::plain); // Omega = ln
    CHECK(lntr.Omega(std::exp(1.0)) == Approx(1.0).epsilon(1e-9));
    CHECK(lntr.Omega(1.0) == 0.0);
    CHECK(lntr.Omega(0.5) == Approx(std::log(0.5)).epsilon(1e-9));

    auto tr = example28_transform(); // Omega(x) = sqrt(2)(sqrt(x) - 1)
    CHECK(tr.Omega(4.0) == Approx(std::sqrt(2.0)).epsilon(1e-9));
    CHECK(tr.Omega(1.0) == 0.0);
}

TEST_CASE("Omega inverse", "[omega]") {
    OmegaTransform lntr(expr::parse("u", "u"), 1.0, PowerMode::plain);
    CHECK(lntr.Omega_inv(0.0) == Approx(1.0).epsilon(1e-9));
    CHECK(lntr.Omega_inv(1.0) == Approx(std::exp(1.0)).epsilon(1e-8));

    auto tr = example28_transform();
    // closed-form oracle: Omega^{-1}(y) = (1 + y/sqrt(2))^2
    for (double y : {-1.0, 0.0, 0.5, std::sqrt(2.0), 4.0, 9.0}) {
        const double oracle = std::pow(1.0 + y / std::sqrt(2.0), 2.0);
        CHECK(tr.Omega_inv(y) == Approx(oracle).epsilon(1e-8));
    }
    for (double x : {0.1, 1.0, 7.0}) {
        CHECK(tr.Omega_inv(tr.Omega(x)) == Approx(x).epsilon(1e-8));
    }
}

TEST_CASE("Omega round trip over the sampled range", "[omega][property]") {
    auto tr = example28_transform();
    for (int i = 0; i < 100; ++i) {
        const double y = -1.2 + 12.0 * i / 99.0;
        const double x = tr.Omega_inv(y);
        CHECK(std::fabs(tr.Omega(x) - y) <= 1e-8 * std::max(1.0, std::fabs(y)));
    }
}

TEST_CASE("table is strictly increasing in both coordinates", "[omega]") {
    auto tr = example28_transform();
    const auto xs = tr.table_x();
    const auto ys = tr.table_y();
    REQUIRE(xs.size() == ys.size());
    for (std::size_t i = 1; i < xs.size(); ++i) {
        CHECK(xs[i] > xs[i - 1]);
        if (std::isfinite(ys[i - 1])) CHECK(ys[i] > ys[i - 1]);
    }
}

TEST_CASE("domain supremum classification", "[omega]") {
    OmegaTransform lntr(expr::parse("u", "u"), 1.0, PowerMode::plain);
    CHECK(lntr.domain_sup().is_infinite()); // Omega = ln

    // mu(t) = t^2: int_1^inf t^{-2} = 1
    OmegaTransform sq(expr::parse("u^2", "u"), 1.0, PowerMode::plain);
    auto sup = sq.domain_sup();
    REQUIRE(sup.kind == DomainSup::Kind::finite);
    CHECK(sup.value == Approx(1.0).epsilon(1e-6));
    CHECK_THROWS_AS(sq.Omega_inv(1.0), OutOfDomainError);
    CHECK_THROWS_AS(sq.Omega_inv(2.0), OutOfDomainError);

    // Example 3.12's omega: t/mu -> 2^{1-p} K^p with K = 1: divergent tail
    OmegaTransform ex312(expr::parse("u^(1/2)+u", "u"), 1.6, PowerMode::pth);
    CHECK(ex312.domain_sup().is_infinite());

    // near-critical exponent: the slope sits in the ambiguous band and the
    // harmonic ratio keeps falling
    OmegaTransform crit(expr::parse("u^1.02", "u"), 1.0, PowerMode::plain);
    CHECK(crit.domain_sup().kind == DomainSup::Kind::inconclusive);
}

TEST_CASE("asymptotic ratio matches 2^{1-p} K^p", "[omega][property]") {
    // omega = u (K = 1), p = 2, p-th mode: t/mu -> 2^{-1}
    OmegaTransform tr(expr::parse("u", "u"), 2.0, PowerMode::pth);
    const double t = 1e6;
    CHECK(t / tr.mu(t) == Approx(0.5).epsilon(0.10));

    OmegaTransform ex312(expr::parse("u^(1/2)+u", "u"), 1.6, PowerMode::pth);
    CHECK(t / ex312.mu(t) == Approx(std::pow(2.0, 1.0 - 1.6)).epsilon(0.10));
}

TEST_CASE("lower-divergence convention for omega vanishing near 0", "[omega]") {
    // omega(u) = max(u - 1/2, 0): mu vanishes on (0, 1/2] in plain mode p=1
    OmegaTransform tr(expr::parse("max(u-1/2, 0)", "u"), 1.0, PowerMode::plain);
    CHECK(tr.lower_divergent());
    CHECK(tr.lower_limit() == -std::numeric_limits<double>::infinity());
    CHECK(tr.Omega(0.4) == -std::numeric_limits<double>::infinity());
    CHECK(std::isfinite(tr.Omega(0.7)));
    CHECK(tr.Omega_inv(tr.Omega(0.7)) == Approx(0.7).epsilon(1e-7));
    // Omega_inv never returns values at or below the threshold
    CHECK(tr.Omega_inv(-1e6) >= 0.5);

    // omega = u has a divergent lower integral too (Omega = ln), threshold 0
    OmegaTransform lntr(expr::parse("u", "u"), 1.0, PowerMode::plain);
    CHECK(lntr.lower_divergent());
    CHECK(lntr.Omega_inv(-std::numeric_limits<double>::infinity()) == 0.0);

    // Example 2.8's transform converges at the lower end: finite Omega(0+)
    auto tr28 = example28_transform();
    CHECK_FALSE(tr28.lower_divergent());
    CHECK(tr28.lower_limit() == Approx(-std::sqrt(2.0)).epsilon(1e-7));
}

TEST_CASE("concurrent reads with on-demand growth", "[omega][concurrency]") {
    // Omega_inv grows the table; reads from several threads must agree with
    // the serial answers
    OmegaTransform tr(expr::parse("u^(1/2)+u", "u"), 1.6, PowerMode::pth);
    std::vector<double> ys;
    for (int i = 0; i < 64; ++i) ys.push_back(-0.5 + 20.0 * i / 63.0);
    std::vector<double> serial;
    for (double y : ys) serial.push_back(tr.Omega_inv(y));

    OmegaTransform shared(expr::parse("u^(1/2)+u", "u"), 1.6, PowerMode::pth);
    std::vector<std::vector<double>> results(4);
    std::vector<std::thread> threads;
    for (int w = 0; w < 4; ++w) {
        threads.emplace_back([&, w] {
            for (int i = 0; i < 64; ++i) results[w].push_back(shared.Omega_inv(ys[i]));
        });
    }
    for (auto& th : threads) th.join();
    for (int w = 0; w < 4; ++w)
        for (int i = 0; i < 64; ++i)
            CHECK(results[w][i] == Approx(serial[i]).epsilon(1e-7));
}

TEST_CASE("omega validation", "[omega]") {
    CHECK_THROWS_AS(OmegaTransform(expr::parse("1-u", "u"), 1.0, PowerMode::plain),
                    DomainError);
    CHECK_THROWS_AS(OmegaTransform(expr::parse("0", "u"), 1.0, PowerMode::plain),
                    DomainError);
    CHECK_THROWS_AS(OmegaTransform(expr::parse("u", "u"), 0.5, PowerMode::plain),
                    DomainError);
    // omega vanishing at the anchor makes Omega undefined on (1, x]
    CHECK_THROWS_AS(OmegaTransform(expr::parse("max(u-3,0)", "u"), 1.0, PowerMode::plain),
                    DomainError);
}
