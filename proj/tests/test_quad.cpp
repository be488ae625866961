#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "rcert/errors.hpp"
#include "rcert/quad.hpp"

using namespace rcert;
using doctest::Approx;

namespace {

TimeFunction c(double v) {
    return [v](double) { return v; };
}

const double e = std::exp(1.0);

}  // namespace

TEST_CASE("i_plus closed forms") {
    CHECK(i_plus(c(1), c(0), 0, 2) == Approx(2.0).epsilon(1e-12));
    CHECK(i_plus([](double t) { return t * t; }, c(0), 1, 4) == Approx(0.75).epsilon(1e-10));
    CHECK(i_plus(c(1), c(1), 0, 1) == Approx(1 - 1 / e).epsilon(1e-10));
}

TEST_CASE("i_minus closed forms") {
    CHECK(i_minus(c(1), c(0), 0, 5) == 0.0);
    CHECK(i_minus(c(0), c(1), 0, 3) == Approx(3.0).epsilon(1e-12));
    CHECK(i_minus(c(1), c(1), 0, 1) == Approx(1 - 1 / e).epsilon(1e-10));
}

TEST_CASE("eval_F closed forms") {
    const BoundTriple zero{c(1), c(0), c(0)};
    CHECK(eval_F(zero, 0, 3, -0.7, 0) == Approx(0.7).epsilon(1e-14));
    CHECK(eval_F(zero, 2, 3, 2, 1) == Approx(2 * e).epsilon(1e-10));
    CHECK(eval_F({c(1), c(0), c(-1)}, 0, 1, 1, 0) == Approx(std::exp(0.5)).epsilon(1e-10));
}

TEST_CASE("eval_G closed forms") {
    CHECK(eval_G(c(1), c(0), c(0), 0, 4, -1.5, 0) == Approx(1.5).epsilon(1e-14));
    CHECK(eval_G(c(1), c(0), c(1), 0, 2, 1, 0) == Approx(std::exp(2.0)).epsilon(1e-10));
    CHECK(eval_G(c(2), c(0), c(1), 0, 2, 3, 2) == Approx(3 * std::exp(3.0)).epsilon(1e-10));
}

TEST_CASE("i_plus and i_minus match a Simpson oracle on non-trivial weights") {
    auto u = [](double t) { return 1 + t * t; };
    auto v = [](double t) { return std::sin(t) + 1; };
    auto V = [](double a, double b) { return (b - std::cos(b)) - (a - std::cos(a)); };  // int_a^b v
    auto x = [](double t) { return std::exp(-t) + t; };
    const double t1 = 0.2, t = 3.1;
    const double plus = oracle::simpson([&](double s) { return std::exp(-V(t1, s)) / u(s); }, t1, t);
    const double minus = oracle::simpson([&](double s) { return std::exp(-V(s, t)) * x(s); }, t1, t);
    CHECK(i_plus(u, v, t1, t) == Approx(plus).epsilon(1e-9));
    CHECK(i_minus(v, x, t1, t) == Approx(minus).epsilon(1e-9));
}

TEST_CASE("property: additivity over interval splits") {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> d(0.0, 1.0);
    auto u = [](double t) { return 2 + std::cos(t); };
    auto v = [](double t) { return 0.3 * t; };
    auto x = [](double t) { return 1 + t * t; };
    for (int k = 0; k < 20; ++k) {
        const double t1 = 4 * d(gen), len = 0.5 + 4 * d(gen), m = t1 + len * d(gen), t = t1 + len;
        const double wV1m = std::exp(-0.15 * (m * m - t1 * t1));
        const double wVmt = std::exp(-0.15 * (t * t - m * m));
        const double whole_p = i_plus(u, v, t1, t);
        const double split_p = i_plus(u, v, t1, m) + wV1m * i_plus(u, v, m, t);
        CHECK(whole_p == Approx(split_p).epsilon(1e-8));
        const double whole_m = i_minus(v, x, t1, t);
        const double split_m = wVmt * i_minus(v, x, t1, m) + i_minus(v, x, m, t);
        CHECK(whole_m == Approx(split_m).epsilon(1e-8));
    }
}

TEST_CASE("property: F is nondecreasing when R <= 0 and c2 >= 0") {
    const BoundTriple b{[](double t) { return 1 + t; }, [](double t) { return std::sin(t); },
                        [](double t) { return -std::exp(-t); }};
    FEnvelope F(b, 0.5, 20.0);
    double prev = F(0.5, 0.8, 0.4);
    for (int k = 1; k <= 400; ++k) {
        const double t = 0.5 + 19.5 * k / 400.0;
        const double v = F(t, 0.8, 0.4);
        CHECK(v >= prev * (1 - 1e-12));
        prev = v;
    }
}

TEST_CASE("F at t1 is exactly |c1|") {
    const BoundTriple b{[](double t) { return 1 + t; }, c(0.3), c(-2)};
    CHECK(eval_F(b, 1.5, 1.5, -0.37, 5.0) == 0.37);
    CHECK(eval_G(c(1), c(0), c(1), 1.5, 1.5, 0.37, 5.0) == 0.37);
}

TEST_CASE("halving the tolerance moves results by less than the previous tolerance") {
    const BoundTriple b{[](double t) { return 1 + t * t; }, [](double t) { return 0.1 * t; }, c(-1)};
    QuadTolerance tol{1e-8, 1e-6, 200000};
    for (int k = 0; k < 4; ++k) {
        const double a = eval_F(b, 0, 6, 1, 0.5, tol);
        const auto half = tol.tightened(2.0);
        const double bb = eval_F(b, 0, 6, 1, 0.5, half);
        CHECK(std::abs(a - bb) <= tol.abs + tol.rel * std::abs(a));
        tol = half;
    }
}

TEST_CASE("envelope errors") {
    const BoundTriple zero{c(1), c(0), c(0)};
    CHECK_THROWS_AS(eval_F(zero, 0, 1, 0.0, 1), DomainError);
    CHECK_THROWS_AS(eval_F(zero, 0, 1, 1.0, 1e6), RangeError);
    CHECK_THROWS_AS(i_plus(c(-1), c(0), 0, 1), DomainError);
}

TEST_CASE("running max") {
    const auto M = running_max([](double t) { return std::sin(t); }, 0, 10);
    CHECK(M(1.0) == Approx(std::sin(1.0)).epsilon(1e-6));
    CHECK(M(3.0) == Approx(1.0).epsilon(1e-6));
    CHECK(M(9.0) == Approx(1.0).epsilon(1e-6));
    const auto D = running_max([](double t) { return std::exp(-t); }, 1, 5);
    CHECK(D(4.0) == Approx(std::exp(-1.0)));
}

TEST_CASE("divergence probe verdicts") {
    CHECK(divergence_probe(c(0), 1).status == Divergence::Converging);
    const auto harmonic = divergence_probe([](double t) { return 1 / t; }, 1);
    CHECK(harmonic.status == Divergence::Diverging);
    REQUIRE(harmonic.horizons.size() == 21);
    for (std::size_t k = 1; k < harmonic.horizons.size(); ++k) {
        CHECK(harmonic.horizons[k].first > harmonic.horizons[k - 1].first);
        CHECK(harmonic.horizons[k].second - harmonic.horizons[k - 1].second ==
              Approx(std::log(2.0)).epsilon(1e-7));
    }
    const auto sq = divergence_probe([](double t) { return 1 / (t * t); }, 1);
    CHECK(sq.status == Divergence::Converging);
    CHECK(sq.heuristic);
    CHECK_THROWS_AS(divergence_probe([](double t) { return -t; }, 1), DomainError);
}

TEST_CASE("damped reciprocal and nested kernel closed forms") {
    const auto d = damped_reciprocal(c(2), c(1), 0, 100);
    CHECK(d(3.0) == Approx(std::exp(-3.0) / 2).epsilon(1e-9));
    const auto k = nested_kernel_integrand(c(1), c(3), c(1), 0, std::ldexp(1.0, 20));
    CHECK(k(2.0) == Approx((1 - std::exp(-6.0)) / 3).epsilon(1e-9));
    // The kernel concentrates near tau on long intervals.
    CHECK(k(1e6) == Approx(1.0 / 3).epsilon(1e-9));
}
