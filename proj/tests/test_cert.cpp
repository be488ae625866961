#include <cmath>
#include <random>

#include "doctest.h"
#include "rcert/apps.hpp"
#include "rcert/cert.hpp"
#include "rcert/classify.hpp"
#include "rcert/errors.hpp"

using namespace rcert;

namespace {

TimeFunction c(double v) {
    return [v](double) { return v; };
}

EquationSpec fields(ScalarField p, ScalarField q, ScalarField r, double t0 = 0.0) {
    return {std::move(p), std::move(q), std::move(r), t0};
}

EquationSpec linear(double p, double q, double r, double t0 = 0.0) {
    return fields(ScalarField::constant(p), ScalarField::constant(q), ScalarField::constant(r), t0);
}

const Grid small{33, 33};

}  // namespace

// ------------------------------------------------------------------ T3_1

TEST_CASE("T3_1 on the Emden-Fowler envelope instance") {
    const EFParams p{4, 0, 3};
    const auto cert = ef_check_T3_1(p, 1, {1, 0.5, 0}, {1, 50, -1, 1});
    REQUIRE(cert.status == Status::Verified);
    CHECK(cert.conclusion == "GLOBAL_MONOTONE_WITH_ESTIMATE");
    REQUIRE(cert.uniform_bound);
    CHECK(*cert.uniform_bound == doctest::Approx(0.5 * std::exp(0.5)).epsilon(1e-12));
    REQUIRE(cert.bound);
    // The F envelope stays under the uniform bound A and tends to 0.5 e^(1/6).
    for (const auto& [t, v] : cert.bound_curve) CHECK(v <= *cert.uniform_bound);
    // Closed form: exponent = int_1^t (tau - 1) / tau^4 dtau.
    const double t = 50.0;
    const double expo = 1.0 / 6 - 1 / (2 * t * t) + 1 / (3 * t * t * t);
    CHECK(cert.bound(t) == doctest::Approx(0.5 * std::exp(expo)).epsilon(1e-8));
    CHECK(cert.extra_conclusions.empty());
    CHECK(cert.epsilon == doctest::Approx(5e-4));
}

TEST_CASE("T3_1 trivial instance has bound 1") {
    const auto cert = check_T3_1(linear(1, 0, 0), {1, 1, 0}, {c(1), c(0), c(0)}, {1, 10, -1, 1});
    REQUIRE(cert.status == Status::Verified);
    for (const auto& [t, v] : cert.bound_curve) CHECK(v == 1.0);
}

TEST_CASE("T3_1 with a larger initial value leaves the region where R <= r0") {
    // R = -t^sigma bounds r0 = -t^sigma |w|^2 from below only for |w| <= 1.
    const auto cert = ef_check_T3_1({4, 0, 3}, 1, {1, 1.2, 0}, {1, 50, -1, 1});
    CHECK(cert.status == Status::Falsified);
    REQUIRE(cert.witness);
    CHECK(cert.witness->hypothesis == "R <= r0");
    CHECK(std::abs(cert.witness->w) > 1.0);
    CHECK(cert.witness->lhs > cert.witness->rhs);
}

TEST_CASE("T3_1 precondition and range failures are inconclusive") {
    const auto neg = check_T3_1(linear(1, 0, 0), {1, 1, -0.5}, {c(1), c(0), c(0)}, {1, 10, -1, 1});
    CHECK(neg.status == Status::Inconclusive);
    CHECK(neg.reason.find("precondition") != std::string::npos);
    const auto zero = check_T3_1(linear(1, 0, 0), {1, 0, 1}, {c(1), c(0), c(0)}, {1, 10, -1, 1});
    CHECK(zero.status == Status::Inconclusive);
    const auto big = check_T3_1(linear(1, 0, 0), {0, 1, 100}, {c(1), c(0), c(0)}, {0, 10, -1, 1});
    CHECK(big.status == Status::Inconclusive);
    CHECK(big.reason.find("range") != std::string::npos);
}

TEST_CASE("T3_1 reports the derivative conclusion for nonzero phi1") {
    const auto cert = check_T3_1(linear(1, 0, 0), {0, 1, 0.5}, {c(1), c(0), c(0)}, {0, 2, -1, 1});
    REQUIRE(cert.status == Status::Verified);
    REQUIRE(cert.extra_conclusions.size() == 1);
    CHECK(cert.extra_conclusions[0] == "DERIVATIVE_NONZERO");
    // F = exp(0.5 t) for P = 1, Q = R = 0, c2 = 0.5.
    CHECK(cert.bound(2.0) == doctest::Approx(std::exp(1.0)).epsilon(1e-9));
}

TEST_CASE("property: T3_1 envelope encloses the trajectory") {
    const EFParams p{4, 0, 3};
    const auto eq = ef_equation(p, 1);
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> d0(0.05, 0.6), d1(0.0, 0.15);
    for (int k = 0; k < 6; ++k) {
        const InitialData ic{1, d0(gen), d1(gen)};
        const auto cert = ef_check_T3_1(p, 1, ic, {1, 50, -1, 1});
        if (cert.status != Status::Verified) continue;
        IntegrationOptions o;
        o.horizon = 49;
        const auto tr = integrate(eq, ic, o);
        REQUIRE(tr.terminal().kind == Terminal::ReachedHorizon);
        double prev = 0.0;
        for (std::size_t i = 0; i < tr.times().size(); ++i) {
            const double t = tr.times()[i], v = std::abs(tr.phi()[i]);
            CHECK(v <= cert.bound(t) * (1 + 1e-6));
            CHECK(v >= prev * (1 - 1e-9));
            prev = v;
        }
    }
}

// ------------------------------------------------------------------ T3_2

TEST_CASE("T3_2 trivial instance") {
    const auto cert = check_T3_2(linear(1, 1, 0), {1, 1, 0}, {c(1), c(1), c(0)}, c(0), {1, 10, -1, 1});
    REQUIRE(cert.status == Status::Verified);
    for (const auto& [t, v] : cert.bound_curve) CHECK(v == doctest::Approx(1.0));
}

TEST_CASE("T3_2 with a decaying ratio bound") {
    const auto eq = fields(ScalarField::constant(1), ScalarField::of_time("1+t", [](double t) { return 1 + t; }),
                           ScalarField::of_time("-e^-t", [](double t) { return -std::exp(-t); }));
    const auto cert =
        check_T3_2(eq, {0, 1, 0}, {c(1), c(1), c(0)}, [](double t) { return std::exp(-t); }, {0, 5, -1, 1});
    REQUIRE(cert.status == Status::Verified);
    // M is the running max of e^-t from 0, i.e. 1; G = exp(t) with c2 = 0.
    CHECK(cert.bound(2.0) == doctest::Approx(std::exp(2.0)).epsilon(1e-6));
}

TEST_CASE("T3_2 falsified by positive r0 and inconclusive for q0 = 0") {
    const auto pos = check_T3_2(linear(1, 1, 0.5), {0, 1, 0}, {c(1), c(1), c(0)}, c(1), {0, 5, -1, 1});
    CHECK(pos.status == Status::Falsified);
    REQUIRE(pos.witness);
    const auto zero = check_T3_2(linear(1, 0, 0), {0, 1, 0}, {c(1), c(0), c(0)}, c(1), {0, 5, -1, 1});
    CHECK(zero.status == Status::Inconclusive);
    CHECK(zero.reason.find("ratio undefined") != std::string::npos);
}

// ------------------------------------------------------------------ T3_3

TEST_CASE("T3_3 with the Kneser majorant") {
    const EFParams p{0, -6, 3};
    const auto eq = ef_equation(p, 1);
    const auto k = kneser_solution(p);
    const auto m = Majorant::closed_form([k](double t) { return k.phi(t); }, [k](double t) { return k.dphi(t); },
                                         "kneser");
    const auto cert = check_T3_3(eq, eq, m, {1, 1, 0}, {1, 50, -1, 1});
    CHECK(cert.status == Status::Verified);
    CHECK(cert.conclusion == "GLOBAL_MONOTONE");

    SUBCASE("positive r0 breaks D1") {
        auto bad = eq;
        bad.r0 = ScalarField("r", [](double t, double w) { return w > 100 ? 1.0 : -std::pow(t, -6.0) * w * w; });
        const auto c2 = check_T3_3(bad, eq, m, {1, 1, 0}, {1, 50, -1, 1});
        CHECK(c2.status == Status::Falsified);
        REQUIRE(c2.witness);
        CHECK(c2.witness->hypothesis.rfind("D1", 0) == 0);
    }
    SUBCASE("different p breaks C1") {
        auto other = eq;
        other.p0 = ScalarField::of_time("1+t/100", [](double t) { return 1 + t / 100; });
        const auto c3 = check_T3_3(other, eq, m, {1, 1, 0}, {1, 50, -1, 1});
        CHECK(c3.status == Status::Falsified);
        REQUIRE(c3.witness);
        CHECK(c3.witness->hypothesis.rfind("C1", 0) == 0);
    }
    SUBCASE("initial Riccati ordering must be strict") {
        const auto c4 = check_T3_3(eq, eq, m, {1, 1, 2}, {1, 50, -1, 1});
        CHECK(c4.status == Status::Falsified);
    }
}

TEST_CASE("T3_3 majorant with a zero is inconclusive") {
    const auto h = linear(1, 0, 1);
    IntegrationOptions o;
    o.horizon = 10;
    const auto m = Majorant::from_trajectory(std::make_shared<const Trajectory>(integrate(h, {0, 2, 0}, o)));
    const auto cert = check_T3_3(h, h, m, {0, 1, 0}, {0, 10, -1, 1});
    CHECK(cert.status == Status::Inconclusive);
}

// ------------------------------------------------------------------ T3_4

TEST_CASE("T3_4 examples") {
    const auto h = check_T3_4(linear(1, 0, 1), {c(1), c(0), c(0)}, {0, 10, -2, 2});
    CHECK(h.status == Status::Verified);
    CHECK(h.conclusion == "SINGULAR_SECOND_KIND_IF_NONEXTENDABLE");
    const auto sq = fields(ScalarField::constant(1), ScalarField::constant(0),
                           ScalarField("w^2", [](double, double w) { return w * w; }));
    CHECK(check_T3_4(sq, {c(1), c(0), c(0)}, {0, 10, -2, 2}).status == Status::Verified);
    const auto neg = check_T3_4(linear(1, 0, -1), {c(1), c(0), c(0)}, {0, 10, -2, 2});
    CHECK(neg.status == Status::Falsified);
    REQUIRE(neg.witness);
}

TEST_CASE("property: escaping trajectories of T3_4 instances accumulate zeros") {
    // With r0 >= 0 and continuous coefficients the energy psi^2/2 + int r0 w p0 dw grows at most
    // exponentially, so no sampled trajectory escapes; the implication is checked whenever one does.
    const auto sq = fields(ScalarField::constant(1), ScalarField::constant(0),
                           ScalarField("w^2", [](double, double w) { return w * w; }));
    REQUIRE(check_T3_4(sq, {c(1), c(0), c(0)}, {0, 20, -5, 5}).status == Status::Verified);
    IntegrationOptions o;
    o.horizon = 20;
    for (double a : {0.5, 1.0, 2.0, 4.0}) {
        const auto tr = integrate(sq, {0, a, 0}, o);
        if (tr.terminal().kind == Terminal::FiniteEscape) {
            CHECK(classify(tr).kind == Kind::SingularOscillatorySecondKind);
        } else {
            CHECK(tr.terminal().kind == Terminal::ReachedHorizon);
        }
    }
}

// ------------------------------------------------------------------ T3_5

TEST_CASE("T3_5 on Van der Pol with the standard family") {
    VdPParams v{c(1), c(1), c(1)};
    const auto eq = vdp_equation(v, 0, 100);
    const auto cert = check_T3_5(eq, {c(1), c(0), c(1)}, vdp_family(v), 1.0, 1.0, {0, 100, -5, 5});
    CHECK(cert.status == Status::Verified);
    CHECK(cert.conclusion == "OSC_OR_SINGULAR_FIRST_KIND");
    CHECK_FALSE(cert.heuristic.empty());
    CHECK(cert.eps_samples.size() == 4);
    for (const auto& [name, verdict] : cert.probes) CHECK(verdict.status == Divergence::Diverging);
}

TEST_CASE("T3_5 falsifications") {
    VdPParams v{c(1), c(1), c(1)};
    const auto neg = check_T3_5(linear(1, 0, -1), {c(1), c(0), c(1)}, vdp_family(v), 1.0, 1.0, {0, 10, -2, 2});
    CHECK(neg.status == Status::Falsified);
    REQUIRE(neg.witness);
    CHECK(neg.witness->hypothesis.rfind("A3", 0) == 0);

    // r_eps = 0 makes the nested kernel integrand vanish.
    VdPParams v0{c(1), c(1), c(0)};
    const auto eq = vdp_equation(v0, 0, 100);
    const auto zero = check_T3_5(eq, {c(1), c(0), c(0)}, vdp_family(v0), 1.0, 1.0, {0, 100, -5, 5});
    CHECK(zero.status == Status::Falsified);
    REQUIRE(zero.witness);
    CHECK(zero.witness->hypothesis.rfind("C3_2", 0) == 0);
}

// ------------------------------------------------------------------ T3_6

TEST_CASE("T3_6 examples") {
    VdPParams v{c(1), c(1), c(1)};
    CHECK(check_T3_6(vdp_equation(v, 0, 100), {0, 100, -5, 5}).status == Status::Verified);
    const auto tr = fields(ScalarField::constant(1), ScalarField::constant(0),
                           ScalarField::of_time("t", [](double t) { return t; }));
    CHECK(check_T3_6(tr, {0, 10, -3, 3}).status == Status::Verified);
    const auto bad = fields(ScalarField::constant(1), ScalarField("-w^2", [](double, double w) { return -w * w; }),
                            ScalarField::constant(1));
    const auto c3 = check_T3_6(bad, {0, 10, -3, 3});
    CHECK(c3.status == Status::Falsified);
    REQUIRE(c3.witness);
    CHECK(c3.witness->hypothesis == "B4: q0/p0 even-monotone in w");
}

TEST_CASE("property: T3_6 instances never escape") {
    VdPParams v{c(1), c(1), c(1)};
    const auto eq = vdp_equation(v, 0, 100);
    REQUIRE(check_T3_6(eq, {0, 100, -5, 5}, small).status == Status::Verified);
    std::mt19937_64 gen(17);
    std::uniform_real_distribution<double> d(-5, 5);
    IntegrationOptions o;
    o.horizon = 100;
    for (int k = 0; k < 25; ++k) {
        const auto tr = integrate(eq, {0, d(gen), d(gen)}, o);
        CHECK(tr.terminal().kind == Terminal::ReachedHorizon);
    }
}

// ------------------------------------------------------------------ shared

TEST_CASE("property: refinement never turns a verdict inconclusive") {
    VdPParams v{c(1), c(1), c(1)};
    const auto vdp = vdp_equation(v, 0, 100);
    const auto bad = fields(ScalarField::constant(1), ScalarField::constant(0),
                            ScalarField("0.3-w^2", [](double, double w) { return 0.3 - w * w; }));
    Grid g{9, 9};
    for (int k = 0; k < 3; ++k) {
        const auto a = check_T3_6(vdp, {0, 50, -4, 4}, g);
        CHECK(a.status == Status::Verified);
        const auto b = check_T3_4(bad, {c(1), c(0), c(0)}, {0, 5, -2, 2}, g);
        CHECK(b.status == Status::Falsified);
        CHECK(b.witness.has_value());
        g = g.refined();
    }
}

TEST_CASE("aggregate ordering") {
    Certificate v, f, i;
    v.status = Status::Verified;
    f.status = Status::Falsified;
    i.status = Status::Inconclusive;
    CHECK(aggregate({v, v}) == Status::Verified);
    CHECK(aggregate({v, i}) == Status::Inconclusive);
    CHECK(aggregate({i, f, v}) == Status::Falsified);
}

TEST_CASE("certificate JSON carries the sampled region and witness") {
    const auto cert = check_T3_4(linear(1, 0, -1), {c(1), c(0), c(0)}, {0, 3, -2, 2}, small);
    const auto j = to_json(cert);
    CHECK(j["theorem"] == "T3_4");
    CHECK(j["status"] == "Falsified");
    CHECK(j["region"]["t_hi"] == 3.0);
    CHECK(j["grid"]["nt"] == 33);
    CHECK(j["witness"]["hypothesis"] == "B2: 0 <= r0");
}
