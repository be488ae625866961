#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "doctest.h"
#include "oracles.hpp"
#include "rcert/apps.hpp"
#include "rcert/dyn.hpp"
#include "rcert/errors.hpp"

using namespace rcert;
using std::numbers::pi;

namespace {

EquationSpec linear(double p, double q, double r) {
    return {ScalarField::constant(p), ScalarField::constant(q), ScalarField::constant(r), 0.0};
}

IntegrationOptions horizon(double T) {
    IntegrationOptions o;
    o.horizon = T;
    return o;
}

}  // namespace

TEST_CASE("constant solution") {
    const auto tr = integrate(linear(1, 0, 0), {0, 1, 0}, horizon(10));
    CHECK(tr.terminal().kind == Terminal::ReachedHorizon);
    CHECK(tr.t_end() == 10.0);
    CHECK(tr.zeros().empty());
    for (std::size_t k = 0; k < tr.times().size(); ++k) {
        CHECK(tr.phi()[k] == 1.0);
        CHECK(tr.psi()[k] == 0.0);
    }
}

TEST_CASE("harmonic oscillator matches the cosine") {
    const auto tr = integrate(linear(1, 0, 1), {0, 1, 0}, horizon(10));
    REQUIRE(tr.zeros().size() == 3);
    for (int k = 0; k < 3; ++k) CHECK(std::abs(tr.zeros()[k] - (pi / 2 + k * pi)) < 1e-6);
    CHECK(std::abs(tr.phi_at(pi) + 1.0) < 1e-6);
    for (double t : {0.3, 2.0, 7.7}) {
        CHECK(std::abs(tr.phi_at(t) - std::cos(t)) < 1e-8);
        CHECK(std::abs(tr.dphi_at(t) + std::sin(t)) < 1e-8);
    }
    for (double z : tr.zeros()) CHECK(std::abs(tr.phi_at(z)) <= tr.options().zero_tol);
}

TEST_CASE("psi equals p0 times phi' along the path") {
    EquationSpec eq{ScalarField::of_time("1+t", [](double t) { return 1 + t; }), ScalarField::constant(0.2),
                    ScalarField::constant(1.0), 0.0};
    const auto tr = integrate(eq, {0, 1, 0.5}, horizon(5));
    CHECK(tr.psi()[0] == doctest::Approx(0.5));
    // Central differences of the dense phi against psi / p0.
    for (double t : {0.7, 1.9, 3.3}) {
        const double h = 1e-5;
        const double fd = (tr.phi_at(t + h) - tr.phi_at(t - h)) / (2 * h);
        CHECK(fd == doctest::Approx(tr.psi_at(t) / (1 + t)).epsilon(1e-6));
    }
}

TEST_CASE("cubic equation escapes in finite time") {
    EquationSpec eq{ScalarField::constant(1), ScalarField::constant(0),
                    ScalarField("-w^2", [](double, double w) { return -w * w; }), 0.0};
    auto o = horizon(10);
    const auto tr = integrate(eq, {0, 1, 1}, o);
    REQUIRE(tr.terminal().kind == Terminal::FiniteEscape);
    const double T = tr.terminal().t;
    for (std::size_t k = 1; k < tr.phi().size(); ++k) CHECK(tr.phi()[k] >= tr.phi()[k - 1]);
    CHECK(tr.zeros().empty());
    // Reference: fixed-step RK4 at h = 1e-4 crosses the same threshold.
    const auto ref = oracle::rk4_escape(
        [](double, const oracle::State& y) { return oracle::State{y[1], y[0] * y[0] * y[0]}; }, 0.0, {1, 1}, 10.0,
        1e-4, 1e8);
    REQUIRE(ref > 0);
    CHECK(std::abs(ref - T) < 1e-3);
    CHECK(tr.terminal().bracket > 0.0);
}

TEST_CASE("p0 <= 0 along the path is a domain error") {
    EquationSpec eq{ScalarField::of_time("1-t", [](double t) { return 1 - t; }), ScalarField::constant(0),
                    ScalarField::constant(0), 0.0};
    CHECK_THROWS_AS(integrate(eq, {0, 1, 0}, horizon(3)), DomainError);
}

TEST_CASE("max_zeros truncates and flags") {
    auto o = horizon(100);
    o.max_zeros = 5;
    const auto tr = integrate(linear(1, 0, 1), {0, 1, 0}, o);
    CHECK(tr.truncated());
    CHECK(tr.zeros().size() == 5);
    CHECK(tr.t_end() < 100.0);
}

TEST_CASE("property: phi keeps its sign between consecutive zeros") {
    EquationSpec eq{ScalarField::constant(1), ScalarField::constant(0.1),
                    ScalarField("1+w^2", [](double t, double w) { return 1 + w * w + 0.1 * t; }), 0.0};
    const auto tr = integrate(eq, {0, 2, -1}, horizon(30));
    const auto& z = tr.zeros();
    REQUIRE(z.size() > 5);
    for (std::size_t k = 1; k < z.size(); ++k) {
        const double mid = tr.phi_at(0.5 * (z[k - 1] + z[k]));
        for (int j = 1; j < 64; ++j) {
            const double t = z[k - 1] + (z[k] - z[k - 1]) * j / 64.0;
            CHECK(tr.phi_at(t) * mid > 0.0);
        }
    }
    for (std::size_t k = 1; k < tr.times().size(); ++k) CHECK(tr.times()[k] > tr.times()[k - 1]);
}

TEST_CASE("refine check") {
    auto o = horizon(20);
    o.rel_tol = 1e-6;
    o.abs_tol = 1e-8;
    const auto coarse = refine_check(linear(1, 0, 1), {0, 1, 0}, o);
    o.rel_tol = 1e-7;
    o.abs_tol = 1e-9;
    const auto fine = refine_check(linear(1, 0, 1), {0, 1, 0}, o);
    CHECK(fine.max_dphi * 5 <= coarse.max_dphi);

    const auto flat = refine_check(linear(1, 0, 0), {0, 1, 0}, horizon(10));
    CHECK(flat.max_dphi == 0.0);
    CHECK(flat.max_dpsi == 0.0);

    // Kneser solution sqrt(2) t^2 of phi'' = t^-6 phi^3.
    const auto eq = ef_equation({0, -6, 3}, 1);
    const auto k = refine_check(eq, {1, std::sqrt(2.0), 2 * std::sqrt(2.0)}, horizon(9));
    const double scale = std::sqrt(2.0) * 100;  // max |phi|
    CHECK(k.max_dphi <= 10 * k.tol_coarse * scale);
}

TEST_CASE("trajectory CSV and sidecar") {
    const auto tr = integrate(linear(1, 0, 1), {0, 1, 0}, horizon(4));
    const auto dir = std::filesystem::temp_directory_path() / "rcert_test_dyn";
    std::filesystem::create_directories(dir);
    write_trajectory_csv(tr, dir / "t.csv");
    write_trajectory_sidecar(tr, dir / "t.json");
    std::ifstream in(dir / "t.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header == "t,phi,psi,y");
    std::size_t rows = 0;
    for (std::string line; std::getline(in, line);) ++rows;
    CHECK(rows == tr.times().size());
    CHECK(std::filesystem::file_size(dir / "t.json") > 0);
}
