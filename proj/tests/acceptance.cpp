// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "rcert/apps.hpp"
#include "rcert/classify.hpp"
#include "rcert/cli.hpp"
#include "rcert/config.hpp"
#include "rcert/quad.hpp"
#include "rcert/riccati.hpp"

using namespace rcert;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances.
constexpr double kQuadRel = 1e-8;
constexpr double kQuadSeconds = 1.0;
constexpr double kResidualMax = 1e-6;
constexpr double kResidualDrop = 10.0;
constexpr double kBaseTol = 1e-10;  // library default; the tight run uses kBaseTol / 10
constexpr double kT31Bound = 0.82436;
constexpr double kT31BoundTol = 1e-4;
constexpr double kEnvelopeSlack = 1e-6;
constexpr double kT31Seconds = 5.0;
constexpr double kEscapeBefore = 10.0;
constexpr double kTransformTol = 1e-5;
constexpr double kKneserResidual = 1e-12;
constexpr double kDeltaTol = 1e-12;
constexpr double kVdPSeconds = 30.0;
constexpr std::size_t kVdPMinSignChanges = 10;

struct Result {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    return buf;
}

TimeFunction c(double v) {
    return [v](double) { return v; };
}

EquationSpec linear(double p, double q, double r) {
    return {ScalarField::constant(p), ScalarField::constant(q), ScalarField::constant(r), 0.0};
}

std::shared_ptr<const Trajectory> run(const EquationSpec& eq, InitialData ic, double T, double tol) {
    IntegrationOptions o;
    o.horizon = T;
    o.rel_tol = tol;
    o.abs_tol = tol * 1e-2;
    return std::make_shared<const Trajectory>(integrate(eq, ic, o));
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// ------------------------------------------------------------------ 1

Result quadrature() {
    Result r;
    const auto t0 = std::chrono::steady_clock::now();
    const double e = std::exp(1.0);
    struct Case {
        const char* name;
        std::function<double()> got;
        double want;
    };
    const std::vector<Case> cases{
        {"i_plus length", [] { return i_plus(c(1), c(0), 0, 2); }, 2.0},
        {"i_plus tau^2", [] { return i_plus([](double t) { return t * t; }, c(0), 1, 4); }, 0.75},
        {"i_plus damped", [] { return i_plus(c(1), c(1), 0, 1); }, 1 - 1 / e},
        {"i_minus zero", [] { return i_minus(c(1), c(0), 0, 5); }, 0.0},
        {"i_minus length", [] { return i_minus(c(0), c(1), 0, 3); }, 3.0},
        {"i_minus damped", [] { return i_minus(c(1), c(1), 0, 1); }, 1 - 1 / e},
        {"F trivial", [] { return eval_F({c(1), c(0), c(0)}, 0, 3, -0.7, 0); }, 0.7},
        {"F 2e", [] { return eval_F({c(1), c(0), c(0)}, 2, 3, 2, 1); }, 2 * e},
        {"F sqrt e", [] { return eval_F({c(1), c(0), c(-1)}, 0, 1, 1, 0); }, std::exp(0.5)},
        {"G trivial", [] { return eval_G(c(1), c(0), c(0), 0, 4, -1.5, 0); }, 1.5},
        {"G e^2", [] { return eval_G(c(1), c(0), c(1), 0, 2, 1, 0); }, std::exp(2.0)},
        {"G 3e^3", [] { return eval_G(c(2), c(0), c(1), 0, 2, 3, 2); }, 3 * std::exp(3.0)},
    };
    std::size_t ok = 0;
    for (const auto& k : cases) {
        const double got = k.got();
        const double err = k.want == 0.0 ? std::abs(got) : std::abs(got - k.want) / std::abs(k.want);
        if (err <= kQuadRel) {
            ++ok;
        } else {
            r.require(false, std::string(k.name) + " off by " + fmt(err));
        }
    }
    const double s = seconds_since(t0);
    r.require(s < kQuadSeconds, "took " + fmt(s) + " s");
    if (r.pass) r.detail = std::to_string(ok) + "/" + std::to_string(cases.size()) + " within " + fmt(kQuadRel) +
                           ", " + fmt(s) + " s";
    return r;
}

// ------------------------------------------------------------------ 2

struct ResidualSet {
    std::vector<std::pair<std::string, double>> values;
};

ResidualSet residuals(double tol) {
    ResidualSet out;
    const auto h = transform(run(linear(1, 0, 1), {0, 1, 0}, 1.5, tol), {0, 1.2});
    const auto d = transform(run(linear(1, 1, 1), {0, 1, 0.3}, 1.5, tol), {0, 1.2});
    const auto kn = transform(run(ef_equation({0, -6, 3}, 1), {1, std::sqrt(2.0), 2 * std::sqrt(2.0)}, 9, tol),
                              {1, 10});
    const auto ef = transform(run(ef_equation({4, 0, 3}, 1), {1, 0.5, 0}, 49, tol), {1, 50});
    for (const auto& [name, p] : {std::pair{"harmonic", &h}, {"damped", &d}, {"kneser", &kn}, {"ef", &ef}}) {
        out.values.emplace_back(std::string("representation/") + name, representation_residual(*p));
        out.values.emplace_back(std::string("cauchy/") + name, cauchy_residual(*p));
    }
    for (int j : {0, 1}) {
        out.values.emplace_back("difference" + std::to_string(j) + "/harmonic-damped", difference_residual(h, d, j));
        out.values.emplace_back("difference" + std::to_string(j) + "/kneser-ef", difference_residual(kn, ef, j));
    }
    return out;
}

Result riccati_identities() {
    Result r;
    const auto base = residuals(kBaseTol);
    const auto tight = residuals(kBaseTol / 10);
    double worst = 0.0, min_drop = INFINITY;
    for (std::size_t k = 0; k < base.values.size(); ++k) {
        const auto& [name, v] = base.values[k];
        const double w = tight.values[k].second;
        worst = std::max(worst, v);
        r.require(v <= kResidualMax, name + " = " + fmt(v));
        const double drop = w > 0.0 ? v / w : INFINITY;
        min_drop = std::min(min_drop, drop);
        r.require(drop >= kResidualDrop, name + " drops only " + fmt(drop) + "x");
    }
    if (r.pass) r.detail = std::to_string(base.values.size()) + " residuals, max " + fmt(worst) +
                           ", smallest drop " + fmt(min_drop) + "x at tol " + fmt(kBaseTol) + " -> " +
                           fmt(kBaseTol / 10);
    return r;
}

// ------------------------------------------------------------------ 3

Result envelope_T31() {
    Result r;
    const auto t0 = std::chrono::steady_clock::now();
    const EFParams p{4, 0, 3};
    const InitialData ic{1, 0.5, 0};
    const auto cert = ef_check_T3_1(p, 1, ic, {1, 50, -1, 1});
    r.require(cert.status == Status::Verified, "status " + std::string(to_string(cert.status)));
    r.require(cert.uniform_bound.has_value(), "no uniform bound");
    const double bound = cert.uniform_bound.value_or(NAN);
    r.require(std::abs(bound - kT31Bound) <= kT31BoundTol, "bound " + fmt(bound));
    IntegrationOptions o;
    o.horizon = 49;
    const auto tr = integrate(ef_equation(p, 1), ic, o);
    r.require(tr.terminal().kind == Terminal::ReachedHorizon, "did not reach t = 50");
    double prev = 0.0;
    bool below = true, monotone = true, positive = true;
    for (std::size_t i = 0; i < tr.times().size(); ++i) {
        const double v = tr.phi()[i];
        positive = positive && v > 0.0;
        below = below && std::abs(v) <= bound * (1 + kEnvelopeSlack);
        if (cert.bound) below = below && std::abs(v) <= cert.bound(tr.times()[i]) * (1 + kEnvelopeSlack);
        monotone = monotone && std::abs(v) >= prev;
        prev = std::abs(v);
    }
    r.require(positive, "phi not positive");
    r.require(below, "phi exceeds the bound");
    r.require(monotone, "|phi| decreases");
    const double s = seconds_since(t0);
    r.require(s < kT31Seconds, "took " + fmt(s) + " s");
    if (r.pass) r.detail = "Verified, bound " + fmt(bound) + ", phi(50) = " + fmt(tr.phi().back()) + ", " + fmt(s) + " s";
    return r;
}

// ------------------------------------------------------------------ 4

Result kneser_majorant() {
    Result r;
    const EFParams p{0, -6, 3};
    const auto eq = ef_equation(p, 1);
    const auto k = kneser_solution(p);
    const auto m = Majorant::closed_form([k](double t) { return k.phi(t); }, [k](double t) { return k.dphi(t); },
                                         "kneser");
    // phi'(1) = 0 and phi'(1) = 1 both start below y_B(1) = 2.
    for (const InitialData ic : {InitialData{1, 1, 0}, InitialData{1, 1, 1}}) {
        const std::string tag = "phi'(1) = " + fmt(ic.phi1);
        const auto cert = check_T3_3(eq, eq, m, ic, {1, 51, -1, 1});
        r.require(cert.status == Status::Verified, tag + ": " + std::string(to_string(cert.status)) + " " +
                                                       cert.reason);
        IntegrationOptions o;
        o.horizon = 50;
        const auto tr = integrate(eq, ic, o);
        r.require(tr.terminal().kind == Terminal::ReachedHorizon, tag + ": escaped");
        double prev = 0.0;
        bool monotone = true;
        for (double v : tr.phi()) {
            monotone = monotone && std::abs(v) >= prev;
            prev = std::abs(v);
        }
        r.require(monotone, tag + ": |phi| decreases");
    }
    if (r.pass) r.detail = "Verified for phi'(1) in {0, 1}, both reach t = 51 monotone";
    return r;
}

// ------------------------------------------------------------------ 5

Result sharpness() {
    Result r;
    const EFParams p{0, 0, 3};
    r.require(ef_transform(p).sigma1 == 0.0, "sigma1 != 0");
    IntegrationOptions o;
    o.horizon = kEscapeBefore - 1;
    const auto tr = integrate(ef_equation(p, 1), {1, 1, 1}, o);
    r.require(tr.terminal().kind == Terminal::FiniteEscape, "no finite escape");
    r.require(tr.terminal().t < kEscapeBefore, "escape at " + fmt(tr.terminal().t));
    const auto cls = classify(tr);
    r.require(cls.monotone, "not monotone");
    r.require(tr.zeros().empty(), "sign changes present");
    r.require(cls.kind != Kind::SingularOscillatorySecondKind, "classified as second kind");
    if (r.pass) r.detail = "escape at t = " + fmt(tr.terminal().t) + ", label " + std::string(to_string(cls.kind));
    return r;
}

// ------------------------------------------------------------------ 6

Result transform_equivalence() {
    Result r;
    const EFParams p{2, 0, 3};
    const auto T = ef_transform(p);
    r.require(T.sigma1 == -4.0, "sigma1 = " + fmt(T.sigma1));
    const InitialData ic{1, 0.2, 0.05};
    IntegrationOptions o;
    o.horizon = 9;
    const auto orig = integrate(ef_equation(p, 1), ic, o);
    const double s0 = T.s_of_t(1);
    const auto start = T.forward(1, ic.phi0, ic.phi1);
    IntegrationOptions os;
    os.horizon = T.s_of_t(10) - s0;
    const auto tgt = integrate(ef_equation(T.target(), s0), {s0, start[0], start[1]}, os);
    r.require(orig.terminal().kind == Terminal::ReachedHorizon && tgt.terminal().kind == Terminal::ReachedHorizon,
              "a run stopped early");
    double worst = 0.0;
    for (int i = 0; i <= 200; ++i) {
        const double t = 1 + 9.0 * i / 200;
        const auto m = T.forward(t, orig.phi_at(t), orig.dphi_at(t));
        const double s = T.s_of_t(t);
        // p0 = 1 on the target, so psi is dpsi/ds.
        worst = std::max({worst, std::abs(m[0] - tgt.phi_at(s)), std::abs(m[1] - tgt.psi_at(s))});
    }
    r.require(worst <= kTransformTol, "max discrepancy " + fmt(worst));
    if (r.pass) r.detail = "sigma1 = -4, max discrepancy " + fmt(worst) + " on t in [1, 10]";
    return r;
}

// ------------------------------------------------------------------ 7

Result kneser_residual() {
    Result r;
    const EFParams p{0, -6, 3};
    const auto k = kneser_solution(p);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const double t = 1 + 0.5 * i;
        const double phi = k.phi(t);
        worst = std::max(worst, std::abs(k.ddphi(t) - std::pow(t, p.sigma) * std::abs(phi) * std::abs(phi) * phi));
    }
    r.require(worst <= kKneserResidual, "residual " + fmt(worst));
    if (r.pass) r.detail = "max residual " + fmt(worst) + " at 100 points";
    return r;
}

// ------------------------------------------------------------------ 8

Result conditional_stability() {
    Result r;
    const EFParams p{2, -2, 3};
    const double delta = conditional_stability_delta(p, 1, 1);
    r.require(std::abs(delta - std::exp(-1.0) / 4) <= kDeltaTol, "delta " + fmt(delta));
    const auto runs = conditional_stability_experiment(p, 1, 1, 20, 50);
    double sup = 0.0;
    std::size_t within = 0;
    for (const auto& run : runs) {
        sup = std::max(sup, run.sup);
        within += run.within && run.phi0 < delta && run.terminal == Terminal::ReachedHorizon;
    }
    r.require(runs.size() == 20 && within == runs.size(), std::to_string(within) + "/20 within");
    if (r.pass) r.detail = "delta = " + fmt(delta) + ", 20/20 within eps = 1, max sup " + fmt(sup);
    return r;
}

// ------------------------------------------------------------------ 9

Result van_der_pol() {
    Result r;
    const auto t0 = std::chrono::steady_clock::now();
    const VdPParams v{c(1), c(1), c(1)};
    const Region region{0, 100, -5, 5};
    const auto eq = vdp_equation(v, 0, 100);
    const auto c6 = check_T3_6(eq, region);
    r.require(c6.status == Status::Verified, "T3_6 " + std::string(to_string(c6.status)));
    const auto c42 = check_T4_2(v, 1.0, region);
    r.require(c42.status == Status::Verified, "T4_2 " + std::string(to_string(c42.status)));
    r.require(!c42.heuristic.empty(), "heuristic components not flagged");
    std::mt19937_64 gen(7);
    auto draw = [&gen] { return -5.0 + 10.0 * static_cast<double>(gen() >> 11) * 0x1.0p-53; };
    IntegrationOptions o;
    o.horizon = 100;
    std::size_t fewest = SIZE_MAX;
    for (int k = 0; k < 10; ++k) {
        const double a = draw(), b = draw();
        const auto tr = integrate(eq, {0, a, b}, o);
        r.require(tr.terminal().kind == Terminal::ReachedHorizon, "IC (" + fmt(a) + ", " + fmt(b) + ") stopped early");
        fewest = std::min(fewest, tr.zeros().size());
    }
    r.require(fewest >= kVdPMinSignChanges, "only " + std::to_string(fewest) + " sign changes");
    const double s = seconds_since(t0);
    r.require(s < kVdPSeconds, "took " + fmt(s) + " s");
    if (r.pass) r.detail = "T3_6 and T4_2 Verified (" + std::to_string(c42.heuristic.size()) +
                           " heuristic), 10 ICs with >= " + std::to_string(fewest) + " sign changes, " + fmt(s) + " s";
    return r;
}

// ------------------------------------------------------------------ 10

Result determinism(const fs::path& fixtures) {
    Result r;
    struct Job {
        const char* file;
        const char* command;
        std::optional<std::string> theorem;
    };
    const std::vector<Job> jobs{{"ef_t3_1.json", "certify", "t3_1"},   {"t3_6_negative_r.json", "certify", "t3_6"},
                                {"harmonic.json", "classify", std::nullopt}, {"harmonic.json", "integrate", std::nullopt},
                                {"sweep_cubic.json", "sweep", std::nullopt}, {"emden.json", "emden", std::nullopt},
                                {"vdp.json", "vdp", std::nullopt}};
    const auto root = fs::temp_directory_path() / "rcert_acceptance";
    std::size_t files = 0;
    for (const auto& job : jobs) {
        std::ifstream in(fixtures / job.file);
        const auto cfg = parse_config(nlohmann::json::parse(in));
        const auto a = root / "a", b = root / "b";
        for (const auto& d : {a, b}) {
            fs::remove_all(d);
            fs::create_directories(d);
            execute(job.command, job.theorem, cfg, d);
        }
        for (const auto& entry : fs::directory_iterator(a)) {
            ++files;
            const auto name = entry.path().filename();
            r.require(slurp(entry.path()) == slurp(b / name),
                      std::string(job.file) + " " + job.command + ": " + name.string() + " differs");
        }
    }
    if (r.pass) r.detail = std::to_string(jobs.size()) + " runs, " + std::to_string(files) + " files byte-identical";
    return r;
}

}  // namespace

int main(int argc, char** argv) {
    const fs::path fixtures = argc > 1 ? fs::path(argv[1]) : fs::path(RCERT_FIXTURES);
    const std::vector<std::pair<const char*, std::function<Result()>>> criteria{
        {"quadrature oracles", quadrature},
        {"Riccati identities", riccati_identities},
        {"T3_1 envelope", envelope_T31},
        {"T3_3 Kneser majorant", kneser_majorant},
        {"monotone blow-up is not second kind", sharpness},
        {"transformation equivalence", transform_equivalence},
        {"Kneser residual", kneser_residual},
        {"conditional stability", conditional_stability},
        {"van der Pol", van_der_pol},
        {"determinism", [&fixtures] { return determinism(fixtures); }},
    };
    int failed = 0, n = 0;
    for (const auto& [name, check] : criteria) {
        ++n;
        Result res;
        try {
            res = check();
        } catch (const std::exception& e) {
            res.pass = false;
            res.detail = std::string("exception: ") + e.what();
        }
        failed += !res.pass;
        std::printf("%s %2d %s: %s\n", res.pass ? "PASS" : "FAIL", n, name, res.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%d criteria passed\n", n - failed, n);
    return failed ? 1 : 0;
}
