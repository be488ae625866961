#include "rcert/apps.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rcert/errors.hpp"

namespace rcert {

namespace {

std::string num(double x) {
    std::ostringstream os;
    os << x;
    return os.str();
}

}  // namespace

EquationSpec ef_equation(const EFParams& p, double t0) {
    if (!(t0 > 0.0)) throw DomainError("Emden-Fowler equation requires t0 > 0");
    if (!(p.n > 1.0)) throw DomainError("Emden-Fowler equation requires n > 1");
    const double rho = p.rho, sigma = p.sigma, m = p.n - 1.0;
    EquationSpec eq;
    eq.t0 = t0;
    eq.p0 = ScalarField::of_time("t^" + num(rho), [rho](double t) { return std::pow(t, rho); },
                                 {Tag::Positive});
    eq.q0 = ScalarField::constant(0.0);
    std::vector<double> singular;
    if (m < 1.0) singular.push_back(0.0);
    if (p.variant == EFVariant::Absolute) {
        eq.r0 = ScalarField("-t^" + num(sigma) + " |w|^" + num(m),
                            [sigma, m](double t, double w) { return -std::pow(t, sigma) * std::pow(std::abs(w), m); },
                            {Tag::Nonpositive}, singular);
    } else {
        eq.r0 = ScalarField("-t^" + num(sigma) + " w^" + num(m),
                            [sigma, m](double t, double w) { return -std::pow(t, sigma) * std::pow(w, m); }, {},
                            singular);
    }
    return eq;
}

BoundTriple ef_bounds(const EFParams& p) {
    const double rho = p.rho, sigma = p.sigma;
    return {[rho](double t) { return std::pow(t, rho); }, [](double) { return 0.0; },
            [sigma](double t) { return -std::pow(t, sigma); }};
}

std::string_view to_string(EFCase c) {
    switch (c) {
        case EFCase::Bounded43: return "A<1";
        case EFCase::Bounded44: return "B<1";
        case EFCase::Neither: return "neither";
    }
    return "unknown";
}

EFClosedForms ef_bounds_A_B(const EFParams& p, double t0, double c1, double c2) {
    if (!(p.rho > 1.0)) throw DomainError("closed-form bounds require rho > 1");
    if (!(t0 > 0.0)) throw DomainError("closed-form bounds require t0 > 0");
    const double rho = p.rho, sigma = p.sigma;
    const double lead = c2 * std::pow(t0, 1.0 - rho) / (rho - 1.0);
    const double tail = std::pow(t0, sigma + 2.0 - rho);
    EFClosedForms out;
    if (sigma > -1.0 && sigma < rho - 2.0) {
        out.A = std::abs(c1) * std::exp(lead - tail / ((sigma + 1.0) * (sigma + 2.0 - rho)));
    }
    if (sigma < -1.0) {
        out.B = std::abs(c1) * std::exp(lead - tail / ((sigma + 1.0) * (rho - 1.0)));
    }
    if (out.A && *out.A < 1.0) {
        out.which = EFCase::Bounded43;
    } else if (out.B && *out.B < 1.0) {
        out.which = EFCase::Bounded44;
    }
    return out;
}

double KneserSolution::phi(double t) const { return C * std::pow(t, k); }
double KneserSolution::dphi(double t) const { return C * k * std::pow(t, k - 1.0); }
double KneserSolution::ddphi(double t) const { return C * k * (k - 1.0) * std::pow(t, k - 2.0); }

KneserSolution kneser_solution(const EFParams& p) {
    if (p.rho != 0.0) throw DomainError("Kneser solution requires rho = 0");
    if (!(p.sigma + p.n + 1.0 < 0.0)) throw DomainError("Kneser solution requires sigma + n + 1 < 0");
    if (!(p.n > 1.0)) throw DomainError("Kneser solution requires n > 1");
    const double m = p.n - 1.0;
    KneserSolution s;
    s.k = -(p.sigma + 2.0) / m;
    s.C = std::pow((p.sigma + 2.0) * (p.sigma + p.n + 1.0) / (m * m), 1.0 / m);
    return s;
}

EFTransform ef_transform(const EFParams& p) {
    if (p.rho == 1.0) throw DomainError("transformation undefined for rho = 1");
    if (!(p.n > 1.0)) throw DomainError("transformation requires n > 1");
    EFTransform tr;
    tr.params = p;
    const double rho = p.rho, sigma = p.sigma, m = p.n - 1.0;
    if (rho > 1.0) {
        tr.sigma1 = (sigma + rho) / (rho - 1.0) - (p.n + 3.0);
        tr.K = std::pow(rho - 1.0, (3.0 * rho - sigma - 4.0) / ((rho - 1.0) * m));
    } else {
        tr.sigma1 = (sigma + rho) / (1.0 - rho);
        tr.K = std::pow(1.0 - rho, -(sigma + rho) / (m * (1.0 - rho)));
    }
    return tr;
}

double EFTransform::s_of_t(double t) const {
    const double rho = params.rho;
    return rho > 1.0 ? std::pow(t, rho - 1.0) / (rho - 1.0) : std::pow(t, 1.0 - rho) / (1.0 - rho);
}

double EFTransform::t_of_s(double s) const {
    const double rho = params.rho;
    return rho > 1.0 ? std::pow((rho - 1.0) * s, 1.0 / (rho - 1.0))
                     : std::pow((1.0 - rho) * s, 1.0 / (1.0 - rho));
}

std::array<double, 2> EFTransform::forward(double t, double phi, double dphi) const {
    const double rho = params.rho;
    if (rho > 1.0) {
        const double s = s_of_t(t);
        // dphi/ds = phi' dt/ds = phi' t^(2 - rho)
        return {s * phi / K, (phi + s * dphi * std::pow(t, 2.0 - rho)) / K};
    }
    return {phi / K, dphi * std::pow(t, rho) / K};
}

std::array<double, 2> EFTransform::inverse(double s, double psi, double dpsi) const {
    const double rho = params.rho;
    const double t = t_of_s(s);
    if (rho > 1.0) {
        const double dphi_ds = K * (dpsi * s - psi) / (s * s);
        return {K * psi / s, dphi_ds * std::pow(t, rho - 2.0)};
    }
    return {K * psi, K * dpsi * std::pow(t, -rho)};
}

EFParams EFTransform::target() const {
    return {0.0, sigma1, params.n, EFVariant::Absolute};
}

namespace {

void require_region_IV(const EFParams& p, double t0) {
    if (!(p.rho > 1.0) || !(p.sigma < -1.0)) {
        throw DomainError("conditional stability requires rho > 1 and sigma < -1");
    }
    if (!(t0 > 0.0)) throw DomainError("conditional stability requires t0 > 0");
}

}  // namespace

double conditional_stability_delta(const EFParams& p, double t0, double eps) {
    require_region_IV(p, t0);
    if (!(eps > 0.0)) throw DomainError("conditional stability requires eps > 0");
    const double s1 = p.sigma + 1.0;
    return 0.5 * eps / (1.0 - std::pow(t0, s1) / s1) *
           std::exp(std::pow(t0, p.sigma + 2.0 - p.rho) / (s1 * (p.rho - 1.0)));
}

double stability_manifold_limit(const EFParams& p, double t0) {
    require_region_IV(p, t0);
    return std::exp(std::pow(t0, p.sigma + 2.0 - p.rho) / ((p.sigma + 1.0) * (p.rho - 1.0)));
}

std::vector<StabilityRun> conditional_stability_experiment(const EFParams& p, double t0, double eps,
                                                           std::size_t count, double horizon,
                                                           const IntegrationOptions& opts) {
    const double delta = conditional_stability_delta(p, t0, eps);
    if (count == 0) throw DomainError("conditional stability experiment needs at least one run");
    const auto eq = ef_equation(p, t0);
    auto o = opts;
    o.horizon = horizon;
    std::vector<StabilityRun> runs;
    for (std::size_t k = 0; k < count; ++k) {
        StabilityRun run;
        run.phi0 = delta * (static_cast<double>(k) + 0.5) / static_cast<double>(count);
        const auto traj = integrate(eq, {t0, run.phi0, 0.0}, o);
        // psi = t^rho phi' is carried by the integrator directly.
        for (std::size_t i = 0; i < traj.times().size(); ++i) {
            run.sup = std::max(run.sup, std::abs(traj.phi()[i]) + std::abs(traj.psi()[i]));
        }
        run.terminal = traj.terminal().kind;
        run.within = run.terminal == Terminal::ReachedHorizon && run.sup < eps;
        runs.push_back(run);
    }
    return runs;
}

bool ef_region_III(const EFParams& p) {
    return p.rho > std::max(1.0, p.sigma + 2.0) || ((p.sigma - 1.0) / p.n + 1.0 < p.rho && p.rho < 1.0);
}

bool ef_region_IV(const EFParams& p) { return p.rho > 1.0 && p.sigma < -1.0; }

Certificate ef_check_T3_1(const EFParams& p, double t0, const InitialData& ic, const Region& region,
                          const Grid& grid, const EnvelopeOptions& opt) {
    const auto eq = ef_equation(p, t0);
    auto cert = check_T3_1(eq, ic, ef_bounds(p), region, grid, opt);
    if (cert.status != Status::Verified || !(p.rho > 1.0)) return cert;
    const double c1 = ic.phi0;
    const double c2 = eq.p0(ic.t1, ic.phi0) * ic.phi1 / ic.phi0;
    const auto forms = ef_bounds_A_B(p, ic.t1, c1, c2);
    if (forms.A) {
        cert.uniform_bound = *forms.A;
        cert.notes["closed_form"] = "A";
    } else if (forms.B) {
        cert.uniform_bound = *forms.B;
        cert.notes["closed_form"] = "B";
    }
    cert.notes["closed_form_case"] = std::string(to_string(forms.which));
    return cert;
}

EquationSpec vdp_equation(const VdPParams& v, double t0, double t_check) {
    if (!v.lambda || !v.mu || !v.nu) throw ConfigError("van der Pol coefficients must all be given");
    if (!(t_check > t0)) throw DomainError("van der Pol check interval must be nonempty");
    for (double t : linspace(t0, t_check, 129)) {
        const double l = v.lambda(t), m = v.mu(t), n = v.nu(t);
        if (!(l > 0.0)) throw DomainError("van der Pol requires lambda > 0; lambda(" + num(t) + ") = " + num(l));
        if (!(m >= 0.0)) throw DomainError("van der Pol requires mu >= 0; mu(" + num(t) + ") = " + num(m));
        if (!(n >= 0.0)) throw DomainError("van der Pol requires nu >= 0; nu(" + num(t) + ") = " + num(n));
    }
    EquationSpec eq;
    eq.t0 = t0;
    eq.p0 = ScalarField::of_time(v.lambda_name, v.lambda, {Tag::Positive});
    auto mu = v.mu;
    eq.q0 = ScalarField(v.mu_name + " (w^2 - 1)", [mu](double t, double w) { return mu(t) * (w * w - 1.0); },
                        {Tag::MonotoneInWEven});
    eq.r0 = ScalarField::of_time(v.nu_name, v.nu, {Tag::Nonnegative});
    return eq;
}

ComparisonFamily vdp_family(const VdPParams& v) {
    auto l = v.lambda, m = v.mu, n = v.nu;
    return {ScalarField("p_eps", [l](double t, double) { return l(t); }),
            ScalarField("q_eps", [m](double t, double e) { return m(t) * (e * e - 1.0); }),
            ScalarField("r_eps", [n](double t, double) { return n(t); })};
}

Certificate check_T4_2(const VdPParams& v, double eps0, const Region& region, const Grid& grid,
                       const T35Options& opt) {
    const auto eq = vdp_equation(v, region.t_lo, region.t_hi);
    Certificate cert;
    cert.theorem = Theorem::T4_2;
    cert.conclusion = "GLOBAL_AND_OSCILLATORY";
    cert.grid = grid;
    cert.region = region;
    cert.epsilon = eps0;

    auto global = check_T3_6(eq, region, grid);
    const BoundTriple b{v.lambda, [](double) { return 0.0; }, v.nu};
    auto osc = check_T3_5(eq, b, vdp_family(v), 1.0, eps0, region, grid, opt);
    cert.heuristic = osc.heuristic;
    cert.eps_samples = osc.eps_samples;
    cert.region.w_lo = std::min(global.region.w_lo, osc.region.w_lo);
    cert.region.w_hi = std::max(global.region.w_hi, osc.region.w_hi);
    cert.parts = {std::move(global), std::move(osc)};
    cert.status = aggregate(cert.parts);
    for (const auto& part : cert.parts) {
        if (part.status == Status::Falsified && !cert.witness) cert.witness = part.witness;
        if (part.status == Status::Inconclusive) {
            cert.reason += (cert.reason.empty() ? "" : "; ") + std::string(to_string(part.theorem)) + ": " +
                           part.reason;
        }
    }
    if (cert.status != Status::Inconclusive) cert.reason.clear();

    // Uniqueness of the system on the sampled phase box.
    const double wmax = std::max(std::abs(cert.region.w_lo), std::abs(cert.region.w_hi));
    double vmax = 0.0;
    for (double t : linspace(region.t_lo, region.t_hi, 17)) vmax = std::max(vmax, v.lambda(t) * wmax);
    const auto lip = system_lipschitz_estimate(eq, {region.t_lo, region.t_hi, -wmax, wmax, -vmax, vmax}, grid);
    cert.notes["system_lipschitz"] = {{"constant", lip.constant}, {"unbounded", lip.unbounded}};
    cert.heuristic.push_back("uniqueness: sampled Lipschitz constant of the system");
    return cert;
}

}  // namespace rcert
