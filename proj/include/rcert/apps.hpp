#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "rcert/cert.hpp"
#include "rcert/dyn.hpp"

namespace rcert {

// ---------------------------------------------------------------- Emden-Fowler

enum class EFVariant {
    /// (t^rho phi')' - t^sigma phi^n = 0; phi^n is real only for integer n or phi >= 0.
    Signed,
    /// (t^rho phi')' - t^sigma |phi|^(n-1) phi = 0.
    Absolute,
};

struct EFParams {
    double rho = 0.0;
    double sigma = 0.0;
    double n = 3.0;
    EFVariant variant = EFVariant::Absolute;
};

/// p0 = t^rho, q0 = 0, r0 = -t^sigma |w|^(n-1) (or -t^sigma w^(n-1)); t0 > 0.
EquationSpec ef_equation(const EFParams& p, double t0);

/// P = t^rho, Q = 0, R = -t^sigma.
BoundTriple ef_bounds(const EFParams& p);

enum class EFCase { Bounded43, Bounded44, Neither };

std::string_view to_string(EFCase c);

struct EFClosedForms {
    /// |c1| exp{c2 t0^(1-rho)/(rho-1) - t0^(sigma+2-rho)/((sigma+1)(sigma+2-rho))},
    /// a t-uniform bound of F for -1 < sigma < rho - 2.
    std::optional<double> A;
    /// |c1| exp{c2 t0^(1-rho)/(rho-1) - t0^(sigma+2-rho)/((sigma+1)(rho-1))}, for sigma < -1.
    std::optional<double> B;
    EFCase which = EFCase::Neither;
};

/// Requires rho > 1 (DomainError otherwise).
EFClosedForms ef_bounds_A_B(const EFParams& p, double t0, double c1, double c2);

struct KneserSolution {
    double C = 0.0;
    double k = 0.0;
    double phi(double t) const;
    double dphi(double t) const;
    double ddphi(double t) const;
};

/// phi_B = C t^k with C = [(sigma+2)(sigma+n+1)/(n-1)^2]^(1/(n-1)), k = -(sigma+2)/(n-1);
/// requires rho = 0 and sigma + n + 1 < 0.
KneserSolution kneser_solution(const EFParams& p);

/// Change of variables taking the EF equation with rho != 1 to
/// psi'' = s^sigma1 |psi|^(n-1) psi.
struct EFTransform {
    EFParams params;
    double sigma1 = 0.0;
    double K = 1.0;

    double s_of_t(double t) const;
    double t_of_s(double s) const;
    /// (phi, phi') at t -> (psi, dpsi/ds) at s(t).
    std::array<double, 2> forward(double t, double phi, double dphi) const;
    /// (psi, dpsi/ds) at s -> (phi, phi') at t(s).
    std::array<double, 2> inverse(double s, double psi, double dpsi) const;
    /// The transformed equation as an EF instance with rho = 0.
    EFParams target() const;
};

EFTransform ef_transform(const EFParams& p);

/// delta(eps) = (eps/2) (1 - t0^(sigma+1)/(sigma+1))^(-1) exp{t0^(sigma+2-rho)/((sigma+1)(rho-1))};
/// requires rho > 1, sigma < -1, eps > 0.
double conditional_stability_delta(const EFParams& p, double t0, double eps);

/// Upper end of the initial-value segment phi(t0) in [0, exp{t0^(sigma+2-rho)/((sigma+1)(rho-1))}], phi'(t0) = 0.
double stability_manifold_limit(const EFParams& p, double t0);

struct StabilityRun {
    double phi0 = 0.0;
    /// sup over the run of |phi| + |t^rho phi'|.
    double sup = 0.0;
    Terminal terminal = Terminal::ReachedHorizon;
    bool within = false;
};

/// Integrates `count` initial values phi0 = delta (k + 1/2) / count, phi'(t0) = 0
/// and checks sup |phi| + |t^rho phi'| < eps up to the horizon.
std::vector<StabilityRun> conditional_stability_experiment(const EFParams& p, double t0, double eps,
                                                           std::size_t count, double horizon,
                                                           const IntegrationOptions& opts = {});

/// rho > max{1, sigma + 2}, or (sigma - 1)/n + 1 < rho < 1.
bool ef_region_III(const EFParams& p);
/// rho > 1 and sigma < -1.
bool ef_region_IV(const EFParams& p);

/// check_T3_1 on the EF envelope triple; when the closed form A or B applies
/// it becomes the certificate's uniform bound.
Certificate ef_check_T3_1(const EFParams& p, double t0, const InitialData& ic, const Region& region,
                          const Grid& grid = {}, const EnvelopeOptions& opt = {});

// ---------------------------------------------------------------- Van der Pol

struct VdPParams {
    TimeFunction lambda;
    TimeFunction mu;
    TimeFunction nu;
    std::string lambda_name = "lambda";
    std::string mu_name = "mu";
    std::string nu_name = "nu";
};

/// p0 = lambda, q0 = mu (w^2 - 1), r0 = nu. Rejects (DomainError) lambda <= 0,
/// mu < 0 or nu < 0 on 129 samples of [t0, t_check].
EquationSpec vdp_equation(const VdPParams& v, double t0, double t_check);

/// p_eps = lambda, q_eps = mu (eps^2 - 1), r_eps = nu.
ComparisonFamily vdp_family(const VdPParams& v);

/// Global existence via check_T3_6 and oscillation via check_T3_5 with the
/// family above and N = 1; the status is the worse of the two.
Certificate check_T4_2(const VdPParams& v, double eps0, const Region& region, const Grid& grid = {},
                       const T35Options& opt = {});

}  // namespace rcert
