#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "rcert/field.hpp"

namespace rcert {

struct QuadTolerance {
    double abs = 1e-10;
    double rel = 1e-8;
    std::size_t max_panels = 200000;

    QuadTolerance tightened(double factor) const { return {abs / factor, rel / factor, max_panels}; }
};

struct RuleResult {
    double value = 0.0;
    double error = 0.0;
};

/// 7-point Gauss / 15-point Kronrod pair on [a, b].
RuleResult gauss_kronrod15(const TimeFunction& f, double a, double b);

struct Panel {
    double a = 0.0;
    double b = 0.0;
    double value = 0.0;
    double error = 0.0;
};

/// Globally adaptive bisection of [a, b] until the summed Kronrod error is
/// below max(abs, rel * |integral|). Panels are returned ordered by position.
/// `breaks` are interior points that always become panel edges.
std::vector<Panel> adaptive_panels(const TimeFunction& f, double a, double b,
                                   const QuadTolerance& tol = {},
                                   const std::vector<double>& breaks = {});

double integrate(const TimeFunction& f, double a, double b, const QuadTolerance& tol = {});

/// Antiderivative x -> int_a^x f on [a, b], memoized on an adaptive mesh.
/// Queries inside a panel are completed with a Kronrod rule on the partial
/// panel, so each evaluation costs O(log n + 15).
class Cumulative {
public:
    Cumulative(TimeFunction f, double a, double b, const QuadTolerance& tol = {},
               const std::vector<double>& breaks = {});

    double operator()(double x) const;
    double total() const noexcept { return prefix_.back(); }
    double lower() const noexcept { return edges_.front(); }
    double upper() const noexcept { return edges_.back(); }
    std::size_t panel_count() const noexcept { return edges_.size() - 1; }
    /// Panel edges, usable as breakpoints for integrands built on top of this one.
    const std::vector<double>& edges() const noexcept { return edges_; }

private:
    TimeFunction f_;
    std::vector<double> edges_;
    std::vector<double> prefix_;
};

/// x -> int_a^x exp{-int_s^x v} g(s) ds, the exponentially weighted running
/// integral that appears as I^-_{v,g}(a; x). Panel contributions are carried
/// forward with the local weight exp{-(V(b_k) - V(b_{k-1}))}, so no global
/// exp{V} factor is ever formed.
class WeightedCumulative {
public:
    WeightedCumulative(std::shared_ptr<const Cumulative> V, TimeFunction g,
                       const QuadTolerance& tol = {});

    double operator()(double x) const;
    double total() const noexcept { return at_edge_.back(); }
    const std::vector<double>& edges() const noexcept { return edges_; }

private:
    double partial(std::size_t k, double x) const;

    std::shared_ptr<const Cumulative> V_;
    TimeFunction g_;
    std::vector<double> edges_;
    std::vector<double> at_edge_;
};

/// I^+_{u,v}(t1; t) = int_{t1}^t exp{-int_{t1}^tau v} dtau / u(tau); u > 0.
double i_plus(const TimeFunction& u, const TimeFunction& v, double t1, double t,
              const QuadTolerance& tol = {});

/// I^-_{v,x}(t1; t) = int_{t1}^t exp{-int_tau^t v} x(tau) dtau.
double i_minus(const TimeFunction& v, const TimeFunction& x, double t1, double t,
               const QuadTolerance& tol = {});

/// The growth bound F(t1; t; c1; c2) on a whole interval [t1, t_max], with the
/// nested integrals built once on shared meshes so that F can be sampled at
/// many t cheaply.
class FEnvelope {
public:
    FEnvelope(BoundTriple bounds, double t1, double t_max, const QuadTolerance& tol = {});

    /// c2 * I^+_{P,Q}(t1; t) - int_{t1}^t I^-_{Q,R}(t1; tau) dtau / P(tau)
    double exponent(double t, double c2) const;
    /// |c1| exp(exponent). Throws RangeError when the result overflows.
    double operator()(double t, double c1, double c2) const;

    double t1() const noexcept { return t1_; }
    double t_max() const noexcept { return t_max_; }

private:
    double t1_;
    double t_max_;
    std::unique_ptr<Cumulative> iplus_;
    std::unique_ptr<Cumulative> outer_;
};

/// The bound G_x(t1; t; c1; c2) = |c1| exp{c2 I^+_{P,Q} + int x / P}.
class GEnvelope {
public:
    GEnvelope(TimeFunction P, TimeFunction Q, TimeFunction x, double t1, double t_max,
              const QuadTolerance& tol = {});

    double exponent(double t, double c2) const;
    double operator()(double t, double c1, double c2) const;

    double t1() const noexcept { return t1_; }
    double t_max() const noexcept { return t_max_; }

private:
    double t1_;
    double t_max_;
    std::unique_ptr<Cumulative> iplus_;
    std::unique_ptr<Cumulative> drift_;
};

double eval_F(const BoundTriple& bounds, double t1, double t, double c1, double c2,
              const QuadTolerance& tol = {});

double eval_G(const TimeFunction& P, const TimeFunction& Q, const TimeFunction& x, double t1,
              double t, double c1, double c2, const QuadTolerance& tol = {});

/// Running maximum M(t) = max_{xi in [t1, t]} f(xi), tabulated on `samples`
/// uniform points of [t1, t_end] and completed with f(t) between them.
TimeFunction running_max(TimeFunction f, double t1, double t_end, std::size_t samples = 4097);

enum class Divergence { Diverging, Converging, Inconclusive };

std::string_view to_string(Divergence d);

/// Geometric horizons T_k = first * ratio^k, k = 0..octaves. `first <= 0`
/// selects t0 when t0 > 0 and 1 otherwise.
struct HorizonSpec {
    double first = 0.0;
    double ratio = 2.0;
    int octaves = 20;
};

struct DivergenceVerdict {
    Divergence status = Divergence::Inconclusive;
    /// (T, int_{t0}^T integrand), strictly increasing in T.
    std::vector<std::pair<double, double>> horizons;
    /// Tail increment ratios that decided the verdict.
    std::vector<double> tail_ratios;
    /// Always true: the verdict comes from finitely many horizons.
    bool heuristic = true;
};

/// Numerical verdict on whether int_{t0}^infinity integrand diverges, from
/// the increments over successive octaves [T_{k-1}, T_k]. The integrand must
/// be nonnegative; a negative sample raises DomainError.
DivergenceVerdict divergence_probe(const TimeFunction& integrand, double t0,
                                   const HorizonSpec& horizons = {},
                                   const QuadTolerance& tol = {});

/// tau -> exp{-int_{t0}^tau Q} / P(tau) on [t0, t_max].
TimeFunction damped_reciprocal(TimeFunction P, TimeFunction Q, double t0, double t_max,
                               const QuadTolerance& tol = {});

/// tau -> (1 / P(tau)) int_{t0}^tau exp{-int_s^tau q} r(s) ds on [t0, t_max].
/// Each evaluation runs its own inner adaptive quadrature, which stays stable
/// for large int q where the memoized form would overflow.
TimeFunction nested_kernel_integrand(TimeFunction P, TimeFunction q, TimeFunction r, double t0,
                                     double t_max, const QuadTolerance& tol = {});

}  // namespace rcert
