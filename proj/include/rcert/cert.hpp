#pragma once

#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "rcert/dyn.hpp"
#include "rcert/field.hpp"
#include "rcert/quad.hpp"

namespace rcert {

enum class Theorem { T3_1, T3_2, T3_3, T3_4, T3_5, T3_6, T4_2 };
enum class Status { Verified, Falsified, Inconclusive };

std::string_view to_string(Theorem th);
std::string_view to_string(Status st);

/// A sampled point where a hypothesis inequality fails: lhs <= rhs was required.
struct Witness {
    std::string hypothesis;
    double t = 0.0;
    double w = 0.0;
    double lhs = 0.0;
    double rhs = 0.0;
    /// Free-form explanation, used when the failed condition is not a pointwise inequality.
    std::string detail;
};

struct Certificate {
    Theorem theorem = Theorem::T3_1;
    Status status = Status::Inconclusive;
    std::optional<Witness> witness;
    /// Why the status is Inconclusive (empty otherwise).
    std::string reason;
    /// The (t, w) rectangle actually sampled and its resolution.
    Region region;
    Grid grid;
    std::optional<double> epsilon;
    std::string conclusion;
    std::vector<std::string> extra_conclusions;
    std::vector<std::string> hypotheses;
    /// Components decided by finite numerical evidence only.
    std::vector<std::string> heuristic;
    /// Guaranteed envelope |phi(t)| <= bound(t), when the theorem provides one.
    TimeFunction bound;
    std::vector<std::pair<double, double>> bound_curve;
    /// A t-uniform bound known in closed form, when available.
    std::optional<double> uniform_bound;
    std::vector<double> eps_samples;
    std::vector<std::pair<std::string, DivergenceVerdict>> probes;
    std::vector<Certificate> parts;
    nlohmann::ordered_json notes = nlohmann::ordered_json::object();
};

/// Records hypothesis checks in order; the first failure becomes the witness.
class HypothesisLedger {
public:
    /// Requires lhs <= rhs up to grid slack.
    bool require_le(const std::string& hyp, double t, double w, double lhs, double rhs);
    void inconclusive(const std::string& why);
    /// Records a failure that is not a pointwise inequality (e.g. a converging probe).
    void fail(Witness w);
    void note_checked(const std::string& hyp);
    bool falsified() const noexcept { return witness_.has_value(); }
    /// Moves the accumulated verdict into the certificate.
    void finish(Certificate& cert);

private:
    std::optional<Witness> witness_;
    std::vector<std::string> reasons_;
    std::vector<std::string> checked_;
};

/// Worst status over the parts: any Falsified wins (first witness is
/// copied), then any Inconclusive, else Verified.
Status aggregate(const std::vector<Certificate>& parts);

struct EnvelopeOptions {
    /// Defaults to 1e-3 |phi0|.
    std::optional<double> epsilon;
    QuadTolerance tol{};
};

/// Estimate |phi| <= F(t1; t; phi0; p0(t1, phi0) phi1 / phi0) under
/// p0 >= P, q0 / p0 >= Q and R <= r0 <= 0 for |w| <= F + eps. The t-range of
/// `region` is used; the w-range is set by the envelope.
Certificate check_T3_1(const EquationSpec& eq, const InitialData& ic, const BoundTriple& b,
                       const Region& region, const Grid& grid = {}, const EnvelopeOptions& opt = {});

/// As check_T3_1 with the envelope G_M, M the running maximum of Qtilde,
/// under p0 >= P, q0 >= Q >= 0, r0 <= 0 and |p0 r0 / q0| <= Qtilde. b.R is ignored.
Certificate check_T3_2(const EquationSpec& eq, const InitialData& ic, const BoundTriple& b,
                       const TimeFunction& Qtilde, const Region& region, const Grid& grid = {},
                       const EnvelopeOptions& opt = {});

/// A known solution of the majorant equation, given in closed form or as a trajectory.
struct Majorant {
    TimeFunction phi;
    TimeFunction dphi;
    std::string source;
    /// Last time at which phi is known.
    double t_end = std::numeric_limits<double>::infinity();
    /// Sign changes of phi, when known.
    std::vector<double> zeros;

    static Majorant closed_form(TimeFunction phi, TimeFunction dphi, std::string source);
    static Majorant from_trajectory(std::shared_ptr<const Trajectory> traj);
};

/// Comparison of eq0 against a majorant solution of eq1. The t-range of
/// `region` is used; w is sampled over |w| <= max |majorant|.
Certificate check_T3_3(const EquationSpec& eq0, const EquationSpec& eq1, const Majorant& majorant,
                       const InitialData& ic0, const Region& region, const Grid& grid = {});

Certificate check_T3_4(const EquationSpec& eq, const BoundTriple& b, const Region& region,
                       const Grid& grid = {});

/// The linear comparison equations (p(t,eps) phi')' + q(t,eps) phi' + r(t,eps) phi = 0;
/// the second argument of each field is eps.
struct ComparisonFamily {
    ScalarField p;
    ScalarField q;
    ScalarField r;
};

struct OscillationOptions {
    double horizon = 50.0;
    std::size_t min_zeros = 5;
    IntegrationOptions integration{};
};

struct T35Options {
    /// eps values for the |w| >= eps conditions; default eps0 {1, 1/2, 1/4, 1/8}.
    std::vector<double> eps_samples;
    /// eps values for the N <= |w| <= eps conditions; default {N, 2N, 4N}.
    std::vector<double> upper_eps_samples;
    HorizonSpec horizons{};
    OscillationOptions oscillation{};
    QuadTolerance tol{1e-10, 1e-8, 200000};
};

Certificate check_T3_5(const EquationSpec& eq, const BoundTriple& b, const ComparisonFamily& family,
                       double N, double eps0, const Region& region, const Grid& grid = {},
                       const T35Options& opt = {});

Certificate check_T3_6(const EquationSpec& eq, const Region& region, const Grid& grid = {});

/// Zero count of the (p, q, r)(., eps) comparison equation from phi = 1, phi' = 0.
std::size_t comparison_zero_count(const ComparisonFamily& family, double eps, double t0,
                                  const OscillationOptions& opt);

nlohmann::ordered_json to_json(const Certificate& cert);

}  // namespace rcert
