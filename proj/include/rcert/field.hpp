#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rcert {

using TimeFunction = std::function<double(double)>;

/// Structural claims a coefficient field may declare. They are verified on
/// sampling grids, never trusted.
enum class Tag {
    Positive,
    Nonnegative,
    Nonpositive,
    /// Nonincreasing in w on (-inf, 0] and nondecreasing on [0, +inf).
    MonotoneInWEven,
};

std::string_view to_string(Tag tag);

/// A coefficient p0/q0/r0 evaluated at (t, w).
///
/// Evaluation through operator() rejects non-finite results with an
/// EvaluationError. The field may declare w-values where it is singular (or,
/// for p0, where it vanishes); those are treated as excluded from any region
/// a Lipschitz probe is asked about.
class ScalarField {
public:
    using Fn = std::function<double(double, double)>;

    ScalarField();
    ScalarField(std::string name, Fn fn, std::vector<Tag> tags = {},
                std::vector<double> singular_w = {});

    static ScalarField constant(double value);
    /// A field that ignores w.
    static ScalarField of_time(std::string name, TimeFunction fn, std::vector<Tag> tags = {});

    double operator()(double t, double w) const;

    const std::string& name() const noexcept { return name_; }
    const std::vector<Tag>& tags() const noexcept { return tags_; }
    const std::vector<double>& singular_w() const noexcept { return singular_w_; }
    bool has_tag(Tag tag) const noexcept;

private:
    std::string name_;
    Fn fn_;
    std::vector<Tag> tags_;
    std::vector<double> singular_w_;
};

/// The equation (p0(t,phi) phi')' + q0(t,phi) phi' + r0(t,phi) phi = 0, t >= t0.
struct EquationSpec {
    ScalarField p0;
    ScalarField q0;
    ScalarField r0;
    double t0 = 0.0;
};

/// phi(t1) = phi0, phi'(t1) = phi1.
struct InitialData {
    double t1 = 0.0;
    double phi0 = 0.0;
    double phi1 = 0.0;
};

/// Time-only envelopes P > 0, Q, R bounding the coefficient fields.
struct BoundTriple {
    TimeFunction P;
    TimeFunction Q;
    TimeFunction R;
};

struct Point {
    double t = 0.0;
    double w = 0.0;
};

struct Region {
    double t_lo = 0.0;
    double t_hi = 1.0;
    double w_lo = -1.0;
    double w_hi = 1.0;
};

/// Uniform sampling resolution per axis. 129 = 2^7 + 1 so that refinement
/// n -> 2n - 1 nests the coarse points.
struct Grid {
    std::size_t nt = 129;
    std::size_t nw = 129;

    Grid refined() const { return {2 * nt - 1, 2 * nw - 1}; }
};

/// n uniformly spaced points including both endpoints (n >= 2).
std::vector<double> linspace(double lo, double hi, std::size_t n);

/// Sorted w samples of [lo, hi]; w = 0 is added when it lies strictly inside.
std::vector<double> w_samples(double lo, double hi, std::size_t n);

/// Absolute slack used when comparing sampled values; equalities satisfy
/// non-strict inequalities.
double grid_slack(double reference) noexcept;

/// First point where g(t, .) fails to be nonincreasing on w <= 0 and
/// nondecreasing on w >= 0, scanning the given samples.
std::optional<Point> find_even_monotone_violation(const std::function<double(double, double)>& g,
                                                  const std::vector<double>& ts,
                                                  const std::vector<double>& ws);

struct TagCheck {
    Tag tag;
    bool holds = true;
    std::optional<Point> counterexample;
};

struct TagReport {
    std::vector<TagCheck> checks;
    bool all_hold() const noexcept;
};

TagReport verify_structural_tags(const ScalarField& field, const Region& region,
                                 const Grid& grid = {});

struct LipschitzEstimate {
    double constant = 0.0;
    bool unbounded = false;
    /// Declared singular point inside the region, when that is the cause.
    std::optional<Point> singular_point;
    /// Estimates on the successively refined grids.
    std::vector<double> history;
};

/// Sampled Lipschitz constant in w: max |Delta field / Delta w| over the grid,
/// repeated on two nested refinements. The unbounded flag is raised when the
/// region contains a declared singular w, or when the estimate keeps growing
/// under refinement.
LipschitzEstimate lipschitz_estimate(const ScalarField& field, const Region& region,
                                     const Grid& grid = {});

/// Box |t - t1| <= delta, |u - u_c| <= M, |v - v_c| <= N in the (t, phi, psi)
/// phase space of the first-order system.
struct SystemBox {
    double t_lo, t_hi;
    double u_lo, u_hi;
    double v_lo, v_hi;
};

/// Joint Lipschitz estimate in (u, v) of the system right-hand sides
/// f1 = v / p0 and f2 = -r0 u - (q0 / p0) v.
LipschitzEstimate system_lipschitz_estimate(const EquationSpec& eq, const SystemBox& box,
                                            const Grid& grid = {});

struct UniquenessInterval {
    double t2 = 0.0;
    /// Grid maximum of sqrt(f1^2 + f2^2); a lower bound on the true maximum,
    /// so t2 is an upper estimate of the guaranteed length.
    double m0 = 0.0;
    SystemBox box{};
};

/// Picard-Lindeloef interval length t2 = min{delta, sqrt(M^2 + N^2) / M0} around
/// the initial point. The box is clipped to t >= t0; v is centred on
/// psi(t1) = p0(t1, phi0) phi1.
UniquenessInterval uniqueness_interval(const EquationSpec& eq, const InitialData& ic,
                                       double delta, double M, double N, const Grid& grid = {});

}  // namespace rcert
