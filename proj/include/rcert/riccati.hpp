#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "rcert/dp5.hpp"
#include "rcert/dyn.hpp"
#include "rcert/quad.hpp"

namespace rcert {

struct Segment {
    double a = 0.0;
    double b = 0.0;
};

/// y = p0(t, phi) phi' / phi = psi / phi along a zero-free piece of a trajectory.
struct RiccatiPath {
    std::shared_ptr<const Trajectory> base;
    double a = 0.0;
    double b = 0.0;
    /// Defaults to psi / phi on the dense output; tests may substitute a
    /// perturbed function to exercise the residual oracles.
    TimeFunction y;
    /// Trajectory sample times inside [a, b], both ends included.
    std::vector<double> mesh;

    double phi(double t) const { return base->phi_at(t); }
    double p0(double t) const { return base->equation().p0(t, phi(t)); }
    double q0(double t) const { return base->equation().q0(t, phi(t)); }
    double r0(double t) const { return base->equation().r0(t, phi(t)); }
};

/// Maximal intervals between consecutive zeros of phi (and the trajectory
/// ends), each shrunk by one mesh cell at an end that touches a zero.
std::vector<Segment> extract_segments(const Trajectory& traj);

/// Raises DomainError when phi has a zero in [a, b] or |phi| <= zero_tol at a
/// mesh point of the segment.
RiccatiPath transform(std::shared_ptr<const Trajectory> traj, Segment segment);

/// Residual of phi(t) = phi(a) exp int_a^t y / p0, normalized by max |phi|.
double representation_residual(const RiccatiPath& path);

/// Residual of y(t) = y(a) e^{-V(t)} - I^-_{v, r0}(a; t) with v = (y + q0) / p0,
/// normalized by max |y|.
double cauchy_residual(const RiccatiPath& path);

/// Residual of the difference identity for d = y1 - y0 with the bracket
/// linearized around y_j (j = 0 or 1), normalized by max |d|. The paths may
/// belong to different equations; each coefficient is evaluated along its
/// own solution.
double difference_residual(const RiccatiPath& path0, const RiccatiPath& path1, int j);

/// Residual of the flux identity psi(t) = psi(a) e^{-int q0/p0} - I^-_{q0/p0, r0 phi}(a; t),
/// normalized by max |psi|. Valid across zeros of phi.
double flux_residual(const Trajectory& traj, double a, double b);

/// Residual of the Volterra form
/// phi(t) = phi(a) + psi(a) I^+_{p0, q0/p0}(a; t) - int_a^t I^-_{q0/p0, r0 phi}(a; tau) dtau / p0,
/// normalized by max |phi|.
double volterra_residual(const Trajectory& traj, double a, double b);

/// Scalar solution of y' = -y^2 / P - (Q / P) y - R.
struct ComparisonRiccati {
    bool exists_on_span = false;
    std::optional<double> escape_time;
    std::vector<double> t;
    std::vector<double> y;
    std::vector<DormandPrince<1>::Dense> dense;

    double value(double at) const;
};

struct ComparisonOptions {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double escape_threshold = 1e8;
    double min_step = 1e-13;
};

ComparisonRiccati comparison_riccati_exists(const BoundTriple& b, double y_init, double t1, double t2,
                                            const ComparisonOptions& opts = {});

struct PathCheck {
    /// False when the hypotheses of the check do not hold on the sampled path.
    bool applicable = true;
    bool holds = true;
    /// Most adverse value of the checked quantity and where it occurred.
    double worst = 0.0;
    double at = 0.0;
};

/// Along the segment: if y(a) >= 0 and r0(t, phi(t)) <= 0 at every mesh
/// point, then y(t) >= -y_tol there.
PathCheck nonnegative_riccati_check(const RiccatiPath& path, double y_tol);

/// On the common segment: y1(t) > y0(t) - y_tol at every mesh point of both paths.
PathCheck ordered_riccati_check(const RiccatiPath& path0, const RiccatiPath& path1, double y_tol);

}  // namespace rcert
