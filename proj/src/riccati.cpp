#include "rcert/riccati.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "rcert/errors.hpp"

namespace rcert {

namespace {

// Quadrature inside the oracles must be well below the integrator error.
const QuadTolerance kOracleTol{1e-14, 1e-12, 400000};

std::vector<double> mesh_between(const Trajectory& traj, double a, double b) {
    std::vector<double> mesh{a};
    for (double t : traj.times()) {
        if (t > a && t < b) mesh.push_back(t);
    }
    if (b > a) mesh.push_back(b);
    return mesh;
}

// Mesh points plus cell midpoints.
std::vector<double> probe_points(const std::vector<double>& mesh) {
    std::vector<double> out;
    out.reserve(2 * mesh.size());
    for (std::size_t k = 0; k < mesh.size(); ++k) {
        if (k > 0) out.push_back(0.5 * (mesh[k - 1] + mesh[k]));
        out.push_back(mesh[k]);
    }
    return out;
}

double normalized(double num, double scale) {
    if (num == 0.0) return 0.0;
    return num / (scale > 0.0 ? scale : 1.0);
}

}  // namespace

std::vector<Segment> extract_segments(const Trajectory& traj) {
    const auto& ts = traj.times();
    std::vector<double> cuts{traj.t_begin()};
    for (double z : traj.zeros()) cuts.push_back(z);
    cuts.push_back(traj.t_end());
    const double zt = traj.options().zero_tol;

    // Second mesh point strictly after x, or strictly before x when `after` is false.
    auto shrink = [&ts](double x, bool after) -> double {
        if (after) {
            auto it = std::upper_bound(ts.begin(), ts.end(), x);
            if (it == ts.end() || it + 1 == ts.end()) return std::numeric_limits<double>::infinity();
            return *(it + 1);
        }
        auto it = std::lower_bound(ts.begin(), ts.end(), x);
        if (it - ts.begin() < 2) return -std::numeric_limits<double>::infinity();
        return *(it - 2);
    };

    std::vector<Segment> out;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        double a = cuts[k], b = cuts[k + 1];
        const bool a_zero = k > 0 || std::abs(traj.phi_at(a)) <= zt;
        const bool b_zero = k + 2 < cuts.size() || std::abs(traj.phi_at(b)) <= zt;
        if (a_zero) a = shrink(a, true);
        if (b_zero) b = shrink(b, false);
        if (a < b) out.push_back({a, b});
    }
    return out;
}

RiccatiPath transform(std::shared_ptr<const Trajectory> traj, Segment segment) {
    if (!traj) throw DomainError("transform: null trajectory");
    if (!(segment.b > segment.a)) throw DomainError("transform: empty segment");
    for (double z : traj->zeros()) {
        if (z >= segment.a && z <= segment.b) {
            std::ostringstream os;
            os.precision(17);
            os << "transform: phi changes sign at t=" << z << " inside the segment";
            throw DomainError(os.str());
        }
    }
    RiccatiPath path;
    path.a = segment.a;
    path.b = segment.b;
    path.mesh = mesh_between(*traj, segment.a, segment.b);
    const double zt = traj->options().zero_tol;
    for (double t : path.mesh) {
        if (std::abs(traj->phi_at(t)) <= zt) {
            std::ostringstream os;
            os.precision(17);
            os << "transform: |phi| <= zero_tol at t=" << t;
            throw DomainError(os.str());
        }
    }
    path.y = [tr = traj.get()](double t) {
        const auto s = tr->state(t);
        return s[1] / s[0];
    };
    path.base = std::move(traj);
    return path;
}

double representation_residual(const RiccatiPath& path) {
    Cumulative Y([&path](double t) { return path.y(t) / path.p0(t); }, path.a, path.b, kOracleTol,
                 path.mesh);
    const double phi_a = path.phi(path.a);
    double worst = 0.0, scale = 0.0;
    for (double t : probe_points(path.mesh)) {
        const double phi = path.phi(t);
        scale = std::max(scale, std::abs(phi));
        worst = std::max(worst, std::abs(phi - phi_a * std::exp(Y(t))));
    }
    return normalized(worst, scale);
}

double cauchy_residual(const RiccatiPath& path) {
    auto V = std::make_shared<const Cumulative>(
        [&path](double t) { return (path.y(t) + path.q0(t)) / path.p0(t); }, path.a, path.b,
        kOracleTol, path.mesh);
    WeightedCumulative I(V, [&path](double t) { return path.r0(t); }, kOracleTol);
    const double y_a = path.y(path.a);
    double worst = 0.0, scale = 0.0;
    for (double t : probe_points(path.mesh)) {
        const double y = path.y(t);
        scale = std::max(scale, std::abs(y));
        worst = std::max(worst, std::abs(y - (y_a * std::exp(-(*V)(t)) - I(t))));
    }
    return normalized(worst, scale);
}

double difference_residual(const RiccatiPath& path0, const RiccatiPath& path1, int j) {
    if (j != 0 && j != 1) throw DomainError("difference_residual: j must be 0 or 1");
    const double a = std::max(path0.a, path1.a);
    const double b = std::min(path0.b, path1.b);
    if (!(b > a)) throw DomainError("difference_residual: the paths have no common segment");

    std::vector<double> mesh{a, b};
    for (const auto* p : {&path0, &path1}) {
        for (double t : p->mesh) {
            if (t > a && t < b) mesh.push_back(t);
        }
    }
    std::sort(mesh.begin(), mesh.end());
    mesh.erase(std::unique(mesh.begin(), mesh.end()), mesh.end());

    const RiccatiPath& kpath = j == 0 ? path1 : path0;  // coefficients of the kernel
    auto kernel = [&](double t) {
        return (path0.y(t) + path1.y(t) + kpath.q0(t)) / kpath.p0(t);
    };
    auto bracket = [&](double t) {
        const double yj = j == 0 ? path0.y(t) : path1.y(t);
        const double p0 = path0.p0(t), p1 = path1.p0(t);
        return (1.0 / p1 - 1.0 / p0) * yj * yj + (path1.q0(t) / p1 - path0.q0(t) / p0) * yj +
               path1.r0(t) - path0.r0(t);
    };
    auto W = std::make_shared<const Cumulative>(kernel, a, b, kOracleTol, mesh);
    WeightedCumulative I(W, bracket, kOracleTol);
    const double d_a = path1.y(a) - path0.y(a);
    double worst = 0.0, scale = 0.0;
    for (double t : probe_points(mesh)) {
        const double d = path1.y(t) - path0.y(t);
        scale = std::max(scale, std::abs(d));
        worst = std::max(worst, std::abs(d - (d_a * std::exp(-(*W)(t)) - I(t))));
    }
    return normalized(worst, scale);
}

namespace {

struct AlongPath {
    const Trajectory& tr;
    double p(double t) const { return tr.equation().p0(t, tr.phi_at(t)); }
    double q_over_p(double t) const {
        const double phi = tr.phi_at(t);
        return tr.equation().q0(t, phi) / tr.equation().p0(t, phi);
    }
    double r_phi(double t) const {
        const double phi = tr.phi_at(t);
        return tr.equation().r0(t, phi) * phi;
    }
};

void check_span(const Trajectory& traj, double a, double b) {
    if (!(b > a) || a < traj.t_begin() || b > traj.t_end()) {
        throw DomainError("residual span must be a nonempty subinterval of the trajectory");
    }
}

}  // namespace

double flux_residual(const Trajectory& traj, double a, double b) {
    check_span(traj, a, b);
    const AlongPath along{traj};
    const auto mesh = mesh_between(traj, a, b);
    auto V = std::make_shared<const Cumulative>([&](double t) { return along.q_over_p(t); }, a, b,
                                                kOracleTol, mesh);
    WeightedCumulative I(V, [&](double t) { return along.r_phi(t); }, kOracleTol);
    const double psi_a = traj.psi_at(a);
    double worst = 0.0, scale = 0.0;
    for (double t : probe_points(mesh)) {
        const double psi = traj.psi_at(t);
        scale = std::max(scale, std::abs(psi));
        worst = std::max(worst, std::abs(psi - (psi_a * std::exp(-(*V)(t)) - I(t))));
    }
    return normalized(worst, scale);
}

double volterra_residual(const Trajectory& traj, double a, double b) {
    check_span(traj, a, b);
    const AlongPath along{traj};
    const auto mesh = mesh_between(traj, a, b);
    auto V = std::make_shared<const Cumulative>([&](double t) { return along.q_over_p(t); }, a, b,
                                                kOracleTol, mesh);
    Cumulative Iplus([&](double t) { return std::exp(-(*V)(t)) / along.p(t); }, a, b, kOracleTol,
                     mesh);
    auto I = std::make_shared<const WeightedCumulative>(V, [&](double t) { return along.r_phi(t); },
                                                        kOracleTol);
    Cumulative outer([&](double t) { return (*I)(t) / along.p(t); }, a, b, kOracleTol, I->edges());
    const double phi_a = traj.phi_at(a);
    const double psi_a = traj.psi_at(a);
    double worst = 0.0, scale = 0.0;
    for (double t : probe_points(mesh)) {
        const double phi = traj.phi_at(t);
        scale = std::max(scale, std::abs(phi));
        worst = std::max(worst, std::abs(phi - (phi_a + psi_a * Iplus(t) - outer(t))));
    }
    return normalized(worst, scale);
}

double ComparisonRiccati::value(double at) const {
    if (at < t.front() || at > t.back()) throw DomainError("comparison Riccati queried outside its span");
    if (dense.empty() || at == t.back()) return y.back();
    auto it = std::upper_bound(t.begin(), t.end(), at);
    const auto k = std::min(static_cast<std::size_t>(it - t.begin()) - 1, dense.size() - 1);
    return dense[k](at)[0];
}

ComparisonRiccati comparison_riccati_exists(const BoundTriple& b, double y_init, double t1, double t2,
                                            const ComparisonOptions& opts) {
    if (!(t2 > t1)) throw DomainError("comparison_riccati_exists: empty span");
    using Stepper = DormandPrince<1>;
    auto rhs = [&b](double t, const Stepper::State& s) -> Stepper::State {
        const double P = b.P(t);
        if (!(P > 0.0)) throw DomainError("comparison_riccati_exists: P must be positive");
        return {-s[0] * s[0] / P - b.Q(t) / P * s[0] - b.R(t)};
    };
    ComparisonRiccati out;
    double t = t1;
    Stepper::State y{y_init};
    out.t.push_back(t);
    out.y.push_back(y[0]);
    Stepper stepper(rhs, {opts.rel_tol, opts.abs_tol, true, std::max(t2 - t1, 1.0)});
    double h = stepper.initial_step(t, y, t2 - t1);
    Stepper::Dense dense;
    while (t < t2) {
        const double hmin = opts.min_step * std::max(1.0, std::abs(t));
        if (h >= t2 - t || t2 - t - h < hmin) h = t2 - t;
        if (h < hmin) {
            out.escape_time = t;
            return out;
        }
        if (stepper.step(t, y, h, dense) == Stepper::Outcome::Rejected) continue;
        out.t.push_back(t);
        out.y.push_back(y[0]);
        out.dense.push_back(dense);
        if (std::abs(y[0]) > opts.escape_threshold) {
            out.escape_time = t;
            return out;
        }
    }
    out.exists_on_span = true;
    return out;
}

PathCheck nonnegative_riccati_check(const RiccatiPath& path, double y_tol) {
    PathCheck out;
    out.applicable = path.y(path.a) >= 0.0;
    for (double t : path.mesh) {
        if (path.r0(t) > 0.0) out.applicable = false;
    }
    out.worst = std::numeric_limits<double>::infinity();
    for (double t : probe_points(path.mesh)) {
        const double y = path.y(t);
        if (y < out.worst) {
            out.worst = y;
            out.at = t;
        }
    }
    out.holds = !out.applicable || out.worst >= -y_tol;
    return out;
}

PathCheck ordered_riccati_check(const RiccatiPath& path0, const RiccatiPath& path1, double y_tol) {
    const double a = std::max(path0.a, path1.a);
    const double b = std::min(path0.b, path1.b);
    if (!(b > a)) throw DomainError("ordered_riccati_check: the paths have no common segment");
    PathCheck out;
    out.worst = std::numeric_limits<double>::infinity();
    for (const auto* p : {&path0, &path1}) {
        for (double t : p->mesh) {
            if (t < a || t > b) continue;
            const double gap = path1.y(t) - path0.y(t);
            if (gap < out.worst) {
                out.worst = gap;
                out.at = t;
            }
        }
    }
    out.holds = out.worst > -y_tol;
    return out;
}

}  // namespace rcert
