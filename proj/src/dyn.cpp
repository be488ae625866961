#include "rcert/dyn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "rcert/errors.hpp"
#include "rcert/format.hpp"

namespace rcert {

namespace {

// Escape is corroborated when the e-folding time of |phi| + |psi| is this
// small relative to the elapsed time.
constexpr double kEfoldFraction = 1e-4;
// Step collapse counts as escape after this much growth of |phi| + |psi|.
constexpr double kCollapseGrowth = 1e4;

int sign_of(double x) { return (x > 0.0) - (x < 0.0); }

void validate(const EquationSpec& eq, const InitialData& ic, const IntegrationOptions& o) {
    if (!(o.rel_tol > 0.0) || !(o.abs_tol > 0.0)) throw DomainError("integrate: tolerances must be positive");
    if (!(o.horizon > 0.0) || !std::isfinite(o.horizon)) throw DomainError("integrate: horizon must be positive");
    if (!(o.escape_threshold > 0.0) || !(o.min_step > 0.0) || !(o.zero_tol >= 0.0)) {
        throw DomainError("integrate: invalid escape threshold, min_step or zero_tol");
    }
    if (!std::isfinite(ic.t1) || !std::isfinite(ic.phi0) || !std::isfinite(ic.phi1)) {
        throw DomainError("integrate: initial data must be finite");
    }
    if (!std::isfinite(eq.t0) || ic.t1 < eq.t0) throw DomainError("integrate: t1 must be >= t0");
}

}  // namespace

std::string_view to_string(Terminal t) {
    switch (t) {
        case Terminal::ReachedHorizon: return "reached_horizon";
        case Terminal::FiniteEscape: return "finite_escape";
        case Terminal::StepCollapse: return "step_collapse";
        case Terminal::Truncated: return "truncated";
    }
    return "unknown";
}

std::size_t Trajectory::segment_index(double t) const {
    const double slack = 1e-12 * (1.0 + std::abs(t_.back()));
    if (t < t_.front() - slack || t > t_.back() + slack) {
        std::ostringstream os;
        os.precision(17);
        os << "trajectory queried at t=" << t << " outside [" << t_.front() << ", " << t_.back() << "]";
        throw DomainError(os.str());
    }
    if (dense_.empty()) return 0;
    auto it = std::upper_bound(t_.begin(), t_.end(), t);
    auto k = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, it - t_.begin() - 1));
    return std::min(k, dense_.size() - 1);
}

std::array<double, 2> Trajectory::state(double t) const {
    const auto k = segment_index(t);
    if (dense_.empty()) return {phi_.front(), psi_.front()};
    if (t >= t_.back()) return {phi_.back(), psi_.back()};
    if (t == t_[k]) return {phi_[k], psi_[k]};
    return dense_[k](t);
}

double Trajectory::dphi_at(double t) const {
    const auto s = state(t);
    return s[1] / eq_.p0(t, s[0]);
}

Trajectory integrate(const EquationSpec& eq, const InitialData& ic, const IntegrationOptions& opts) {
    validate(eq, ic, opts);
    using State = Trajectory::Stepper::State;

    auto rhs = [&eq](double t, const State& s) -> State {
        const double p = eq.p0(t, s[0]);
        if (!(p > 0.0)) {
            std::ostringstream os;
            os.precision(17);
            os << "p0 is not positive at (t=" << t << ", w=" << s[0] << "): " << p;
            throw DomainError(os.str());
        }
        return {s[1] / p, -eq.r0(t, s[0]) * s[0] - eq.q0(t, s[0]) / p * s[1]};
    };

    Trajectory traj;
    traj.eq_ = eq;
    traj.ic_ = ic;
    traj.opts_ = opts;

    double t = ic.t1;
    State y{ic.phi0, eq.p0(ic.t1, ic.phi0) * ic.phi1};
    if (!(eq.p0(ic.t1, ic.phi0) > 0.0)) throw DomainError("integrate: p0 is not positive at the initial point");
    traj.t_.push_back(t);
    traj.phi_.push_back(y[0]);
    traj.psi_.push_back(y[1]);

    const double T = ic.t1 + opts.horizon;
    const double norm0 = std::abs(y[0]) + std::abs(y[1]);
    const bool nontrivial = norm0 > 0.0;
    int last_sign = sign_of(y[0]);

    Trajectory::Stepper stepper(rhs, {opts.rel_tol, opts.abs_tol, true, std::max(opts.horizon, 1.0)});
    double h = stepper.initial_step(t, y, opts.horizon);
    Trajectory::Stepper::Dense dense;
    std::size_t steps = 0;

    auto finish = [&](Terminal kind, double at, double bracket, std::string reason) {
        traj.terminal_ = {kind, at, bracket, std::move(reason)};
    };

    while (true) {
        if (t >= T) {
            finish(Terminal::ReachedHorizon, T, 0.0, "");
            break;
        }
        const double hmin = opts.min_step * std::max(1.0, std::abs(t));
        if (h >= T - t || T - t - h < hmin) h = T - t;
        const double norm = std::abs(y[0]) + std::abs(y[1]);
        if (h < hmin) {
            if (norm >= kCollapseGrowth * (1.0 + norm0)) {
                finish(Terminal::FiniteEscape, t, hmin, "step size collapsed during growth");
            } else {
                finish(Terminal::StepCollapse, t, 0.0, "step size fell below the minimum");
            }
            break;
        }
        if (++steps > opts.max_steps) {
            finish(Terminal::StepCollapse, t, 0.0, "step budget exhausted");
            break;
        }

        Trajectory::Stepper::Outcome outcome;
        try {
            outcome = stepper.step(t, y, h, dense);
        } catch (const EvaluationError&) {
            // A trial stage can leave the range of the fields while the
            // solution itself is still representable; retry with a shorter step.
            if (h * 0.1 < hmin && norm < kCollapseGrowth * (1.0 + norm0)) throw;
            h *= 0.1;
            continue;
        }
        if (outcome == Trajectory::Stepper::Outcome::Rejected) continue;

        traj.t_.push_back(t);
        traj.phi_.push_back(y[0]);
        traj.psi_.push_back(y[1]);
        traj.dense_.push_back(dense);

        const int s = sign_of(y[0]);
        if (s != 0 && last_sign != 0 && s != last_sign) {
            double lo = dense.t0, hi = t;
            const int slo = sign_of(dense(lo)[0]);
            if (slo == 0) {
                traj.zeros_.push_back(lo);
            } else {
                const double width = 1e-14 * std::max(1.0, std::abs(t));
                for (int it = 0; it < 200 && hi - lo > width; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    if (sign_of(dense(mid)[0]) == slo) lo = mid;
                    else hi = mid;
                }
                const double a = std::abs(dense(lo)[0]);
                const double b = std::abs(dense(hi)[0]);
                traj.zeros_.push_back(a <= b ? lo : hi);
            }
        }
        if (s != 0) last_sign = s;
        if (nontrivial && std::abs(y[0]) <= opts.zero_tol && std::abs(y[1]) <= opts.zero_tol) {
            traj.tangential_ = true;
        }
        if (traj.zeros_.size() >= opts.max_zeros) {
            finish(Terminal::Truncated, t, 0.0, "zero count reached max_zeros");
            break;
        }

        const double n1 = std::abs(y[0]) + std::abs(y[1]);
        if (n1 > opts.escape_threshold) {
            const auto& f = stepper.derivative();
            const double rate = std::abs(f[0]) + std::abs(f[1]);
            const double tau = rate > 0.0 ? n1 / rate : std::numeric_limits<double>::infinity();
            if (tau < kEfoldFraction * (1.0 + std::abs(t - ic.t1))) {
                std::ostringstream os;
                os.precision(6);
                os << "|phi|+|psi| exceeded " << opts.escape_threshold << " with e-folding time " << tau;
                finish(Terminal::FiniteEscape, t, 4.0 * tau, os.str());
                break;
            }
        }
    }
    return traj;
}

RefineReport refine_check(const EquationSpec& eq, const InitialData& ic,
                          const IntegrationOptions& opts) {
    IntegrationOptions fine = opts;
    fine.rel_tol /= 10.0;
    fine.abs_tol /= 10.0;
    const auto a = integrate(eq, ic, opts);
    const auto b = integrate(eq, ic, fine);
    RefineReport rep;
    rep.tol_coarse = opts.rel_tol;
    rep.tol_fine = fine.rel_tol;
    rep.t_common = std::min(a.t_end(), b.t_end());
    rep.grid_points = 201;
    if (rep.t_common <= ic.t1) return rep;
    for (double t : linspace(ic.t1, rep.t_common, rep.grid_points)) {
        const auto sa = a.state(t);
        const auto sb = b.state(t);
        rep.max_dphi = std::max(rep.max_dphi, std::abs(sa[0] - sb[0]));
        rep.max_dpsi = std::max(rep.max_dpsi, std::abs(sa[1] - sb[1]));
    }
    return rep;
}

void write_trajectory_csv(const Trajectory& traj, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    const double zt = traj.options().zero_tol;
    out << "t,phi,psi,y\n";
    for (std::size_t k = 0; k < traj.times().size(); ++k) {
        const double phi = traj.phi()[k];
        const double psi = traj.psi()[k];
        out << format_double(traj.times()[k]) << ',' << format_double(phi) << ','
            << format_double(psi) << ',';
        if (std::abs(phi) > zt) out << format_double(psi / phi);
        out << '\n';
    }
}

void write_trajectory_sidecar(const Trajectory& traj, const std::filesystem::path& path) {
    nlohmann::ordered_json j;
    const auto& term = traj.terminal();
    j["terminal"] = {{"kind", std::string(to_string(term.kind))},
                     {"t", term.t},
                     {"bracket", term.bracket},
                     {"reason", term.reason}};
    j["ic"] = {{"t1", traj.ic().t1}, {"phi0", traj.ic().phi0}, {"phi1", traj.ic().phi1}};
    j["zero_count"] = traj.zeros().size();
    j["zeros"] = traj.zeros();
    j["tangential_zero"] = traj.tangential_zero();
    const auto& o = traj.options();
    j["options"] = {{"rel_tol", o.rel_tol},       {"abs_tol", o.abs_tol},
                    {"horizon", o.horizon},       {"escape_threshold", o.escape_threshold},
                    {"min_step", o.min_step},     {"max_zeros", o.max_zeros},
                    {"zero_tol", o.zero_tol}};
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out << j.dump(2) << '\n';
}

}  // namespace rcert
