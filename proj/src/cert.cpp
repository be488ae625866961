#include "rcert/cert.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "rcert/errors.hpp"

namespace rcert {

std::string_view to_string(Theorem th) {
    switch (th) {
        case Theorem::T3_1: return "T3_1";
        case Theorem::T3_2: return "T3_2";
        case Theorem::T3_3: return "T3_3";
        case Theorem::T3_4: return "T3_4";
        case Theorem::T3_5: return "T3_5";
        case Theorem::T3_6: return "T3_6";
        case Theorem::T4_2: return "T4_2";
    }
    return "unknown";
}

std::string_view to_string(Status st) {
    switch (st) {
        case Status::Verified: return "Verified";
        case Status::Falsified: return "Falsified";
        case Status::Inconclusive: return "Inconclusive";
    }
    return "unknown";
}

bool HypothesisLedger::require_le(const std::string& hyp, double t, double w, double lhs, double rhs) {
    note_checked(hyp);
    if (witness_) return false;
    if (lhs <= rhs + grid_slack(rhs)) return true;
    witness_ = Witness{hyp, t, w, lhs, rhs, ""};
    return false;
}

void HypothesisLedger::inconclusive(const std::string& why) {
    if (std::find(reasons_.begin(), reasons_.end(), why) == reasons_.end()) reasons_.push_back(why);
}

void HypothesisLedger::fail(Witness w) {
    note_checked(w.hypothesis);
    if (!witness_) witness_ = std::move(w);
}

void HypothesisLedger::note_checked(const std::string& hyp) {
    if (std::find(checked_.begin(), checked_.end(), hyp) == checked_.end()) checked_.push_back(hyp);
}

void HypothesisLedger::finish(Certificate& cert) {
    cert.hypotheses = checked_;
    if (witness_) {
        cert.status = Status::Falsified;
        cert.witness = witness_;
        cert.reason.clear();
    } else if (!reasons_.empty()) {
        cert.status = Status::Inconclusive;
        std::string joined;
        for (const auto& r : reasons_) joined += (joined.empty() ? "" : "; ") + r;
        cert.reason = joined;
    } else {
        cert.status = Status::Verified;
    }
}

Status aggregate(const std::vector<Certificate>& parts) {
    bool inconclusive = false;
    for (const auto& p : parts) {
        if (p.status == Status::Falsified) return Status::Falsified;
        inconclusive = inconclusive || p.status == Status::Inconclusive;
    }
    return inconclusive ? Status::Inconclusive : Status::Verified;
}

namespace {

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(6);
    os << x;
    return os.str();
}

void require_t_range(const Region& region, double t1) {
    if (!std::isfinite(region.t_hi) || !(region.t_hi > t1)) {
        throw DomainError("certificate region must extend beyond the initial time");
    }
}

// Shared part of T3_1 / T3_2: precondition and the constants of the envelope.
struct EnvelopeStart {
    bool ok = false;
    double c1 = 0.0, c2 = 0.0, eps = 0.0;
};

EnvelopeStart envelope_start(const EquationSpec& eq, const InitialData& ic, const EnvelopeOptions& opt,
                             Certificate& cert) {
    EnvelopeStart s;
    if (ic.phi0 == 0.0 || ic.phi1 / ic.phi0 < 0.0) {
        cert.status = Status::Inconclusive;
        cert.reason = "precondition: requires phi0 != 0 and phi1 / phi0 >= 0";
        return s;
    }
    s.ok = true;
    s.c1 = ic.phi0;
    s.c2 = eq.p0(ic.t1, ic.phi0) * ic.phi1 / ic.phi0;
    s.eps = opt.epsilon.value_or(1e-3 * std::abs(ic.phi0));
    if (!(s.eps > 0.0)) throw DomainError("epsilon must be positive");
    cert.epsilon = s.eps;
    return s;
}

// Samples the envelope on the time grid; returns false (and marks the
// certificate Inconclusive) when it overflows.
template <class Env>
bool sample_envelope(const Env& env, const std::vector<double>& ts, const EnvelopeStart& s,
                     std::vector<double>& values, Certificate& cert) {
    values.clear();
    try {
        for (double t : ts) values.push_back(env(t, s.c1, s.c2));
    } catch (const RangeError& e) {
        cert.status = Status::Inconclusive;
        cert.reason = std::string("range: ") + e.what();
        return false;
    }
    return true;
}

void finish_envelope(Certificate& cert, const std::vector<double>& ts, const std::vector<double>& F,
                     const InitialData& ic) {
    if (cert.status != Status::Verified) return;
    for (std::size_t k = 0; k < ts.size(); ++k) cert.bound_curve.emplace_back(ts[k], F[k]);
    if (ic.phi1 != 0.0) cert.extra_conclusions.push_back("DERIVATIVE_NONZERO");
}

}  // namespace

Certificate check_T3_1(const EquationSpec& eq, const InitialData& ic, const BoundTriple& b,
                       const Region& region, const Grid& grid, const EnvelopeOptions& opt) {
    Certificate cert;
    cert.theorem = Theorem::T3_1;
    cert.conclusion = "GLOBAL_MONOTONE_WITH_ESTIMATE";
    cert.grid = grid;
    cert.region = {ic.t1, region.t_hi, 0.0, 0.0};
    require_t_range(region, ic.t1);
    const auto s = envelope_start(eq, ic, opt, cert);
    if (!s.ok) return cert;

    std::shared_ptr<const FEnvelope> F;
    try {
        F = std::make_shared<const FEnvelope>(b, ic.t1, region.t_hi, opt.tol);
    } catch (const RangeError& e) {
        cert.status = Status::Inconclusive;
        cert.reason = std::string("range: ") + e.what();
        return cert;
    }
    const auto ts = linspace(ic.t1, region.t_hi, grid.nt);
    std::vector<double> Fv;
    if (!sample_envelope(*F, ts, s, Fv, cert)) return cert;

    HypothesisLedger L;
    double wmax = 0.0;
    for (std::size_t k = 0; k < ts.size() && !L.falsified(); ++k) {
        const double t = ts[k];
        const double W = Fv[k] + s.eps;
        wmax = std::max(wmax, W);
        const double P = b.P(t), Q = b.Q(t), R = b.R(t);
        if (!(P > 0.0)) L.fail({"P > 0", t, 0.0, P, 0.0, "envelope P must be positive"});
        for (double w : w_samples(-W, W, grid.nw)) {
            const double p = eq.p0(t, w);
            if (!(p > 0.0)) {
                L.fail({"p0 > 0", t, w, p, 0.0, "p0 must be positive"});
                break;
            }
            L.require_le("P <= p0", t, w, P, p);
            L.require_le("Q <= q0/p0", t, w, Q, eq.q0(t, w) / p);
            const double r = eq.r0(t, w);
            L.require_le("R <= r0", t, w, R, r);
            L.require_le("r0 <= 0", t, w, r, 0.0);
            if (L.falsified()) break;
        }
    }
    cert.region.w_lo = -wmax;
    cert.region.w_hi = wmax;
    L.finish(cert);
    if (cert.status == Status::Verified) {
        cert.bound = [F, c1 = s.c1, c2 = s.c2](double t) { return (*F)(t, c1, c2); };
    }
    finish_envelope(cert, ts, Fv, ic);
    return cert;
}

Certificate check_T3_2(const EquationSpec& eq, const InitialData& ic, const BoundTriple& b,
                       const TimeFunction& Qtilde, const Region& region, const Grid& grid,
                       const EnvelopeOptions& opt) {
    Certificate cert;
    cert.theorem = Theorem::T3_2;
    cert.conclusion = "GLOBAL_MONOTONE_WITH_ESTIMATE";
    cert.grid = grid;
    cert.region = {ic.t1, region.t_hi, 0.0, 0.0};
    require_t_range(region, ic.t1);
    const auto s = envelope_start(eq, ic, opt, cert);
    if (!s.ok) return cert;

    const auto M = running_max(Qtilde, ic.t1, region.t_hi);
    std::shared_ptr<const GEnvelope> G;
    try {
        G = std::make_shared<const GEnvelope>(b.P, b.Q, M, ic.t1, region.t_hi, opt.tol);
    } catch (const RangeError& e) {
        cert.status = Status::Inconclusive;
        cert.reason = std::string("range: ") + e.what();
        return cert;
    }
    const auto ts = linspace(ic.t1, region.t_hi, grid.nt);
    std::vector<double> Gv;
    if (!sample_envelope(*G, ts, s, Gv, cert)) return cert;

    HypothesisLedger L;
    double wmax = 0.0;
    for (std::size_t k = 0; k < ts.size() && !L.falsified(); ++k) {
        const double t = ts[k];
        const double W = Gv[k] + s.eps;
        wmax = std::max(wmax, W);
        const double P = b.P(t), Q = b.Q(t), Qt = Qtilde(t);
        if (!(P > 0.0)) L.fail({"P > 0", t, 0.0, P, 0.0, "envelope P must be positive"});
        L.require_le("0 <= Q", t, 0.0, 0.0, Q);
        for (double w : w_samples(-W, W, grid.nw)) {
            const double p = eq.p0(t, w);
            if (!(p > 0.0)) {
                L.fail({"p0 > 0", t, w, p, 0.0, "p0 must be positive"});
                break;
            }
            const double q = eq.q0(t, w);
            const double r = eq.r0(t, w);
            L.require_le("P <= p0", t, w, P, p);
            L.require_le("Q <= q0", t, w, Q, q);
            L.require_le("r0 <= 0", t, w, r, 0.0);
            if (q == 0.0) {
                L.inconclusive("ratio undefined: q0 = 0 at t=" + fmt(t) + ", w=" + fmt(w));
            } else {
                L.require_le("|p0 r0 / q0| <= Qtilde", t, w, std::abs(p * r / q), Qt);
            }
            if (L.falsified()) break;
        }
    }
    cert.region.w_lo = -wmax;
    cert.region.w_hi = wmax;
    L.finish(cert);
    if (cert.status == Status::Verified) {
        cert.bound = [G, c1 = s.c1, c2 = s.c2](double t) { return (*G)(t, c1, c2); };
    }
    finish_envelope(cert, ts, Gv, ic);
    return cert;
}

Majorant Majorant::closed_form(TimeFunction phi, TimeFunction dphi, std::string source) {
    Majorant m;
    m.phi = std::move(phi);
    m.dphi = std::move(dphi);
    m.source = std::move(source);
    return m;
}

Majorant Majorant::from_trajectory(std::shared_ptr<const Trajectory> traj) {
    Majorant m;
    m.phi = [traj](double t) { return traj->phi_at(t); };
    m.dphi = [traj](double t) { return traj->dphi_at(t); };
    m.source = "trajectory";
    m.t_end = traj->t_end();
    m.zeros = traj->zeros();
    return m;
}

namespace {

// Indices of ws sorted by |w|, grouped so that equal |w| share a group.
std::vector<std::vector<std::size_t>> groups_by_modulus(const std::vector<double>& ws) {
    std::vector<std::size_t> idx(ws.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(),
              [&ws](std::size_t a, std::size_t b) { return std::abs(ws[a]) < std::abs(ws[b]); });
    std::vector<std::vector<std::size_t>> groups;
    for (std::size_t i : idx) {
        if (groups.empty() || std::abs(ws[i]) > std::abs(ws[groups.back().front()]) + grid_slack(ws[i])) {
            groups.emplace_back();
        }
        groups.back().push_back(i);
    }
    return groups;
}

}  // namespace

Certificate check_T3_3(const EquationSpec& eq0, const EquationSpec& eq1, const Majorant& majorant,
                       const InitialData& ic0, const Region& region, const Grid& grid) {
    Certificate cert;
    cert.theorem = Theorem::T3_3;
    cert.conclusion = "GLOBAL_MONOTONE";
    cert.grid = grid;
    require_t_range(region, ic0.t1);
    cert.region = {ic0.t1, region.t_hi, 0.0, 0.0};

    // The majorant must be a zero-free solution over the whole checked span.
    if (majorant.t_end < region.t_hi) {
        cert.status = Status::Inconclusive;
        cert.reason = "majorant is only known up to t=" + fmt(majorant.t_end);
        return cert;
    }
    for (double z : majorant.zeros) {
        if (z >= ic0.t1 && z <= region.t_hi) {
            cert.status = Status::Inconclusive;
            cert.reason = "majorant has a zero at t=" + fmt(z);
            return cert;
        }
    }
    const auto ts = linspace(ic0.t1, region.t_hi, grid.nt);
    double wmax = 0.0;
    for (double t : ts) {
        const double v = majorant.phi(t);
        if (v == 0.0) {
            cert.status = Status::Inconclusive;
            cert.reason = "majorant vanishes at t=" + fmt(t);
            return cert;
        }
        wmax = std::max(wmax, std::abs(v));
    }
    cert.region.w_lo = -wmax;
    cert.region.w_hi = wmax;

    HypothesisLedger L;
    const double t1 = ic0.t1;
    const double f0 = ic0.phi0, d0 = ic0.phi1;
    const double f1 = majorant.phi(t1), d1 = majorant.dphi(t1);
    // A1: phi1 >= phi0 > 0 and phi1' > phi0' >= 0, or the mirror image.
    if (f0 > 0.0) {
        L.require_le("A1: phi0 <= phi1", t1, f0, f0, f1);
        L.require_le("A1: 0 <= phi0'", t1, f0, 0.0, d0);
        if (!(d1 > d0)) L.fail({"A1: phi0' < phi1'", t1, f0, d0, d1, "strict inequality required"});
    } else if (f0 < 0.0) {
        L.require_le("A1: phi1 <= phi0", t1, f0, f1, f0);
        L.require_le("A1: phi0' <= 0", t1, f0, d0, 0.0);
        if (!(d1 < d0)) L.fail({"A1: phi1' < phi0'", t1, f0, d1, d0, "strict inequality required"});
    } else {
        L.fail({"A1: phi0 != 0", t1, f0, f0, 0.0, "initial value must be nonzero"});
    }
    if (!L.falsified()) {
        const double y0 = eq0.p0(t1, f0) * d0 / f0;
        const double y1 = eq1.p0(t1, f1) * d1 / f1;
        if (!(y0 < y1)) L.fail({"B1: y0 < y1", t1, f0, y0, y1, "strict inequality required"});
    }

    const auto ws = w_samples(-wmax, wmax, grid.nw);
    const auto groups = groups_by_modulus(ws);
    std::vector<double> r0(ws.size()), r1(ws.size()), a0(ws.size()), a1(ws.size());
    for (std::size_t k = 0; k < ts.size() && !L.falsified(); ++k) {
        const double t = ts[k];
        for (std::size_t i = 0; i < ws.size(); ++i) {
            const double w = ws[i];
            const double p0 = eq0.p0(t, w), p1 = eq1.p0(t, w);
            if (!(p0 > 0.0) || !(p1 > 0.0)) {
                L.fail({"p0 > 0", t, w, std::min(p0, p1), 0.0, "p0 and p1 must be positive"});
                break;
            }
            L.require_le("C1: p0 <= p1", t, w, p0, p1);
            L.require_le("C1: p1 <= p0", t, w, p1, p0);
            r0[i] = eq0.r0(t, w);
            r1[i] = eq1.r0(t, w);
            a0[i] = eq0.q0(t, w) / p0;
            a1[i] = eq1.q0(t, w) / p1;
            L.require_le("D1: r0 <= 0", t, w, r0[i], 0.0);
        }
        if (L.falsified()) break;
        if (auto v = find_even_monotone_violation([&eq0](double tt, double w) { return eq0.p0(tt, w); },
                                                  {t}, ws)) {
            L.fail({"C1: p0 even-monotone in w", v->t, v->w, 0.0, 0.0,
                    "p0 must be nonincreasing on w <= 0 and nondecreasing on w >= 0"});
            break;
        }
        L.note_checked("C1: p0 even-monotone in w");
        // D1, E1 over all pairs |w| <= |w1| via running extrema in |w|.
        double r0_min = std::numeric_limits<double>::infinity();
        double a0_max = -std::numeric_limits<double>::infinity();
        for (const auto& g : groups) {
            for (std::size_t i : g) {
                r0_min = std::min(r0_min, r0[i]);
                a0_max = std::max(a0_max, a0[i]);
            }
            for (std::size_t i : g) {
                if (!L.require_le("D1: r1(t,w1) <= r0(t,w) for |w| <= |w1|", t, ws[i], r1[i], r0_min)) {
                    break;
                }
                if (!L.require_le("E1: q0/p0(t,w) <= q1/p1(t,w1) for |w| <= |w1|", t, ws[i], a0_max,
                                  a1[i])) {
                    break;
                }
            }
            if (L.falsified()) break;
        }
    }
    L.finish(cert);
    cert.notes["majorant"] = majorant.source;
    return cert;
}

Certificate check_T3_4(const EquationSpec& eq, const BoundTriple& b, const Region& region,
                       const Grid& grid) {
    Certificate cert;
    cert.theorem = Theorem::T3_4;
    cert.conclusion = "SINGULAR_SECOND_KIND_IF_NONEXTENDABLE";
    cert.grid = grid;
    cert.region = region;
    HypothesisLedger L;
    const auto ts = linspace(region.t_lo, region.t_hi, grid.nt);
    const auto ws = w_samples(region.w_lo, region.w_hi, grid.nw);
    for (double t : ts) {
        const double P = b.P(t), Q = b.Q(t);
        if (!(P > 0.0)) L.fail({"P > 0", t, 0.0, P, 0.0, "envelope P must be positive"});
        for (double w : ws) {
            const double p = eq.p0(t, w);
            if (!(p > 0.0)) L.fail({"p0 > 0", t, w, p, 0.0, "p0 must be positive"});
            if (L.falsified()) break;
            L.require_le("A2: P <= p0", t, w, P, p);
            L.require_le("A2: Q <= q0/p0", t, w, Q, eq.q0(t, w) / p);
            L.require_le("B2: 0 <= r0", t, w, 0.0, eq.r0(t, w));
            if (L.falsified()) break;
        }
        if (L.falsified()) break;
    }
    L.finish(cert);
    return cert;
}

std::size_t comparison_zero_count(const ComparisonFamily& family, double eps, double t0,
                                  const OscillationOptions& opt) {
    EquationSpec lin;
    lin.p0 = ScalarField("p_eps", [&family, eps](double t, double) { return family.p(t, eps); });
    lin.q0 = ScalarField("q_eps", [&family, eps](double t, double) { return family.q(t, eps); });
    lin.r0 = ScalarField("r_eps", [&family, eps](double t, double) { return family.r(t, eps); });
    lin.t0 = t0;
    auto o = opt.integration;
    o.horizon = opt.horizon;
    return integrate(lin, {t0, 1.0, 0.0}, o).zeros().size();
}

namespace {

void record_probe(Certificate& cert, HypothesisLedger& L, const std::string& name,
                  const DivergenceVerdict& v, double w) {
    cert.probes.emplace_back(name, v);
    L.note_checked(name);
    if (v.status == Divergence::Converging) {
        const double T = v.horizons.back().first;
        const double ratio = v.tail_ratios.empty() ? 0.0 : v.tail_ratios.back();
        L.fail({name, T, w, ratio, 0.9,
                "partial integrals converge: octave increments shrink geometrically"});
    } else if (v.status == Divergence::Inconclusive) {
        L.inconclusive(name + ": divergence probe inconclusive");
    }
}

}  // namespace

Certificate check_T3_5(const EquationSpec& eq, const BoundTriple& b, const ComparisonFamily& family,
                       double N, double eps0, const Region& region, const Grid& grid,
                       const T35Options& opt) {
    if (!(N > 0.0) || !(eps0 > 0.0)) throw DomainError("check_T3_5: N and eps0 must be positive");
    Certificate cert;
    cert.theorem = Theorem::T3_5;
    cert.conclusion = "OSC_OR_SINGULAR_FIRST_KIND";
    cert.grid = grid;
    cert.heuristic = {"B3: oscillation of the comparison equations by zero counting",
                      "B3: finitely many eps samples", "C3_1: divergence probe",
                      "C3_2: divergence probe", "C3_2: finitely many eps samples"};
    auto eps_samples = opt.eps_samples;
    if (eps_samples.empty()) eps_samples = {eps0, eps0 / 2, eps0 / 4, eps0 / 8};
    auto upper = opt.upper_eps_samples;
    if (upper.empty()) upper = {N, 2 * N, 4 * N};
    for (double e : eps_samples) {
        if (!(e > 0.0) || e > eps0) throw DomainError("check_T3_5: eps samples must lie in (0, eps0]");
    }
    for (double e : upper) {
        if (e < N) throw DomainError("check_T3_5: upper eps samples must be >= N");
    }
    cert.eps_samples = eps_samples;
    cert.epsilon = eps0;
    cert.notes["N"] = N;
    cert.notes["upper_eps_samples"] = upper;

    HypothesisLedger L;
    const auto ts = linspace(region.t_lo, region.t_hi, grid.nt);
    const auto ws = w_samples(region.w_lo, region.w_hi, grid.nw);
    const double t0 = region.t_lo;

    // A3 and B3 on the user region.
    for (double t : ts) {
        for (double w : ws) {
            const double p = eq.p0(t, w);
            if (!(p > 0.0)) L.fail({"p0 > 0", t, w, p, 0.0, "p0 must be positive"});
            if (L.falsified()) break;
            const double qp = eq.q0(t, w) / p;
            const double r = eq.r0(t, w);
            L.require_le("A3: 0 <= r0", t, w, 0.0, r);
            for (double e : eps_samples) {
                if (std::abs(w) < e) continue;
                const double pe = family.p(t, e);
                L.require_le("B3: p0 <= p_eps", t, w, p, pe);
                L.require_le("B3: q_eps/p_eps <= q0/p0", t, w, family.q(t, e) / pe, qp);
                L.require_le("B3: r_eps <= r0", t, w, family.r(t, e), r);
            }
            if (L.falsified()) break;
        }
        if (L.falsified()) break;
    }
    nlohmann::ordered_json zero_counts = nlohmann::ordered_json::array();
    if (!L.falsified()) {
        for (double e : eps_samples) {
            const auto z = comparison_zero_count(family, e, t0, opt.oscillation);
            zero_counts.push_back({{"eps", e}, {"zeros", z}});
            L.note_checked("B3: comparison equation oscillates");
            if (z < opt.oscillation.min_zeros) {
                L.inconclusive("B3: comparison equation for eps=" + fmt(e) + " has " +
                               std::to_string(z) + " zeros on the horizon");
            }
        }
    }
    cert.notes["oscillation_zero_counts"] = zero_counts;

    // C3_1 on |w| <= N.
    const auto inner_ws = w_samples(-N, N, grid.nw);
    for (double t : ts) {
        if (L.falsified()) break;
        const double P = b.P(t), Q = b.Q(t);
        for (double w : inner_ws) {
            const double p = eq.p0(t, w);
            L.require_le("C3_1: p0 <= P", t, w, p, P);
            L.require_le("C3_1: q0/p0 <= Q", t, w, eq.q0(t, w) / p, Q);
            if (L.falsified()) break;
        }
    }
    // C3_2 on N <= |w| <= eps.
    for (double e : upper) {
        if (L.falsified()) break;
        const auto band = w_samples(-e, e, grid.nw);
        for (double t : ts) {
            const double pe = family.p(t, e), qe = family.q(t, e), re = family.r(t, e);
            for (double w : band) {
                if (std::abs(w) < N) continue;
                const double p = eq.p0(t, w);
                L.require_le("C3_2: p0 <= p_eps", t, w, p, pe);
                L.require_le("C3_2: q0/p0 <= q_eps/p_eps", t, w, eq.q0(t, w) / p, qe / pe);
                L.require_le("C3_2: r_eps <= r0", t, w, re, eq.r0(t, w));
                if (L.falsified()) break;
            }
            if (L.falsified()) break;
        }
    }
    cert.region = {region.t_lo, region.t_hi, std::min(region.w_lo, -upper.back()),
                   std::max(region.w_hi, upper.back())};

    if (!L.falsified()) {
        const double first = opt.horizons.first > 0.0 ? opt.horizons.first : (t0 > 0.0 ? t0 : 1.0);
        const double t_max = first * std::pow(opt.horizons.ratio, opt.horizons.octaves);
        record_probe(cert, L, "C3_1: divergence of int exp(-int Q) / P",
                     divergence_probe(damped_reciprocal(b.P, b.Q, t0, t_max, opt.tol), t0,
                                      opt.horizons, opt.tol),
                     N);
        for (double e : upper) {
            if (L.falsified()) break;
            auto q_over_p = [&family, e](double t) { return family.q(t, e) / family.p(t, e); };
            auto r_eps = [&family, e](double t) { return family.r(t, e); };
            record_probe(cert, L, "C3_2: divergence of the nested kernel integral (eps=" + fmt(e) + ")",
                         divergence_probe(nested_kernel_integrand(b.P, q_over_p, r_eps, t0, t_max, opt.tol),
                                          t0, opt.horizons, opt.tol),
                         e);
        }
    }
    L.finish(cert);
    return cert;
}

Certificate check_T3_6(const EquationSpec& eq, const Region& region, const Grid& grid) {
    Certificate cert;
    cert.theorem = Theorem::T3_6;
    cert.conclusion = "GLOBAL_FOR_ALL_IC";
    cert.grid = grid;
    cert.region = region;
    HypothesisLedger L;
    const auto ts = linspace(region.t_lo, region.t_hi, grid.nt);
    const auto ws = w_samples(region.w_lo, region.w_hi, grid.nw);
    for (double t : ts) {
        for (double w : ws) {
            const double p = eq.p0(t, w);
            if (!(p > 0.0)) L.fail({"p0 > 0", t, w, p, 0.0, "p0 must be positive"});
            L.require_le("A4: 0 <= r0", t, w, 0.0, eq.r0(t, w));
            if (L.falsified()) break;
        }
        if (L.falsified()) break;
    }
    const std::pair<const char*, std::function<double(double, double)>> monotone[] = {
        {"B4: p0 even-monotone in w", [&eq](double t, double w) { return eq.p0(t, w); }},
        {"B4: q0/p0 even-monotone in w",
         [&eq](double t, double w) { return eq.q0(t, w) / eq.p0(t, w); }},
        {"B4: -r0 even-monotone in w", [&eq](double t, double w) { return -eq.r0(t, w); }},
    };
    for (const auto& [name, g] : monotone) {
        if (L.falsified()) break;
        L.note_checked(name);
        if (auto v = find_even_monotone_violation(g, ts, ws)) {
            L.fail({name, v->t, v->w, 0.0, 0.0,
                    "must be nonincreasing on w <= 0 and nondecreasing on w >= 0"});
        }
    }
    L.finish(cert);
    return cert;
}

nlohmann::ordered_json to_json(const Certificate& c) {
    using J = nlohmann::ordered_json;
    J j;
    j["theorem"] = std::string(to_string(c.theorem));
    j["status"] = std::string(to_string(c.status));
    j["conclusion"] = c.conclusion;
    j["extra_conclusions"] = c.extra_conclusions;
    j["reason"] = c.reason;
    if (c.witness) {
        j["witness"] = {{"hypothesis", c.witness->hypothesis}, {"t", c.witness->t},
                        {"w", c.witness->w},                   {"lhs", c.witness->lhs},
                        {"rhs", c.witness->rhs},               {"detail", c.witness->detail}};
    } else {
        j["witness"] = nullptr;
    }
    j["epsilon"] = c.epsilon ? J(*c.epsilon) : J(nullptr);
    j["region"] = {{"t_lo", c.region.t_lo},
                   {"t_hi", c.region.t_hi},
                   {"w_lo", c.region.w_lo},
                   {"w_hi", c.region.w_hi}};
    j["grid"] = {{"nt", c.grid.nt}, {"nw", c.grid.nw}};
    j["hypotheses"] = c.hypotheses;
    j["heuristic"] = c.heuristic;
    j["uniform_bound"] = c.uniform_bound ? J(*c.uniform_bound) : J(nullptr);
    J curve = J::array();
    for (const auto& [t, v] : c.bound_curve) curve.push_back({t, v});
    j["bound_curve"] = curve;
    j["eps_samples"] = c.eps_samples;
    J probes = J::array();
    for (const auto& [name, v] : c.probes) {
        J h = J::array();
        for (const auto& [T, S] : v.horizons) h.push_back({T, S});
        probes.push_back({{"name", name},
                          {"status", std::string(to_string(v.status))},
                          {"heuristic", v.heuristic},
                          {"tail_ratios", v.tail_ratios},
                          {"horizons", h}});
    }
    j["probes"] = probes;
    j["notes"] = c.notes;
    J parts = J::array();
    for (const auto& p : c.parts) parts.push_back(to_json(p));
    j["parts"] = parts;
    return j;
}

}  // namespace rcert
