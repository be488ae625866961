#include "rcert/field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "rcert/errors.hpp"

namespace rcert {

namespace {

constexpr double kRelSlack = 1e-12;

// Growth factor per refinement (h -> h/2) above which a difference-quotient
// estimate is considered divergent.
constexpr double kUnboundedGrowth = 1.5;

std::string describe(const std::string& name, double t, double w, double v) {
    std::ostringstream os;
    os.precision(17);
    os << "field '" << name << "' is not finite at (t=" << t << ", w=" << w << "): " << v;
    return os.str();
}

}  // namespace

std::string_view to_string(Tag tag) {
    switch (tag) {
        case Tag::Positive: return "positive";
        case Tag::Nonnegative: return "nonnegative";
        case Tag::Nonpositive: return "nonpositive";
        case Tag::MonotoneInWEven: return "monotone_in_w_even";
    }
    return "unknown";
}

ScalarField::ScalarField() : ScalarField("zero", [](double, double) { return 0.0; }) {}

ScalarField::ScalarField(std::string name, Fn fn, std::vector<Tag> tags,
                         std::vector<double> singular_w)
    : name_(std::move(name)),
      fn_(std::move(fn)),
      tags_(std::move(tags)),
      singular_w_(std::move(singular_w)) {}

ScalarField ScalarField::constant(double value) {
    std::vector<Tag> tags{Tag::MonotoneInWEven};
    if (value > 0.0) tags.push_back(Tag::Positive);
    if (value >= 0.0) tags.push_back(Tag::Nonnegative);
    if (value <= 0.0) tags.push_back(Tag::Nonpositive);
    std::ostringstream os;
    os.precision(17);
    os << "constant(" << value << ")";
    return ScalarField(os.str(), [value](double, double) { return value; }, std::move(tags));
}

ScalarField ScalarField::of_time(std::string name, TimeFunction fn, std::vector<Tag> tags) {
    if (std::find(tags.begin(), tags.end(), Tag::MonotoneInWEven) == tags.end()) {
        tags.push_back(Tag::MonotoneInWEven);
    }
    return ScalarField(
        std::move(name), [f = std::move(fn)](double t, double) { return f(t); }, std::move(tags));
}

double ScalarField::operator()(double t, double w) const {
    const double v = fn_(t, w);
    if (!std::isfinite(v)) throw EvaluationError(describe(name_, t, w, v), t, w, v);
    return v;
}

bool ScalarField::has_tag(Tag tag) const noexcept {
    return std::find(tags_.begin(), tags_.end(), tag) != tags_.end();
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
    if (n < 2) throw DomainError("linspace needs at least 2 points");
    std::vector<double> out(n);
    const double h = (hi - lo) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) out[i] = lo + h * static_cast<double>(i);
    out.back() = hi;
    return out;
}

std::vector<double> w_samples(double lo, double hi, std::size_t n) {
    auto ws = linspace(lo, hi, n);
    if (lo < 0.0 && hi > 0.0 && std::find(ws.begin(), ws.end(), 0.0) == ws.end()) {
        ws.insert(std::upper_bound(ws.begin(), ws.end(), 0.0), 0.0);
    }
    return ws;
}

double grid_slack(double reference) noexcept { return kRelSlack * (1.0 + std::abs(reference)); }

std::optional<Point> find_even_monotone_violation(const std::function<double(double, double)>& g,
                                                  const std::vector<double>& ts,
                                                  const std::vector<double>& ws) {
    std::vector<double> vals(ws.size());
    for (double t : ts) {
        for (std::size_t k = 0; k < ws.size(); ++k) vals[k] = g(t, ws[k]);
        for (std::size_t k = 0; k + 1 < ws.size(); ++k) {
            const double a = ws[k];
            const double b = ws[k + 1];
            if (a >= 0.0) {
                // nondecreasing moving away from 0 to the right
                if (vals[k + 1] < vals[k] - grid_slack(vals[k])) return Point{t, b};
            } else if (b <= 0.0) {
                // nonincreasing on the left half: value grows towards -inf
                if (vals[k] < vals[k + 1] - grid_slack(vals[k + 1])) return Point{t, a};
            }
        }
    }
    return std::nullopt;
}

bool TagReport::all_hold() const noexcept {
    return std::all_of(checks.begin(), checks.end(), [](const TagCheck& c) { return c.holds; });
}

TagReport verify_structural_tags(const ScalarField& field, const Region& region, const Grid& grid) {
    if (!(region.t_hi >= region.t_lo) || !(region.w_hi >= region.w_lo) ||
        !std::isfinite(region.t_lo) || !std::isfinite(region.t_hi) ||
        !std::isfinite(region.w_lo) || !std::isfinite(region.w_hi)) {
        throw DomainError("verify_structural_tags: region must be a finite rectangle");
    }
    const auto ts = linspace(region.t_lo, region.t_hi, grid.nt);
    const auto ws = w_samples(region.w_lo, region.w_hi, grid.nw);

    TagReport report;
    for (Tag tag : field.tags()) {
        TagCheck check{tag, true, std::nullopt};
        if (tag == Tag::MonotoneInWEven) {
            check.counterexample = find_even_monotone_violation(
                [&field](double t, double w) { return field(t, w); }, ts, ws);
        } else {
            for (double t : ts) {
                for (double w : ws) {
                    const double v = field(t, w);
                    const bool ok = tag == Tag::Positive      ? v > 0.0
                                    : tag == Tag::Nonnegative ? v >= 0.0
                                                              : v <= 0.0;
                    if (!ok) {
                        check.counterexample = Point{t, w};
                        break;
                    }
                }
                if (check.counterexample) break;
            }
        }
        check.holds = !check.counterexample.has_value();
        report.checks.push_back(check);
    }
    return report;
}

namespace {

std::optional<double> declared_singular_inside(const std::vector<double>& singular, double lo,
                                               double hi) {
    for (double s : singular) {
        if (s >= lo && s <= hi) return s;
    }
    return std::nullopt;
}

double field_slope(const ScalarField& field, const Region& region, const Grid& grid) {
    const auto ts = linspace(region.t_lo, region.t_hi, grid.nt);
    const auto ws = linspace(region.w_lo, region.w_hi, grid.nw);
    double best = 0.0;
    for (double t : ts) {
        double prev = field(t, ws[0]);
        for (std::size_t k = 1; k < ws.size(); ++k) {
            const double cur = field(t, ws[k]);
            best = std::max(best, std::abs(cur - prev) / (ws[k] - ws[k - 1]));
            prev = cur;
        }
    }
    return best;
}

bool grows_without_bound(const std::vector<double>& h) {
    // Every refinement must increase the estimate by the growth factor.
    if (h.size() < 3 || h.front() <= 0.0) return false;
    for (std::size_t i = 1; i < h.size(); ++i) {
        if (!(h[i] > kUnboundedGrowth * h[i - 1])) return false;
    }
    return true;
}

template <class Probe>
LipschitzEstimate refine_estimate(Probe&& probe, Grid grid) {
    LipschitzEstimate est;
    for (int level = 0; level < 3; ++level) {
        est.history.push_back(probe(grid));
        grid = grid.refined();
    }
    est.constant = est.history.back();
    est.unbounded = grows_without_bound(est.history);
    return est;
}

}  // namespace

LipschitzEstimate lipschitz_estimate(const ScalarField& field, const Region& region,
                                     const Grid& grid) {
    if (grid.nt < 2 || grid.nw < 2) throw DomainError("lipschitz_estimate: grid needs >= 2 points per axis");
    if (auto s = declared_singular_inside(field.singular_w(), region.w_lo, region.w_hi)) {
        LipschitzEstimate est;
        est.constant = std::numeric_limits<double>::infinity();
        est.unbounded = true;
        est.singular_point = Point{region.t_lo, *s};
        return est;
    }
    // The t axis does not enter the w-slope; keep it at the requested size but
    // refine only in w.
    return refine_estimate(
        [&](const Grid& g) { return field_slope(field, region, Grid{grid.nt, g.nw}); }, grid);
}

LipschitzEstimate system_lipschitz_estimate(const EquationSpec& eq, const SystemBox& box,
                                            const Grid& grid) {
    for (const ScalarField* f : {&eq.p0, &eq.q0, &eq.r0}) {
        if (auto s = declared_singular_inside(f->singular_w(), box.u_lo, box.u_hi)) {
            LipschitzEstimate est;
            est.constant = std::numeric_limits<double>::infinity();
            est.unbounded = true;
            est.singular_point = Point{box.t_lo, *s};
            return est;
        }
    }
    auto probe = [&](const Grid& g) {
        const auto ts = linspace(box.t_lo, box.t_hi, std::min<std::size_t>(grid.nt, 33));
        const auto us = linspace(box.u_lo, box.u_hi, g.nw);
        const auto vs = linspace(box.v_lo, box.v_hi, std::min<std::size_t>(g.nw, 33));
        double best = 0.0;
        for (double t : ts) {
            // f1, f2 are affine in v, so their v-slopes are exact at any v.
            double prev_a = 0.0, prev_b = 0.0;  // 1/p0 and q0/p0 at the previous u
            double prev_c = 0.0;               // r0 * u
            for (std::size_t k = 0; k < us.size(); ++k) {
                const double u = us[k];
                const double p = eq.p0(t, u);
                if (!(p > 0.0)) throw DomainError("system_lipschitz_estimate: p0 <= 0 in box");
                const double a = 1.0 / p;
                const double b = eq.q0(t, u) / p;
                const double c = eq.r0(t, u) * u;
                best = std::max(best, std::abs(a) + std::abs(b));  // d/dv of (f1, f2)
                if (k > 0) {
                    const double du = u - us[k - 1];
                    for (double v : vs) {
                        const double df1 = std::abs(v * (a - prev_a)) / du;
                        const double df2 = std::abs(-(c - prev_c) - v * (b - prev_b)) / du;
                        best = std::max(best, df1 + df2);
                    }
                }
                prev_a = a;
                prev_b = b;
                prev_c = c;
            }
        }
        return best;
    };
    return refine_estimate(probe, grid);
}

UniquenessInterval uniqueness_interval(const EquationSpec& eq, const InitialData& ic, double delta,
                                       double M, double N, const Grid& grid) {
    if (!(delta > 0.0) || !(M > 0.0) || !(N > 0.0)) {
        throw DomainError("uniqueness_interval: delta, M, N must be positive");
    }
    const double psi0 = eq.p0(ic.t1, ic.phi0) * ic.phi1;
    UniquenessInterval out;
    out.box = {std::max(eq.t0, ic.t1 - delta), ic.t1 + delta, ic.phi0 - M, ic.phi0 + M,
               psi0 - N, psi0 + N};
    if (auto s = declared_singular_inside(eq.p0.singular_w(), out.box.u_lo, out.box.u_hi)) {
        throw DomainError("uniqueness_interval: region touches a zero of p0 at w = " +
                          std::to_string(*s));
    }
    const auto ts = linspace(out.box.t_lo, out.box.t_hi, grid.nt);
    const auto us = linspace(out.box.u_lo, out.box.u_hi, grid.nw);
    const auto vs = linspace(out.box.v_lo, out.box.v_hi, grid.nw);
    double m0_sq = 0.0;
    for (double t : ts) {
        for (double u : us) {
            const double p = eq.p0(t, u);
            if (!(p > 0.0)) throw DomainError("uniqueness_interval: p0 <= 0 inside the region");
            const double ru = eq.r0(t, u) * u;
            const double qp = eq.q0(t, u) / p;
            for (double v : vs) {
                const double f1 = v / p;
                const double f2 = -ru - qp * v;
                m0_sq = std::max(m0_sq, f1 * f1 + f2 * f2);
            }
        }
    }
    out.m0 = std::sqrt(m0_sq);
    out.t2 = out.m0 > 0.0 ? std::min(delta, std::sqrt(M * M + N * N) / out.m0) : delta;
    return out;
}

}  // namespace rcert
