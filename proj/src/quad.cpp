#include "rcert/quad.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>

#include "rcert/errors.hpp"

namespace rcert {

namespace {

// Kronrod abscissae on [-1, 1] (nonnegative half, descending); odd indices
// are the Gauss points.
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

constexpr double kEps = std::numeric_limits<double>::epsilon();

double checked(const TimeFunction& f, double x) {
    const double v = f(x);
    if (!std::isfinite(v)) {
        std::ostringstream os;
        os.precision(17);
        os << "integrand is not finite at t=" << x << ": " << v;
        throw EvaluationError(os.str(), x, 0.0, v);
    }
    return v;
}

struct Scored {
    Panel panel;
    bool operator<(const Scored& o) const { return panel.error < o.panel.error; }
};

Panel make_panel(const TimeFunction& f, double a, double b) {
    const auto r = gauss_kronrod15(f, a, b);
    return {a, b, r.value, r.error};
}

// Subdivides [a, b] so that each piece carries |V(b_k) - V(b_{k-1})| <= 1.
void split_by_growth(const Cumulative& V, double a, double b, std::vector<double>& out,
                     std::size_t budget) {
    const double dv = std::abs(V(b) - V(a));
    const auto pieces = static_cast<std::size_t>(std::ceil(dv));
    if (pieces > budget) throw ConvergenceError("weighted quadrature: exponential weight varies too fast");
    for (std::size_t i = 1; i < pieces; ++i) {
        out.push_back(a + (b - a) * static_cast<double>(i) / static_cast<double>(pieces));
    }
    out.push_back(b);
}

double safe_exp(double e, const char* what) {
    if (e > 709.0) throw RangeError(std::string(what) + ": exponent " + std::to_string(e) + " overflows");
    return std::exp(e);
}

}  // namespace

RuleResult gauss_kronrod15(const TimeFunction& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = checked(f, c);
    double resk = fc * kWgk[7];
    double resg = fc * kWg[3];
    double resabs = std::abs(resk);
    for (int j = 0; j < 7; ++j) {
        const double dx = h * kXgk[j];
        const double f1 = checked(f, c - dx);
        const double f2 = checked(f, c + dx);
        resk += kWgk[j] * (f1 + f2);
        resabs += kWgk[j] * (std::abs(f1) + std::abs(f2));
        if (j % 2 == 1) resg += kWg[j / 2] * (f1 + f2);
    }
    const double value = resk * h;
    double err = std::abs((resk - resg) * h);
    err = std::max(err, 50.0 * kEps * std::abs(resabs * h));
    return {value, err};
}

std::vector<Panel> adaptive_panels(const TimeFunction& f, double a, double b,
                                   const QuadTolerance& tol, const std::vector<double>& breaks) {
    if (!(b >= a)) throw DomainError("adaptive_panels: upper limit below lower limit");
    if (a == b) return {Panel{a, b, 0.0, 0.0}};

    std::vector<double> edges{a};
    for (double x : breaks) {
        if (x > a && x < b) edges.push_back(x);
    }
    edges.push_back(b);
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    std::priority_queue<Scored> open;
    std::vector<Panel> done;  // panels too narrow to split further
    double total = 0.0, err = 0.0;
    for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
        auto p = make_panel(f, edges[k], edges[k + 1]);
        total += p.value;
        err += p.error;
        open.push({p});
    }
    std::size_t count = open.size();
    while (err > std::max(tol.abs, tol.rel * std::abs(total)) && !open.empty()) {
        const Panel worst = open.top().panel;
        open.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b) ||
            (worst.b - worst.a) < 64.0 * kEps * std::max(std::abs(worst.a), std::abs(worst.b))) {
            done.push_back(worst);
            continue;
        }
        if (count >= tol.max_panels) {
            std::ostringstream os;
            os << "adaptive quadrature on [" << a << ", " << b << "] exceeded " << tol.max_panels
               << " panels (error estimate " << err << ")";
            throw ConvergenceError(os.str());
        }
        const auto left = make_panel(f, worst.a, mid);
        const auto right = make_panel(f, mid, worst.b);
        total += left.value + right.value - worst.value;
        err += left.error + right.error - worst.error;
        open.push({left});
        open.push({right});
        ++count;
    }
    while (!open.empty()) {
        done.push_back(open.top().panel);
        open.pop();
    }
    std::sort(done.begin(), done.end(), [](const Panel& x, const Panel& y) { return x.a < y.a; });
    return done;
}

double integrate(const TimeFunction& f, double a, double b, const QuadTolerance& tol) {
    if (b < a) return -integrate(f, b, a, tol);
    double s = 0.0;
    for (const auto& p : adaptive_panels(f, a, b, tol)) s += p.value;
    return s;
}

Cumulative::Cumulative(TimeFunction f, double a, double b, const QuadTolerance& tol,
                       const std::vector<double>& breaks)
    : f_(std::move(f)) {
    const auto panels = adaptive_panels(f_, a, b, tol, breaks);
    edges_.push_back(a);
    prefix_.push_back(0.0);
    if (a == b) return;
    for (const auto& p : panels) {
        edges_.push_back(p.b);
        prefix_.push_back(prefix_.back() + p.value);
    }
    edges_.back() = b;
}

double Cumulative::operator()(double x) const {
    const double a = edges_.front();
    const double b = edges_.back();
    const double slack = 1e-12 * (1.0 + std::abs(b - a) + std::abs(b));
    if (x < a - slack || x > b + slack) {
        std::ostringstream os;
        os.precision(17);
        os << "cumulative integral queried at " << x << " outside [" << a << ", " << b << "]";
        throw DomainError(os.str());
    }
    x = std::clamp(x, a, b);
    auto it = std::upper_bound(edges_.begin(), edges_.end(), x);
    if (it == edges_.end()) return prefix_.back();
    const auto k = static_cast<std::size_t>(it - edges_.begin()) - 1;
    if (x == edges_[k]) return prefix_[k];
    return prefix_[k] + gauss_kronrod15(f_, edges_[k], x).value;
}

WeightedCumulative::WeightedCumulative(std::shared_ptr<const Cumulative> V, TimeFunction g,
                                       const QuadTolerance& tol)
    : V_(std::move(V)), g_(std::move(g)) {
    const double a = V_->lower();
    const double b = V_->upper();
    edges_.push_back(a);
    at_edge_.push_back(0.0);
    if (a == b) return;

    // Mesh: edges of V refined by the resolution g needs, then split so the
    // weight changes by at most a factor e inside every panel.
    std::vector<double> coarse = V_->edges();
    for (const auto& p : adaptive_panels(g_, a, b, tol, V_->edges())) coarse.push_back(p.b);
    std::sort(coarse.begin(), coarse.end());
    coarse.erase(std::unique(coarse.begin(), coarse.end()), coarse.end());
    for (std::size_t k = 0; k + 1 < coarse.size(); ++k) {
        split_by_growth(*V_, coarse[k], coarse[k + 1], edges_, tol.max_panels);
    }
    const double width = b - a;
    for (std::size_t k = 1; k < edges_.size(); ++k) {
        const double lo = edges_[k - 1], hi = edges_[k];
        const double vhi = (*V_)(hi);
        const double vlo = (*V_)(lo);
        const QuadTolerance local{tol.abs * (hi - lo) / width, tol.rel, tol.max_panels};
        const double J = integrate(
            [&](double s) { return std::exp(-(vhi - (*V_)(s))) * g_(s); }, lo, hi, local);
        at_edge_.push_back(std::exp(-(vhi - vlo)) * at_edge_.back() + J);
    }
}

double WeightedCumulative::partial(std::size_t k, double x) const {
    const double lo = edges_[k];
    const double vx = (*V_)(x);
    const double carried = std::exp(-(vx - (*V_)(lo))) * at_edge_[k];
    const TimeFunction h = [&](double s) { return std::exp(-(vx - (*V_)(s))) * g_(s); };
    return carried + gauss_kronrod15(h, lo, x).value;
}

double WeightedCumulative::operator()(double x) const {
    const double a = edges_.front();
    const double b = edges_.back();
    const double slack = 1e-12 * (1.0 + std::abs(b - a) + std::abs(b));
    if (x < a - slack || x > b + slack) throw DomainError("weighted cumulative integral queried outside its range");
    x = std::clamp(x, a, b);
    auto it = std::upper_bound(edges_.begin(), edges_.end(), x);
    if (it == edges_.end()) return at_edge_.back();
    const auto k = static_cast<std::size_t>(it - edges_.begin()) - 1;
    if (x == edges_[k]) return at_edge_[k];
    return partial(k, x);
}

namespace {

void require_order(double t1, double t, const char* what) {
    if (!(t >= t1) || !std::isfinite(t1) || !std::isfinite(t)) {
        throw DomainError(std::string(what) + ": requires finite t >= t1");
    }
}

TimeFunction positive(TimeFunction u, const char* what) {
    return [u = std::move(u), what](double t) {
        const double v = u(t);
        if (!(v > 0.0)) {
            std::ostringstream os;
            os.precision(17);
            os << what << ": weight must be positive, got " << v << " at t=" << t;
            throw DomainError(os.str());
        }
        return v;
    };
}

std::shared_ptr<const Cumulative> antiderivative(TimeFunction v, double a, double b,
                                                 const QuadTolerance& tol) {
    return std::make_shared<const Cumulative>(std::move(v), a, b, tol);
}

}  // namespace

double i_plus(const TimeFunction& u, const TimeFunction& v, double t1, double t,
              const QuadTolerance& tol) {
    require_order(t1, t, "i_plus");
    if (t == t1) return 0.0;
    const auto V = antiderivative(v, t1, t, tol.tightened(10.0));
    const auto up = positive(u, "i_plus");
    double s = 0.0;
    for (const auto& p : adaptive_panels(
             [&](double tau) { return safe_exp(-(*V)(tau), "i_plus") / up(tau); }, t1, t, tol,
             V->edges())) {
        s += p.value;
    }
    return s;
}

double i_minus(const TimeFunction& v, const TimeFunction& x, double t1, double t,
               const QuadTolerance& tol) {
    require_order(t1, t, "i_minus");
    if (t == t1) return 0.0;
    WeightedCumulative z(antiderivative(v, t1, t, tol.tightened(10.0)), x, tol);
    return z.total();
}

FEnvelope::FEnvelope(BoundTriple bounds, double t1, double t_max, const QuadTolerance& tol)
    : t1_(t1), t_max_(t_max) {
    require_order(t1, t_max, "FEnvelope");
    const auto P = std::make_shared<TimeFunction>(positive(bounds.P, "F envelope P"));
    const auto VQ = antiderivative(bounds.Q, t1, t_max, tol.tightened(10.0));
    iplus_ = std::make_unique<Cumulative>(
        [P, VQ](double tau) { return safe_exp(-(*VQ)(tau), "F envelope") / (*P)(tau); }, t1, t_max,
        tol, VQ->edges());
    const auto Z = std::make_shared<const WeightedCumulative>(VQ, bounds.R, tol.tightened(10.0));
    outer_ = std::make_unique<Cumulative>([P, Z](double tau) { return (*Z)(tau) / (*P)(tau); }, t1,
                                          t_max, tol, Z->edges());
}

double FEnvelope::exponent(double t, double c2) const {
    if (t == t1_) return 0.0;
    return c2 * (*iplus_)(t) - (*outer_)(t);
}

double FEnvelope::operator()(double t, double c1, double c2) const {
    if (c1 == 0.0) throw DomainError("F: c1 must be nonzero");
    if (t == t1_) return std::abs(c1);
    return std::abs(c1) * safe_exp(exponent(t, c2), "F");
}

GEnvelope::GEnvelope(TimeFunction P, TimeFunction Q, TimeFunction x, double t1, double t_max,
                     const QuadTolerance& tol)
    : t1_(t1), t_max_(t_max) {
    require_order(t1, t_max, "GEnvelope");
    const auto Pp = std::make_shared<TimeFunction>(positive(std::move(P), "G envelope P"));
    const auto VQ = antiderivative(std::move(Q), t1, t_max, tol.tightened(10.0));
    iplus_ = std::make_unique<Cumulative>(
        [Pp, VQ](double tau) { return safe_exp(-(*VQ)(tau), "G envelope") / (*Pp)(tau); }, t1,
        t_max, tol, VQ->edges());
    drift_ = std::make_unique<Cumulative>(
        [Pp, x = std::move(x)](double tau) { return x(tau) / (*Pp)(tau); }, t1, t_max, tol);
}

double GEnvelope::exponent(double t, double c2) const {
    if (t == t1_) return 0.0;
    return c2 * (*iplus_)(t) + (*drift_)(t);
}

double GEnvelope::operator()(double t, double c1, double c2) const {
    if (c1 == 0.0) throw DomainError("G: c1 must be nonzero");
    if (t == t1_) return std::abs(c1);
    return std::abs(c1) * safe_exp(exponent(t, c2), "G");
}

double eval_F(const BoundTriple& bounds, double t1, double t, double c1, double c2,
              const QuadTolerance& tol) {
    if (c1 == 0.0) throw DomainError("F: c1 must be nonzero");
    require_order(t1, t, "eval_F");
    if (t == t1) return std::abs(c1);
    return FEnvelope(bounds, t1, t, tol)(t, c1, c2);
}

double eval_G(const TimeFunction& P, const TimeFunction& Q, const TimeFunction& x, double t1,
              double t, double c1, double c2, const QuadTolerance& tol) {
    if (c1 == 0.0) throw DomainError("G: c1 must be nonzero");
    require_order(t1, t, "eval_G");
    if (t == t1) return std::abs(c1);
    return GEnvelope(P, Q, x, t1, t, tol)(t, c1, c2);
}

TimeFunction running_max(TimeFunction f, double t1, double t_end, std::size_t samples) {
    require_order(t1, t_end, "running_max");
    if (samples < 2) throw DomainError("running_max: needs at least 2 samples");
    const auto ts = linspace(t1, t_end, samples);
    auto prefix = std::make_shared<std::vector<double>>(samples);
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < samples; ++k) {
        m = std::max(m, checked(f, ts[k]));
        (*prefix)[k] = m;
    }
    const double h = (t_end - t1) / static_cast<double>(samples - 1);
    return [f = std::move(f), prefix, t1, t_end, h](double t) {
        if (t < t1 - grid_slack(t1) || t > t_end + grid_slack(t_end)) {
            throw DomainError("running_max queried outside its tabulated range");
        }
        if (h == 0.0) return (*prefix)[0];
        const auto k = std::min(prefix->size() - 1,
                                static_cast<std::size_t>(std::floor(std::max(0.0, t - t1) / h)));
        return std::max((*prefix)[k], f(t));
    };
}

std::string_view to_string(Divergence d) {
    switch (d) {
        case Divergence::Diverging: return "diverging";
        case Divergence::Converging: return "converging";
        case Divergence::Inconclusive: return "inconclusive";
    }
    return "unknown";
}

namespace {

constexpr std::size_t kTail = 5;
constexpr double kConvergingRatio = 0.5 * (1.0 + 1e-6);
constexpr double kDivergingRatio = 0.9;

}  // namespace

DivergenceVerdict divergence_probe(const TimeFunction& integrand, double t0,
                                   const HorizonSpec& horizons, const QuadTolerance& tol) {
    if (!(horizons.ratio > 1.0) || horizons.octaves < 2) {
        throw DomainError("divergence_probe: need ratio > 1 and at least 2 octaves");
    }
    const double first = horizons.first > 0.0 ? horizons.first : (t0 > 0.0 ? t0 : 1.0);
    if (first < t0) throw DomainError("divergence_probe: first horizon precedes t0");

    const TimeFunction g = [&](double tau) {
        const double v = integrand(tau);
        if (v < 0.0) {
            std::ostringstream os;
            os.precision(17);
            os << "divergence_probe: integrand is negative (" << v << ") at t=" << tau;
            throw DomainError(os.str());
        }
        return v;
    };
    // Increments are compared with each other, so only relative accuracy matters.
    const QuadTolerance local{std::numeric_limits<double>::min(), tol.rel, tol.max_panels};

    DivergenceVerdict out;
    std::vector<double> inc;
    double T = first;
    double S = first > t0 ? integrate(g, t0, first, local) : 0.0;
    out.horizons.emplace_back(T, S);
    for (int k = 1; k <= horizons.octaves; ++k) {
        const double next = T * horizons.ratio;
        double d = 0.0;
        try {
            d = integrate(g, T, next, local);
        } catch (const EvaluationError&) {
            // The integrand left the floating range: the partial integrals are
            // unbounded for all practical purposes.
            out.status = Divergence::Diverging;
            out.tail_ratios.clear();
            return out;
        } catch (const RangeError&) {
            out.status = Divergence::Diverging;
            out.tail_ratios.clear();
            return out;
        }
        S += d;
        if (!std::isfinite(S)) {
            out.status = Divergence::Diverging;
            return out;
        }
        T = next;
        out.horizons.emplace_back(T, S);
        inc.push_back(d);
    }

    if (std::all_of(inc.begin(), inc.end(), [](double d) { return d == 0.0; })) {
        out.status = Divergence::Converging;
        return out;
    }
    const std::size_t n = std::min(kTail, inc.size() - 1);
    bool converging = true, diverging = true;
    for (std::size_t i = inc.size() - n; i < inc.size(); ++i) {
        const double prev = inc[i - 1], cur = inc[i];
        double r;
        if (prev == 0.0) {
            r = cur == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
        } else {
            r = cur / prev;
        }
        out.tail_ratios.push_back(r);
        converging = converging && r <= kConvergingRatio;
        diverging = diverging && r >= kDivergingRatio;
    }
    out.status = converging  ? Divergence::Converging
                 : diverging ? Divergence::Diverging
                             : Divergence::Inconclusive;
    return out;
}

TimeFunction damped_reciprocal(TimeFunction P, TimeFunction Q, double t0, double t_max,
                               const QuadTolerance& tol) {
    require_order(t0, t_max, "damped_reciprocal");
    const auto VQ = antiderivative(std::move(Q), t0, t_max, tol.tightened(10.0));
    return [P = positive(std::move(P), "damped_reciprocal"), VQ](double tau) {
        return safe_exp(-(*VQ)(tau), "damped_reciprocal") / P(tau);
    };
}

TimeFunction nested_kernel_integrand(TimeFunction P, TimeFunction q, TimeFunction r, double t0,
                                     double t_max, const QuadTolerance& tol) {
    require_order(t0, t_max, "nested_kernel_integrand");
    const auto Vq = antiderivative(std::move(q), t0, t_max, tol.tightened(10.0));
    return [P = positive(std::move(P), "nested_kernel_integrand"), r = std::move(r), Vq, t0,
            tol](double tau) {
        if (tau <= t0) return 0.0;
        const double vt = (*Vq)(tau);
        // The kernel may be concentrated near tau; dyadic breaks keep the
        // adaptive sampler from stepping over it on long intervals.
        std::vector<double> breaks;
        for (double d = 1.0; tau - d > t0; d *= 2.0) breaks.push_back(tau - d);
        std::reverse(breaks.begin(), breaks.end());
        const auto panels = adaptive_panels(
            [&](double s) {
                return safe_exp(-(vt - (*Vq)(s)), "nested_kernel_integrand") * r(s);
            },
            t0, tau, tol, breaks);
        double inner = 0.0;
        for (const auto& pn : panels) inner += pn.value;
        return inner / P(tau);
    };
}

}  // namespace rcert
