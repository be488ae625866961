#include "rcert/classify.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <thread>

#include "rcert/errors.hpp"
#include "rcert/format.hpp"

namespace rcert {

std::string_view to_string(Kind k) {
    switch (k) {
        case Kind::GlobalMonotoneNonvanishing: return "GlobalMonotoneNonvanishing";
        case Kind::Oscillatory: return "Oscillatory";
        case Kind::SingularOscillatorySecondKind: return "SingularOscillatorySecondKind";
        case Kind::SingularOscillatoryFirstKindCandidate: return "SingularOscillatoryFirstKindCandidate";
        case Kind::GlobalNonOscillatory: return "GlobalNonOscillatory";
        case Kind::Undetermined: return "Undetermined";
    }
    return "unknown";
}

namespace {

std::vector<double> gap_ratios(const std::vector<double>& zeros) {
    std::vector<double> out;
    for (std::size_t i = 2; i < zeros.size(); ++i) {
        const double g0 = zeros[i - 1] - zeros[i - 2];
        const double g1 = zeros[i] - zeros[i - 1];
        out.push_back(g0 > 0.0 ? g1 / g0 : std::numeric_limits<double>::infinity());
    }
    return out;
}

bool abs_nondecreasing(const std::vector<double>& phi, double tol) {
    for (std::size_t k = 1; k < phi.size(); ++k) {
        const double prev = std::abs(phi[k - 1]);
        if (std::abs(phi[k]) < prev - tol * std::max(1.0, prev)) return false;
    }
    return true;
}

// Earliest sample from which |phi| and |phi'| stay inside the band up to the end.
std::optional<double> dead_band_start(const Trajectory& traj, double band) {
    const auto& ts = traj.times();
    std::optional<double> start;
    for (std::size_t k = ts.size(); k-- > 0;) {
        const double t = ts[k];
        const double phi = traj.phi()[k];
        const double dphi = traj.psi()[k] / traj.equation().p0(t, phi);
        if (std::abs(phi) > band || std::abs(dphi) > band) break;
        start = t;
    }
    return start;
}

}  // namespace

Classification classify(const Trajectory& traj, const ClassifyPolicy& policy) {
    Classification c;
    c.zero_count = traj.zeros().size();
    c.gap_ratios = gap_ratios(traj.zeros());
    c.terminal = traj.terminal().kind;
    c.terminal_time = traj.terminal().t;
    c.monotone = abs_nondecreasing(traj.phi(), policy.monotone_tol);
    const double span = traj.t_end() - traj.t_begin();

    const bool trivial = std::all_of(traj.phi().begin(), traj.phi().end(), [](double v) { return v == 0.0; }) &&
                         std::all_of(traj.psi().begin(), traj.psi().end(), [](double v) { return v == 0.0; });
    if (trivial) {
        c.kind = traj.terminal().kind == Terminal::ReachedHorizon ? Kind::GlobalNonOscillatory : Kind::Undetermined;
        c.note = "trivial solution";
        return c;
    }
    if (traj.truncated()) {
        c.kind = Kind::Undetermined;
        c.note = "trajectory truncated at max_zeros";
        return c;
    }
    if (traj.terminal().kind == Terminal::ReachedHorizon && c.zero_count > 0) {
        c.dead_band_from = dead_band_start(traj, policy.dead_band_factor * traj.options().zero_tol);
        if (c.dead_band_from && traj.t_end() - *c.dead_band_from >= policy.dead_band_fraction * span &&
            traj.zeros().front() < *c.dead_band_from) {
            c.kind = Kind::SingularOscillatoryFirstKindCandidate;
            c.note = "sign changes followed by a sustained dead band; a candidate only, since under "
                     "uniqueness the solution through a point with phi = phi' = 0 is trivial";
            return c;
        }
    }
    if (traj.tangential_zero()) {
        c.kind = Kind::Undetermined;
        c.note = "tangential zero: phi and phi' vanish together";
        return c;
    }
    switch (traj.terminal().kind) {
        case Terminal::StepCollapse:
        case Terminal::Truncated:
            c.kind = Kind::Undetermined;
            c.note = traj.terminal().reason;
            return c;
        case Terminal::FiniteEscape: {
            const auto& r = c.gap_ratios;
            const std::size_t need = policy.k > 0 ? policy.k - 1 : 0;
            const bool accumulating =
                c.zero_count >= policy.k + 1 && r.size() >= need &&
                std::all_of(r.end() - static_cast<std::ptrdiff_t>(need), r.end(),
                            [&](double x) { return x <= policy.gap_ratio; });
            if (accumulating) {
                c.kind = Kind::SingularOscillatorySecondKind;
                c.note = "zero gaps shrink geometrically towards the escape time";
            } else {
                c.kind = Kind::Undetermined;
                c.note = "finite escape without accumulating sign changes";
            }
            return c;
        }
        case Terminal::ReachedHorizon: break;
    }
    const double zt = traj.options().zero_tol;
    const bool nonvanishing = std::all_of(traj.phi().begin(), traj.phi().end(),
                                          [zt](double v) { return std::abs(v) > zt; });
    if (c.zero_count == 0 && nonvanishing && c.monotone) {
        c.kind = Kind::GlobalMonotoneNonvanishing;
        return c;
    }
    if (c.zero_count >= policy.min_zeros &&
        traj.zeros().back() >= traj.t_end() - policy.window * span) {
        c.kind = Kind::Oscillatory;
        return c;
    }
    c.kind = Kind::GlobalNonOscillatory;
    return c;
}

std::size_t batch_threads(std::size_t jobs) {
    std::size_t n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("RCERT_THREADS")) {
        char* end = nullptr;
        const long cap = std::strtol(env, &end, 10);
        if (end != env && cap > 0) n = std::min<std::size_t>(n, static_cast<std::size_t>(cap));
    }
    return std::max<std::size_t>(1, std::min(n, jobs));
}

std::vector<RasterCell> sweep(const EquationSpec& eq, double t1, const IcRectangle& rect,
                              std::size_t n_phi, std::size_t n_dphi, const IntegrationOptions& opts,
                              const ClassifyPolicy& policy) {
    if (n_phi < 2 || n_dphi < 2) throw DomainError("sweep: resolution must be at least 2 x 2");
    const auto phis = linspace(rect.phi_lo, rect.phi_hi, n_phi);
    const auto dphis = linspace(rect.dphi_lo, rect.dphi_hi, n_dphi);
    std::vector<RasterCell> raster(n_phi * n_dphi);
    for (std::size_t i = 0; i < n_phi; ++i) {
        for (std::size_t j = 0; j < n_dphi; ++j) {
            raster[i * n_dphi + j].ic_phi = phis[i];
            raster[i * n_dphi + j].ic_dphi = dphis[j];
        }
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < raster.size(); k = next++) {
            auto& cell = raster[k];
            try {
                const auto traj = integrate(eq, {t1, cell.ic_phi, cell.ic_dphi}, opts);
                const auto c = classify(traj, policy);
                cell.kind = c.kind;
                cell.zero_count = c.zero_count;
                if (traj.terminal().kind == Terminal::FiniteEscape) cell.escape_time = traj.terminal().t;
            } catch (const std::exception& e) {
                cell.kind = Kind::Undetermined;
                cell.error = e.what();
            }
        }
    };
    const auto n = batch_threads(raster.size());
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < n; ++w) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    return raster;
}

void write_raster_csv(const std::vector<RasterCell>& raster, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out << "ic_phi,ic_dphi,kind,zero_count,escape_time\n";
    for (const auto& c : raster) {
        out << format_double(c.ic_phi) << ',' << format_double(c.ic_dphi) << ',' << to_string(c.kind)
            << ',' << c.zero_count << ',';
        if (c.escape_time) out << format_double(*c.escape_time);
        out << '\n';
    }
}

}  // namespace rcert
