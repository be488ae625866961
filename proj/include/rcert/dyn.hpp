#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "rcert/dp5.hpp"
#include "rcert/field.hpp"

namespace rcert {

struct IntegrationOptions {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double horizon = 10.0;
    /// |phi| + |psi| above this value is one of the two escape signals.
    double escape_threshold = 1e8;
    /// Smallest admissible step relative to max(1, |t|).
    double min_step = 1e-13;
    std::size_t max_zeros = 100000;
    std::size_t max_steps = 20000000;
    double zero_tol = 1e-10;
};

enum class Terminal {
    ReachedHorizon,
    FiniteEscape,
    StepCollapse,
    /// max_zeros was hit; the trajectory stops early and is flagged.
    Truncated,
};

std::string_view to_string(Terminal t);

struct TerminalStatus {
    Terminal kind = Terminal::ReachedHorizon;
    /// Horizon, last accepted time before escape, or the collapse time.
    double t = 0.0;
    /// Width of the interval [t, t + bracket] expected to contain the escape time.
    double bracket = 0.0;
    std::string reason;
};

/// Numerical solution of phi' = psi / p0, psi' = -r0 phi - (q0 / p0) psi.
class Trajectory {
public:
    using Stepper = DormandPrince<2>;

    const EquationSpec& equation() const noexcept { return eq_; }
    const InitialData& ic() const noexcept { return ic_; }
    const IntegrationOptions& options() const noexcept { return opts_; }
    const std::vector<double>& times() const noexcept { return t_; }
    const std::vector<double>& phi() const noexcept { return phi_; }
    const std::vector<double>& psi() const noexcept { return psi_; }
    const std::vector<double>& zeros() const noexcept { return zeros_; }
    const TerminalStatus& terminal() const noexcept { return terminal_; }
    bool truncated() const noexcept { return terminal_.kind == Terminal::Truncated; }
    /// A sample with |phi| and |psi| both within zero_tol after a nonzero start.
    bool tangential_zero() const noexcept { return tangential_; }

    double t_begin() const noexcept { return t_.front(); }
    double t_end() const noexcept { return t_.back(); }

    /// Dense (phi, psi) at t in [t_begin, t_end].
    std::array<double, 2> state(double t) const;
    double phi_at(double t) const { return state(t)[0]; }
    double psi_at(double t) const { return state(t)[1]; }
    /// phi' = psi / p0(t, phi).
    double dphi_at(double t) const;

    /// Index of the accepted step whose interval contains t.
    std::size_t segment_index(double t) const;

private:
    friend Trajectory integrate(const EquationSpec&, const InitialData&, const IntegrationOptions&);

    EquationSpec eq_;
    InitialData ic_;
    IntegrationOptions opts_;
    std::vector<double> t_, phi_, psi_;
    std::vector<Stepper::Dense> dense_;
    std::vector<double> zeros_;
    TerminalStatus terminal_;
    bool tangential_ = false;
};

/// Integrates from ic.t1 to ic.t1 + opts.horizon. A p0 sample <= 0 raises
/// DomainError; non-finite coefficient values raise EvaluationError.
Trajectory integrate(const EquationSpec& eq, const InitialData& ic, const IntegrationOptions& opts);

struct RefineReport {
    double tol_coarse = 0.0;
    double tol_fine = 0.0;
    /// max |phi_coarse - phi_fine| and max |psi_coarse - psi_fine| on the common grid.
    double max_dphi = 0.0;
    double max_dpsi = 0.0;
    double t_common = 0.0;
    std::size_t grid_points = 0;

    double discrepancy() const noexcept { return max_dphi > max_dpsi ? max_dphi : max_dpsi; }
};

/// Integrates at opts.rel_tol and at a tenth of it (abs_tol scaled alike)
/// and compares both runs on 201 points of their common time span.
RefineReport refine_check(const EquationSpec& eq, const InitialData& ic,
                          const IntegrationOptions& opts);

/// Columns t, phi, psi, y; y is left empty where |phi| <= zero_tol.
void write_trajectory_csv(const Trajectory& traj, const std::filesystem::path& path);
/// Terminal status, zeros and options as JSON.
void write_trajectory_sidecar(const Trajectory& traj, const std::filesystem::path& path);

}  // namespace rcert
