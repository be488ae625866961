#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rcert/dyn.hpp"

namespace rcert {

enum class Kind {
    GlobalMonotoneNonvanishing,
    Oscillatory,
    SingularOscillatorySecondKind,
    /// Never asserted outright: under uniqueness this class is empty, so a
    /// dead band after sign changes is reported as a candidate only.
    SingularOscillatoryFirstKindCandidate,
    GlobalNonOscillatory,
    Undetermined,
};

std::string_view to_string(Kind k);

struct ClassifyPolicy {
    std::size_t min_zeros = 3;
    /// Oscillatory needs a zero in the last `window` fraction of the span.
    double window = 0.25;
    /// Second kind needs the last k zero gaps to shrink by at least this ratio.
    double gap_ratio = 0.9;
    std::size_t k = 4;
    /// Dead band |phi|, |phi'| <= dead_band_factor * zero_tol ...
    double dead_band_factor = 10.0;
    /// ... held over at least this fraction of the span.
    double dead_band_fraction = 0.05;
    /// Relative slack for "|phi| nondecreasing".
    double monotone_tol = 1e-8;
};

struct Classification {
    Kind kind = Kind::Undetermined;
    std::size_t zero_count = 0;
    /// Ratios of consecutive zero gaps, oldest first.
    std::vector<double> gap_ratios;
    Terminal terminal = Terminal::ReachedHorizon;
    double terminal_time = 0.0;
    bool monotone = false;
    /// Start of a sustained dead band, if any.
    std::optional<double> dead_band_from;
    std::string note;
};

Classification classify(const Trajectory& traj, const ClassifyPolicy& policy = {});

struct IcRectangle {
    double phi_lo = -1.0, phi_hi = 1.0;
    double dphi_lo = -1.0, dphi_hi = 1.0;
};

struct RasterCell {
    double ic_phi = 0.0;
    double ic_dphi = 0.0;
    Kind kind = Kind::Undetermined;
    std::size_t zero_count = 0;
    std::optional<double> escape_time;
    /// Error message when the cell failed; the kind is then Undetermined.
    std::string error;
};

/// Classifies the trajectory of every IC on an n_phi x n_dphi raster (row
/// major in phi) starting at t1. Worker count: hardware concurrency capped
/// by RCERT_THREADS.
std::vector<RasterCell> sweep(const EquationSpec& eq, double t1, const IcRectangle& rect,
                              std::size_t n_phi, std::size_t n_dphi, const IntegrationOptions& opts,
                              const ClassifyPolicy& policy = {});

/// Columns ic_phi, ic_dphi, kind, zero_count, escape_time (empty if none).
void write_raster_csv(const std::vector<RasterCell>& raster, const std::filesystem::path& path);

/// Worker count for batch runs: hardware concurrency, capped by RCERT_THREADS.
std::size_t batch_threads(std::size_t jobs);

}  // namespace rcert
